#include <gtest/gtest.h>

#include <random>
#include <set>

#include "kbad/alignment.hpp"
#include "kbad/features.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace kbad;
using testutil::typed;
using Kind = MappingEntry::Kind;

namespace {

std::vector<std::string> names(const KeystrokeSequence& s) { return s.key_names(); }

KeystrokeSequence random_keys(std::mt19937_64& rng, int min_len, int max_len, int alphabet) {
  static const std::vector<std::string> pool{"A", "B", "C", "D", "LeftShift", "Space", "E", "F"};
  std::uniform_int_distribution<int> len(min_len, max_len), key(0, alphabet - 1), gap(1, 250);
  std::vector<std::string> keys(len(rng));
  for (auto& k : keys) k = pool[key(rng)];
  KeystrokeSequence seq;
  Millis t = 0;
  for (const auto& k : keys) {
    t += gap(rng);
    seq.keystrokes.push_back({k, t, t + gap(rng)});
  }
  return seq;
}

}  // namespace

TEST(Align, IdentityOnEqualSequences) {
  const auto s = typed({"LeftShift", "J", "O", "Space", "LeftShift", "M", "O"});
  const auto a = align(s, s);
  EXPECT_EQ(a.sequence.keystrokes, s.keystrokes);
  EXPECT_TRUE(a.sequence.aligned);
  EXPECT_TRUE(a.mapping.ignored.empty());
  EXPECT_FALSE(a.mapping.exhausted);
  for (std::size_t i = 0; i < s.size(); ++i) EXPECT_EQ(a.mapping.mapping[i], (MappingEntry{Kind::Matched, i}));
}

TEST(Align, SubstitutionAtCorrespondingPosition) {
  const auto a = align(typed({"A", "C"}), typed({"A", "B"}));
  ASSERT_EQ(a.mapping.mapping.size(), 2u);
  EXPECT_EQ(a.mapping.mapping[0], (MappingEntry{Kind::Matched, 0}));
  EXPECT_EQ(a.mapping.mapping[1], (MappingEntry{Kind::Substituted, 1}));
  EXPECT_EQ(a.sequence[1].key, "C");
}

TEST(Align, DeletedShiftAndTransposition) {
  // Target: Shift J Space Shift M. Given: the first Shift is missing and the
  // second Shift went down before the Space.
  const auto target = typed({"LeftShift", "J", "Space", "LeftShift", "M"});
  const auto given = testutil::keystrokes({{"J", 0, 90}, {"Space", 180, 250}, {"LeftShift", 200, 420}, {"M", 330, 400}});
  const auto a = align(given, target);
  const std::vector<MappingEntry> expected{{Kind::Matched, 2},
                                           {Kind::Matched, 0},
                                           {Kind::Matched, 1},
                                           {Kind::Substituted, 3},
                                           {Kind::Matched, 3}};
  EXPECT_EQ(a.mapping.mapping, expected);
  EXPECT_TRUE(a.mapping.exhausted);
  EXPECT_TRUE(a.mapping.ignored.empty());
  ASSERT_EQ(a.sequence.size(), 5u);
  const auto f = extract_features(a.sequence);
  // Shift (200) aligned before J (0)
  EXPECT_EQ(f.latencies[0], -200.0);
}

TEST(Align, SpaceShiftTranspositionGivesNegativeLatency) {
  const auto target = typed({"J", "Space", "LeftShift", "M"});
  const auto given = testutil::keystrokes({{"J", 0, 80}, {"LeftShift", 150, 380}, {"Space", 190, 260}, {"M", 300, 370}});
  const auto a = align(given, target);
  EXPECT_FALSE(a.mapping.exhausted);
  EXPECT_EQ(a.mapping.mapping[1], (MappingEntry{Kind::Matched, 2}));
  EXPECT_EQ(a.mapping.mapping[2], (MappingEntry{Kind::Matched, 1}));
  const auto f = extract_features(a.sequence);
  EXPECT_EQ(f.latencies, (std::vector<double>{190, -40, 150}));
}

TEST(Align, ClosestOccurrenceWithTiesTowardSmallerIndex) {
  // Target position 2 asks for A; given has A at 1 and 3.
  const auto a = align(typed({"B", "A", "C", "A"}), typed({"X", "Y", "A"}));
  EXPECT_EQ(a.mapping.mapping[2], (MappingEntry{Kind::Matched, 1}));
}

TEST(Align, UniqueKeyIsNotTakenByAnEarlierStandIn) {
  const auto a = align(typed({"K", "B"}), typed({"A", "K"}));
  EXPECT_EQ(a.mapping.mapping[1], (MappingEntry{Kind::Matched, 0}));
  EXPECT_EQ(a.mapping.mapping[0], (MappingEntry{Kind::Substituted, 1}));
}

TEST(Align, LeftAndRightShiftDistinctUnlessMerged) {
  const auto target = typed({"LeftShift", "A"});
  const auto given = typed({"A", "RightShift"});
  EXPECT_EQ(align(given, target).mapping.mapping[0].kind, Kind::Substituted);
  AlignOptions merged;
  merged.merge_shift = true;
  EXPECT_EQ(align(given, target, merged).mapping.mapping[0], (MappingEntry{Kind::Matched, 1}));
}

TEST(Align, ReuseGivenAllowsRepeatedIndices) {
  AlignOptions reuse;
  reuse.reuse_given = true;
  const auto a = align(typed({"A", "B"}), typed({"A", "A", "B"}), reuse);
  EXPECT_EQ(a.mapping.mapping[0], (MappingEntry{Kind::Matched, 0}));
  EXPECT_EQ(a.mapping.mapping[1], (MappingEntry{Kind::Matched, 0}));
  EXPECT_EQ(a.mapping.mapping[2], (MappingEntry{Kind::Matched, 1}));
  EXPECT_FALSE(a.mapping.exhausted);
}

TEST(Align, EmptyInputsThrow) {
  EXPECT_THROW(align(KeystrokeSequence{}, typed({"A"})), Error);
  EXPECT_THROW(align(typed({"A"}), KeystrokeSequence{}), Error);
  EXPECT_THROW(truncate_align(KeystrokeSequence{}, typed({"A"})), Error);
}

TEST(AlignProperty, LengthInjectivityTimestampsAndUniqueKeys) {
  std::mt19937_64 rng(5);
  int exhausted = 0;
  for (int trial = 0; trial < 5000; ++trial) {
    const int alphabet = 2 + trial % 7;
    const auto target = random_keys(rng, 1, 12, alphabet);
    const auto given = random_keys(rng, 1, 12, alphabet);
    const auto a = align(given, target);
    ASSERT_EQ(a.sequence.size(), target.size());
    ASSERT_EQ(a.mapping.mapping.size(), target.size());
    EXPECT_EQ(a.mapping.target_len, target.size());

    std::set<std::size_t> used;
    for (std::size_t i = 0; i < target.size(); ++i) {
      const auto& e = a.mapping.mapping[i];
      ASSERT_LT(e.given_index, given.size());
      EXPECT_EQ(a.sequence[i], given[e.given_index]);
      if (e.kind == Kind::Matched) {
        EXPECT_EQ(given[e.given_index].key, target[i].key);
      }
      used.insert(e.given_index);
    }
    if (a.mapping.exhausted) {
      ++exhausted;
      EXPECT_LT(given.size(), target.size());
    } else {
      EXPECT_EQ(used.size(), target.size()) << "a given keystroke was used twice";
    }
    if (given.size() >= target.size()) {
      EXPECT_FALSE(a.mapping.exhausted);
    }
    for (std::size_t j : a.mapping.ignored) EXPECT_EQ(used.count(j), 0u);
    EXPECT_EQ(used.size() + a.mapping.ignored.size(), given.size());

    const auto tk = names(target), gk = names(given);
    for (std::size_t i = 0; i < tk.size(); ++i) {
      if (std::count(tk.begin(), tk.end(), tk[i]) != 1) continue;
      if (std::count(gk.begin(), gk.end(), tk[i]) != 1) continue;
      const auto j = static_cast<std::size_t>(std::find(gk.begin(), gk.end(), tk[i]) - gk.begin());
      EXPECT_EQ(a.mapping.mapping[i], (MappingEntry{Kind::Matched, j}));
    }
  }
  EXPECT_GT(exhausted, 0);
}

TEST(TruncateAlign, Examples) {
  const auto given = typed({"A", "B", "C", "D", "E"});
  const auto t = truncate_align(given, typed({"X", "Y", "Z"}));
  EXPECT_EQ(names(t), (std::vector<std::string>{"A", "B", "C"}));
  EXPECT_EQ(truncate_align(given, given).keystrokes, given.keystrokes);
  const auto padded = truncate_align(typed({"A", "B"}), typed({"X", "Y", "Z"}));
  ASSERT_EQ(padded.size(), 3u);
  EXPECT_EQ(padded[2], padded[1]);
  EXPECT_EQ(extract_features(padded).size(), 5u);
}

TEST(DiscardModifiers, Examples) {
  EXPECT_EQ(names(discard_modifiers(typed({"LeftShift", "T"}))), (std::vector<std::string>{"T"}));
  const auto plain = typed({"A", "B"});
  EXPECT_EQ(discard_modifiers(plain), plain);
  EXPECT_EQ(names(discard_modifiers(typed({"CapsLock", "A", "CapsLock", "B", "RightShift"}))),
            (std::vector<std::string>{"A", "B"}));
  const auto s = typed({"RightShift", "C", "LeftShift", "D", "E"});
  const auto d = discard_modifiers(s);
  EXPECT_EQ(d[0], s[1]);
  EXPECT_EQ(d[1], s[3]);
  EXPECT_EQ(d[2], s[4]);
}

TEST(SelectTarget, FirstShortest) {
  auto of_len = [](std::size_t n) { return typed(std::vector<std::string>(n, "A")); };
  std::vector<KeystrokeSequence> v{of_len(26), of_len(25), of_len(25), of_len(27)};
  EXPECT_EQ(select_target(v), 1u);
  std::vector<KeystrokeSequence> same{of_len(3), of_len(3)};
  EXPECT_EQ(select_target(same), 0u);
  std::vector<KeystrokeSequence> one{of_len(4)};
  EXPECT_EQ(select_target(one), 0u);
}

TEST(AlignSubject, InsertedShiftIsIgnored) {
  const auto base = typed({"J", "O", "Space", "M", "O"});
  std::vector<KeystrokeSequence> templates{typed({"J", "O", "Space", "M", "O", "E"}), base};
  std::vector<KeystrokeSequence> queries{typed({"J", "O", "Space", "LeftShift", "M", "O"}), base};
  const auto out = align_subject(templates, queries);
  EXPECT_EQ(out.target_index, 1u);
  EXPECT_EQ(out.templates[1].sequence.keystrokes, base.keystrokes);
  EXPECT_EQ(out.templates[0].mapping.ignored, (std::vector<std::size_t>{5}));
  EXPECT_EQ(out.queries[0].mapping.ignored, (std::vector<std::size_t>{3}));
  EXPECT_EQ(out.queries[1].sequence.keystrokes, base.keystrokes);
  for (const auto& a : out.queries) EXPECT_EQ(a.sequence.size(), base.size());
  for (const auto& a : out.templates) EXPECT_EQ(a.sequence.size(), base.size());
}

TEST(DamerauLevenshtein, Examples) {
  auto dl = [](const std::string& a, const std::string& b) {
    const auto ka = oracle::as_keys(a), kb = oracle::as_keys(b);
    return damerau_levenshtein(ka, kb);
  };
  EXPECT_EQ(dl("ABC", "ABC"), 0u);
  EXPECT_EQ(dl("AB", "BA"), 1u);
  EXPECT_EQ(dl("CA", "ABC"), 2u);
  EXPECT_EQ(dl("", "ABC"), 3u);
  EXPECT_EQ(dl("KITTEN", "SITTING"), 3u);
}

TEST(DamerauLevenshtein, MatchesEditPathSearchExhaustively) {
  const std::string alphabet = "ABC";
  const auto strings = oracle::all_strings(alphabet, 4);
  const oracle::EditGraph graph(alphabet, 6);
  for (const auto& a : strings) {
    const auto dist = graph.distances_from(a);
    const auto ka = oracle::as_keys(a);
    for (const auto& b : strings) {
      const auto kb = oracle::as_keys(b);
      ASSERT_EQ(damerau_levenshtein(ka, kb), static_cast<std::size_t>(dist.at(b))) << a << " vs " << b;
    }
  }
}

TEST(DamerauLevenshteinProperty, MetricAxiomsOnCorpus) {
  const auto strings = oracle::all_strings("ABC", 3);
  std::vector<std::vector<std::string>> keys;
  for (const auto& s : strings) keys.push_back(oracle::as_keys(s));
  for (const auto& a : keys) {
    for (const auto& b : keys) {
      const auto ab = damerau_levenshtein(a, b);
      EXPECT_EQ(ab, damerau_levenshtein(b, a));
      EXPECT_EQ(ab == 0, a == b);
      for (const auto& c : keys) EXPECT_LE(ab, damerau_levenshtein(a, c) + damerau_levenshtein(c, b));
    }
  }
}

TEST(Audit, IdenticalSequencesNeverDiffer) {
  SubjectDataset ds;
  for (const char* id : {"s1", "s2"}) {
    auto& subj = ds.subjects[id];
    for (int i = 0; i < 3; ++i) subj.templates.push_back({id, "t" + std::to_string(i), Role::Template, Label::Genuine, typed({"A", "B"})});
    for (int i = 0; i < 2; ++i) subj.queries.push_back({id, "q" + std::to_string(i), Role::Query, std::nullopt, typed({"A", "B"})});
  }
  const auto r = audit_dataset(ds);
  EXPECT_EQ(r.template_template.count_total, 6u);
  EXPECT_EQ(r.query_template.count_total, 12u);
  EXPECT_EQ(r.template_template.count_differing, 0u);
  EXPECT_EQ(r.query_template.mean_dl, 0.0);
}

TEST(Audit, HandCountedStatistics) {
  SubjectDataset ds;
  auto& subj = ds.subjects["s"];
  subj.templates.push_back({"s", "t0", Role::Template, Label::Genuine, typed({"A", "B", "C"})});
  subj.templates.push_back({"s", "t1", Role::Template, Label::Genuine, typed({"B", "A", "C"})});
  subj.queries.push_back({"s", "q0", Role::Query, std::nullopt, typed({"A", "B", "C"})});
  const auto r = audit_dataset(ds);
  EXPECT_EQ(r.template_template.count_total, 1u);
  EXPECT_EQ(r.template_template.count_differing, 1u);
  EXPECT_EQ(r.template_template.max_dl, 1u);
  EXPECT_EQ(r.query_template.count_total, 2u);
  EXPECT_EQ(r.query_template.count_differing, 1u);
  EXPECT_DOUBLE_EQ(r.query_template.mean_dl, 0.5);
  EXPECT_DOUBLE_EQ(r.query_template.sd_dl, 0.5);
  const auto text = format_audit(r);
  EXPECT_EQ(text.substr(0, text.find('\n')), "comparison_type\tcount_total\tcount_differing\tmean_dl\tsd_dl\tmax_dl");
}
