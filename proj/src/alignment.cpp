#include "kbad/alignment.hpp"

#include <algorithm>
#include <cstdlib>
#include <optional>

#include "kbad/events.hpp"

namespace kbad {

namespace {

bool same_key(const std::string& a, const std::string& b, const AlignOptions& options) {
  if (a == b) return true;
  return options.merge_shift && is_shift(a) && is_shift(b);
}

std::size_t distance(std::size_t a, std::size_t b) { return a > b ? a - b : b - a; }

// Nearest unconsumed index to `pos`, ties toward the smaller index.
std::optional<std::size_t> nearest_free(const std::vector<bool>& used, std::size_t pos) {
  std::optional<std::size_t> best;
  for (std::size_t j = 0; j < used.size(); ++j) {
    if (used[j]) continue;
    if (!best || distance(j, pos) < distance(*best, pos)) best = j;
  }
  return best;
}

}  // namespace

Alignment align(const KeystrokeSequence& given, const KeystrokeSequence& target,
                const AlignOptions& options) {
  if (given.empty()) throw Error("align: given sequence is empty");
  if (target.empty()) throw Error("align: target sequence is empty");

  const std::size_t n = target.size();
  std::vector<bool> used(given.size(), false);
  Alignment out;
  out.mapping.target_len = n;
  out.mapping.mapping.reserve(n);
  out.sequence.aligned = true;
  out.sequence.keystrokes.reserve(n);

  // Matching runs over every position before any substitution, so a stand-in
  // never takes a keystroke that a later position would match by name.
  std::vector<std::optional<MappingEntry>> entries(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& key = target[i].key;
    std::optional<std::size_t> match;
    for (std::size_t j = 0; j < given.size(); ++j) {
      if (used[j] && !options.reuse_given) continue;
      if (!same_key(given[j].key, key, options)) continue;
      if (!match || distance(j, i) < distance(*match, i)) match = j;
    }
    if (match) {
      entries[i] = MappingEntry{MappingEntry::Kind::Matched, *match};
      used[*match] = true;
    }
  }

  for (std::size_t i = 0; i < n; ++i) {
    if (entries[i]) continue;
    std::size_t sub;
    if (options.reuse_given) {
      sub = std::min(i, given.size() - 1);
    } else if (i < given.size() && !used[i]) {
      sub = i;
    } else if (auto free = nearest_free(used, i)) {
      sub = *free;
    } else {
      sub = given.size() - 1;
      out.mapping.exhausted = true;
    }
    entries[i] = MappingEntry{MappingEntry::Kind::Substituted, sub};
    used[sub] = true;
  }

  for (const auto& entry : entries) {
    out.mapping.mapping.push_back(*entry);
    out.sequence.keystrokes.push_back(given[entry->given_index]);
  }

  for (std::size_t j = 0; j < given.size(); ++j) {
    if (!used[j]) out.mapping.ignored.push_back(j);
  }
  return out;
}

KeystrokeSequence truncate_align(const KeystrokeSequence& given, const KeystrokeSequence& target) {
  if (given.empty()) throw Error("truncate_align: given sequence is empty");
  if (target.empty()) throw Error("truncate_align: target sequence is empty");
  KeystrokeSequence out;
  out.aligned = true;
  out.keystrokes.reserve(target.size());
  for (std::size_t i = 0; i < target.size(); ++i) {
    out.keystrokes.push_back(given[std::min(i, given.size() - 1)]);
  }
  return out;
}

KeystrokeSequence discard_modifiers(const KeystrokeSequence& seq) {
  KeystrokeSequence out;
  out.aligned = seq.aligned;
  for (const auto& k : seq.keystrokes) {
    if (!is_modifier(k.key)) out.keystrokes.push_back(k);
  }
  return out;
}

std::size_t select_target(std::span<const KeystrokeSequence> templates) {
  if (templates.empty()) throw Error("select_target: no templates");
  std::size_t best = 0;
  for (std::size_t i = 1; i < templates.size(); ++i) {
    if (templates[i].size() < templates[best].size()) best = i;
  }
  return best;
}

AlignedSubject align_subject(std::span<const KeystrokeSequence> templates,
                             std::span<const KeystrokeSequence> queries,
                             const AlignOptions& options) {
  AlignedSubject out;
  out.target_index = select_target(templates);
  const auto& target = templates[out.target_index];
  for (std::size_t i = 0; i < templates.size(); ++i) {
    if (i == out.target_index) {
      Alignment identity;
      identity.sequence = target;
      identity.sequence.aligned = true;
      identity.mapping.target_len = target.size();
      for (std::size_t j = 0; j < target.size(); ++j) {
        identity.mapping.mapping.push_back({MappingEntry::Kind::Matched, j});
      }
      out.templates.push_back(std::move(identity));
    } else {
      out.templates.push_back(align(templates[i], target, options));
    }
  }
  for (const auto& q : queries) out.queries.push_back(align(q, target, options));
  return out;
}

}  // namespace kbad
