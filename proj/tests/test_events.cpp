#include <gtest/gtest.h>

#include <random>

#include "kbad/events.hpp"
#include "test_util.hpp"

using namespace kbad;

TEST(ParseRawEvents, MinimalSample) {
  const auto ev = parse_raw_events("P 1c 0\nR 1c 95");
  ASSERT_EQ(ev.size(), 2u);
  EXPECT_EQ(ev[0], (RawEvent{Action::Press, 0x1c, 0}));
  EXPECT_EQ(ev[1], (RawEvent{Action::Release, 0x1c, 95}));
}

TEST(ParseRawEvents, EmptyText) {
  EXPECT_TRUE(parse_raw_events("").empty());
  EXPECT_TRUE(parse_raw_events("\n\n  \n").empty());
}

TEST(ParseRawEvents, ErrorsNameTheLine) {
  try {
    parse_raw_events("P 1c -5");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 1u);
  }
  try {
    parse_raw_events("P 1c 0\n\nX 1c 4\n");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
  EXPECT_THROW(parse_raw_events("P 1c"), ParseError);
  EXPECT_THROW(parse_raw_events("P zz 3"), ParseError);
  EXPECT_THROW(parse_raw_events("P 1c 3 extra"), ParseError);
  EXPECT_THROW(parse_raw_events("P 1c 3.5"), ParseError);
}

TEST(ScancodeTable, NamesAndFallback) {
  EXPECT_EQ(key_name(0x1c), "A");
  EXPECT_EQ(key_name(0x12), "LeftShift");
  EXPECT_EQ(key_name(0x59), "RightShift");
  EXPECT_EQ(key_name(0x58), "CapsLock");
  EXPECT_EQ(key_name(0x7b), "KeypadMinus");
  EXPECT_EQ(key_name(0x1ff), "key_1ff");
  EXPECT_EQ(scancode_for("key_1ff"), 0x1ff);
  EXPECT_EQ(scancode_for("Space"), 0x29);
  EXPECT_THROW(scancode_for("NoSuchKey"), Error);
  for (std::uint16_t code = 0; code < 0x100; ++code) EXPECT_EQ(scancode_for(key_name(code)), code);
  EXPECT_TRUE(is_shift("LeftShift"));
  EXPECT_FALSE(is_shift("CapsLock"));
  EXPECT_TRUE(is_modifier("CapsLock"));
  EXPECT_FALSE(is_modifier("A"));
}

TEST(PairEvents, SingleKeystroke) {
  const auto seq = pair_events({{Action::Press, 0x1c, 0}, {Action::Release, 0x1c, 100}});
  ASSERT_EQ(seq.size(), 1u);
  EXPECT_EQ(seq[0], (Keystroke{"A", 0, 100}));
}

TEST(PairEvents, Rollover) {
  // cumulative times 0, 50, 120, 160
  const auto seq = pair_events({{Action::Press, 0x1c, 0},
                                {Action::Press, 0x32, 50},
                                {Action::Release, 0x1c, 70},
                                {Action::Release, 0x32, 40}});
  ASSERT_EQ(seq.size(), 2u);
  EXPECT_EQ(seq[0], (Keystroke{"A", 0, 120}));
  EXPECT_EQ(seq[1], (Keystroke{"B", 50, 160}));
}

TEST(PairEvents, ReleaseWithoutPressThrows) {
  EXPECT_THROW(pair_events({{Action::Release, 0x1c, 0}}), Error);
}

TEST(PairEvents, UnreleasedKeyClosesAtEndWithWarning) {
  std::vector<std::string> warnings;
  const auto seq = pair_events({{Action::Press, 0x12, 0},
                                {Action::Press, 0x1c, 30},
                                {Action::Release, 0x1c, 80}},
                               &warnings);
  ASSERT_EQ(seq.size(), 2u);
  EXPECT_EQ(seq[0], (Keystroke{"LeftShift", 0, 110}));
  ASSERT_EQ(warnings.size(), 1u);
  EXPECT_NE(warnings[0].find("LeftShift"), std::string::npos);
}

TEST(PairEvents, AutoRepeatOpensNewKeystroke) {
  const auto seq = pair_events({{Action::Press, 0x1c, 0},
                                {Action::Press, 0x1c, 500},
                                {Action::Press, 0x1c, 30},
                                {Action::Release, 0x1c, 30}});
  ASSERT_EQ(seq.size(), 3u);
  EXPECT_EQ(seq[0], (Keystroke{"A", 0, 500}));
  EXPECT_EQ(seq[1], (Keystroke{"A", 500, 530}));
  EXPECT_EQ(seq[2], (Keystroke{"A", 530, 560}));
}

namespace {

KeystrokeSequence random_sequence(std::mt19937_64& rng) {
  static const std::vector<std::string> keys{"A", "B", "J", "M", "Space", "LeftShift", "RightShift", "CapsLock"};
  std::uniform_int_distribution<int> count(1, 25), key(0, static_cast<int>(keys.size()) - 1),
      gap(0, 300), hold(0, 400);
  KeystrokeSequence seq;
  Millis t = 0;
  const int n = count(rng);
  for (int i = 0; i < n; ++i) {
    t += gap(rng);
    const std::string& k = keys[key(rng)];
    Millis release = t + hold(rng);
    // a later press of the same key may not start while it is held
    for (auto& prev : seq.keystrokes) {
      if (prev.key == k && prev.release_t > t) prev.release_t = t;
    }
    seq.keystrokes.push_back({k, t, release});
  }
  return seq;
}

}  // namespace

TEST(PairEventsProperty, RoundTripThroughCanonicalText) {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 500; ++trial) {
    const auto seq = random_sequence(rng);
    const auto text = format_raw_events(to_raw_events(seq));
    std::vector<std::string> warnings;
    const auto events = parse_raw_events(text);
    const auto back = pair_events(events, &warnings);
    EXPECT_TRUE(warnings.empty());
    ASSERT_EQ(back, seq) << text;
    ASSERT_FALSE(events.empty());
    EXPECT_EQ(events.front().delta_ms, seq[0].press_t);
    std::size_t presses = 0;
    for (const auto& e : events) presses += e.action == Action::Press;
    EXPECT_EQ(presses, back.size());
    for (std::size_t i = 0; i < back.size(); ++i) {
      EXPECT_GE(back[i].release_t, back[i].press_t);
      if (i > 0) {
        EXPECT_GE(back[i].press_t, back[i - 1].press_t);
      }
    }
  }
}
