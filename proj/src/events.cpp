#include "kbad/events.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <map>
#include <sstream>
#include <tuple>
#include <unordered_map>

namespace kbad {

namespace {

struct ScancodeEntry {
  std::uint16_t code;
  const char* name;
};

// PS/2 scancode set 2 make codes (non-extended subset).
constexpr ScancodeEntry kScancodes[] = {
    {0x1c, "A"},         {0x32, "B"},         {0x21, "C"},
    {0x23, "D"},         {0x24, "E"},         {0x2b, "F"},
    {0x34, "G"},         {0x33, "H"},         {0x43, "I"},
    {0x3b, "J"},         {0x42, "K"},         {0x4b, "L"},
    {0x3a, "M"},         {0x31, "N"},         {0x44, "O"},
    {0x4d, "P"},         {0x15, "Q"},         {0x2d, "R"},
    {0x1b, "S"},         {0x2c, "T"},         {0x3c, "U"},
    {0x2a, "V"},         {0x1d, "W"},         {0x22, "X"},
    {0x35, "Y"},         {0x1a, "Z"},         {0x45, "0"},
    {0x16, "1"},         {0x1e, "2"},         {0x26, "3"},
    {0x25, "4"},         {0x2e, "5"},         {0x36, "6"},
    {0x3d, "7"},         {0x3e, "8"},         {0x46, "9"},
    {0x29, "Space"},     {0x12, "LeftShift"}, {0x59, "RightShift"},
    {0x58, "CapsLock"},  {0x66, "Backspace"}, {0x5a, "Enter"},
    {0x0d, "Tab"},       {0x76, "Escape"},    {0x14, "LeftCtrl"},
    {0x11, "LeftAlt"},   {0x0e, "Backquote"}, {0x4e, "Minus"},
    {0x55, "Equal"},     {0x54, "LeftBracket"},
    {0x5b, "RightBracket"},                   {0x5d, "Backslash"},
    {0x4c, "Semicolon"}, {0x52, "Quote"},     {0x41, "Comma"},
    {0x49, "Period"},    {0x4a, "Slash"},     {0x61, "IntlBackslash"},
    {0x77, "NumLock"},   {0x7c, "KeypadMultiply"},
    {0x7b, "KeypadMinus"},                    {0x79, "KeypadPlus"},
    {0x71, "KeypadPeriod"},                   {0x70, "Keypad0"},
    {0x69, "Keypad1"},   {0x72, "Keypad2"},   {0x7a, "Keypad3"},
    {0x6b, "Keypad4"},   {0x73, "Keypad5"},   {0x74, "Keypad6"},
    {0x6c, "Keypad7"},   {0x75, "Keypad8"},   {0x7d, "Keypad9"},
    {0x05, "F1"},        {0x06, "F2"},        {0x04, "F3"},
    {0x0c, "F4"},        {0x03, "F5"},        {0x0b, "F6"},
    {0x83, "F7"},        {0x0a, "F8"},        {0x7e, "ScrollLock"},
};

const std::unordered_map<std::uint16_t, std::string>& code_to_name() {
  static const auto table = [] {
    std::unordered_map<std::uint16_t, std::string> m;
    for (const auto& e : kScancodes) m.emplace(e.code, e.name);
    return m;
  }();
  return table;
}

const std::unordered_map<std::string, std::uint16_t>& name_to_code() {
  static const auto table = [] {
    std::unordered_map<std::string, std::uint16_t> m;
    for (const auto& e : kScancodes) m.emplace(e.name, e.code);
    return m;
  }();
  return table;
}

std::string hex(std::uint16_t v) {
  std::array<char, 8> buf{};
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v, 16);
  (void)ec;
  return std::string(buf.data(), end);
}

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    if (i >= line.size()) break;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
    out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

}  // namespace

std::string key_name(std::uint16_t scancode) {
  const auto& table = code_to_name();
  if (auto it = table.find(scancode); it != table.end()) return it->second;
  return "key_" + hex(scancode);
}

std::uint16_t scancode_for(std::string_view key) {
  const auto& table = name_to_code();
  if (auto it = table.find(std::string(key)); it != table.end()) return it->second;
  if (key.starts_with("key_") && key.size() > 4) {
    std::uint16_t code = 0;
    auto digits = key.substr(4);
    auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), code, 16);
    if (ec == std::errc() && ptr == digits.data() + digits.size()) return code;
  }
  throw Error("no scancode for key name '" + std::string(key) + "'");
}

bool is_shift(std::string_view key) { return key == "LeftShift" || key == "RightShift"; }

bool is_modifier(std::string_view key) { return is_shift(key) || key == "CapsLock"; }

std::vector<RawEvent> parse_raw_events(std::string_view text) {
  std::vector<RawEvent> events;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;

    auto fields = split_ws(line);
    if (fields.empty()) continue;
    if (fields.size() != 3) {
      throw ParseError(line_no, "expected 3 fields, got " + std::to_string(fields.size()));
    }

    RawEvent ev;
    if (fields[0] == "P") {
      ev.action = Action::Press;
    } else if (fields[0] == "R") {
      ev.action = Action::Release;
    } else {
      throw ParseError(line_no, "unknown action '" + std::string(fields[0]) + "'");
    }

    auto code = fields[1];
    auto [cp, cec] = std::from_chars(code.data(), code.data() + code.size(), ev.scancode, 16);
    if (cec != std::errc() || cp != code.data() + code.size()) {
      throw ParseError(line_no, "bad scancode '" + std::string(code) + "'");
    }

    auto delta = fields[2];
    auto [dp, dec] = std::from_chars(delta.data(), delta.data() + delta.size(), ev.delta_ms);
    if (dec != std::errc() || dp != delta.data() + delta.size()) {
      throw ParseError(line_no, "bad delta '" + std::string(delta) + "'");
    }
    if (ev.delta_ms < 0) throw ParseError(line_no, "negative delta");
    events.push_back(ev);
  }
  return events;
}

std::string format_raw_events(const std::vector<RawEvent>& events) {
  std::ostringstream out;
  for (const auto& ev : events) {
    out << (ev.action == Action::Press ? 'P' : 'R') << ' ' << hex(ev.scancode) << ' '
        << ev.delta_ms << '\n';
  }
  return out.str();
}

KeystrokeSequence pair_events(const std::vector<RawEvent>& events,
                              std::vector<std::string>* warnings) {
  KeystrokeSequence seq;
  std::map<std::uint16_t, std::size_t> open;  // scancode -> keystroke index
  Millis t = 0;
  for (std::size_t i = 0; i < events.size(); ++i) {
    const auto& ev = events[i];
    if (ev.delta_ms < 0) throw Error("event " + std::to_string(i) + ": negative delta");
    t += ev.delta_ms;
    if (ev.action == Action::Press) {
      if (auto it = open.find(ev.scancode); it != open.end()) {
        seq.keystrokes[it->second].release_t = t;
        open.erase(it);
      }
      open.emplace(ev.scancode, seq.keystrokes.size());
      seq.keystrokes.push_back({key_name(ev.scancode), t, t});
    } else {
      auto it = open.find(ev.scancode);
      if (it == open.end()) {
        throw Error("event " + std::to_string(i) + ": release of " + key_name(ev.scancode) +
                    " without a press");
      }
      seq.keystrokes[it->second].release_t = t;
      open.erase(it);
    }
  }
  for (const auto& [code, idx] : open) {
    seq.keystrokes[idx].release_t = t;
    if (warnings) {
      warnings->push_back(key_name(code) + " pressed at " +
                          std::to_string(seq.keystrokes[idx].press_t) +
                          " never released; closed at " + std::to_string(t));
    }
  }
  return seq;
}

std::vector<RawEvent> to_raw_events(const KeystrokeSequence& seq) {
  std::vector<Keystroke> ks = seq.keystrokes;
  std::stable_sort(ks.begin(), ks.end(),
                   [](const Keystroke& a, const Keystroke& b) { return a.press_t < b.press_t; });

  // (time, phase, order, action, index). At equal times releases of keys
  // pressed earlier come first, then presses in sequence order, each
  // zero-length keystroke immediately followed by its own release.
  using Slot = std::tuple<Millis, int, std::size_t, Action, std::size_t>;
  std::vector<Slot> slots;
  for (std::size_t i = 0; i < ks.size(); ++i) {
    slots.emplace_back(ks[i].press_t, 1, 2 * i, Action::Press, i);
    if (ks[i].release_t == ks[i].press_t) {
      slots.emplace_back(ks[i].release_t, 1, 2 * i + 1, Action::Release, i);
    } else {
      slots.emplace_back(ks[i].release_t, 0, i, Action::Release, i);
    }
  }
  std::sort(slots.begin(), slots.end());

  std::vector<RawEvent> events;
  Millis prev = 0;
  for (const auto& [time, phase, order, action, idx] : slots) {
    events.push_back({action, scancode_for(ks[idx].key), events.empty() ? time : time - prev});
    prev = time;
  }
  return events;
}

std::vector<std::string> KeystrokeSequence::key_names() const {
  std::vector<std::string> names;
  names.reserve(keystrokes.size());
  for (const auto& k : keystrokes) names.push_back(k.key);
  return names;
}

std::size_t SubjectDataset::sample_count() const {
  std::size_t n = 0;
  for (const auto& [id, s] : subjects) n += s.templates.size() + s.queries.size();
  return n;
}

std::string to_string(Label label) { return label == Label::Genuine ? "genuine" : "impostor"; }

std::string to_string(Role role) { return role == Role::Template ? "template" : "query"; }

Label parse_label(const std::string& text) {
  if (text == "genuine") return Label::Genuine;
  if (text == "impostor") return Label::Impostor;
  throw Error("unknown label '" + text + "'");
}

Role parse_role(const std::string& text) {
  if (text == "template") return Role::Template;
  if (text == "query") return Role::Query;
  throw Error("unknown role '" + text + "'");
}

}  // namespace kbad
