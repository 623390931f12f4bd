#ifndef KBAD_TYPES_HPP
#define KBAD_TYPES_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace kbad {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed sample text. `line()` is 1-based.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

using Millis = std::int64_t;

enum class Action { Press, Release };

struct RawEvent {
  Action action = Action::Press;
  std::uint16_t scancode = 0;
  Millis delta_ms = 0;

  bool operator==(const RawEvent&) const = default;
};

struct Keystroke {
  std::string key;
  Millis press_t = 0;
  Millis release_t = 0;

  Millis duration() const { return release_t - press_t; }
  bool operator==(const Keystroke&) const = default;
};

/// Ordered keystrokes. Unaligned sequences are sorted by press time; an
/// aligned sequence follows the target's key order and may not be.
struct KeystrokeSequence {
  std::vector<Keystroke> keystrokes;
  bool aligned = false;

  std::size_t size() const { return keystrokes.size(); }
  bool empty() const { return keystrokes.empty(); }
  const Keystroke& operator[](std::size_t i) const { return keystrokes[i]; }
  std::vector<std::string> key_names() const;

  bool operator==(const KeystrokeSequence&) const = default;
};

enum class Role { Template, Query };
enum class Label { Genuine, Impostor };

struct Sample {
  std::string subject_id;
  std::string sample_id;
  Role role = Role::Query;
  std::optional<Label> label;
  KeystrokeSequence sequence;

  bool operator==(const Sample&) const = default;
};

struct SubjectSamples {
  std::vector<Sample> templates;
  std::vector<Sample> queries;

  bool operator==(const SubjectSamples&) const = default;
};

/// Samples grouped by subject id (ordered, so iteration is deterministic).
struct SubjectDataset {
  std::map<std::string, SubjectSamples> subjects;

  std::size_t sample_count() const;
  bool operator==(const SubjectDataset&) const = default;
};

std::string to_string(Label label);
std::string to_string(Role role);
Label parse_label(const std::string& text);
Role parse_role(const std::string& text);

}  // namespace kbad

#endif  // KBAD_TYPES_HPP
