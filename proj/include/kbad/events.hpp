#ifndef KBAD_EVENTS_HPP
#define KBAD_EVENTS_HPP

#include <string>
#include <string_view>
#include <vector>

#include "kbad/types.hpp"

namespace kbad {

/// Revision of the built-in scancode table. Bump whenever a mapping changes.
inline constexpr int kScancodeTableVersion = 1;

/// Key name for a set-2 scancode. Unknown codes map to "key_<hex>".
std::string key_name(std::uint16_t scancode);

/// Inverse of key_name; accepts the "key_<hex>" fallback form. Throws Error
/// for names that are neither in the table nor in fallback form.
std::uint16_t scancode_for(std::string_view key);

bool is_shift(std::string_view key);
bool is_modifier(std::string_view key);

/// Parses the canonical sample format: one "P|R <hex scancode> <delta>" per
/// line. Blank lines are skipped; line numbers in errors count them.
std::vector<RawEvent> parse_raw_events(std::string_view text);

/// Renders events in the canonical sample format.
std::string format_raw_events(const std::vector<RawEvent>& events);

/// Converts a press/release stream into keystrokes ordered by press time.
///
/// Times are the cumulative sum of the deltas. A press of a key that is
/// already down closes the open keystroke at the new press time (auto-repeat).
/// Keys still down at the end are closed at the final event time and reported
/// through `warnings`. A release with no open press throws Error.
KeystrokeSequence pair_events(const std::vector<RawEvent>& events,
                              std::vector<std::string>* warnings = nullptr);

/// Inverse of pair_events for sequences it can produce.
std::vector<RawEvent> to_raw_events(const KeystrokeSequence& seq);

}  // namespace kbad

#endif  // KBAD_EVENTS_HPP
