#ifndef KBAD_ALIGNMENT_HPP
#define KBAD_ALIGNMENT_HPP

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "kbad/types.hpp"

namespace kbad {

struct AlignOptions {
  /// Treat LeftShift and RightShift as the same key when matching.
  bool merge_shift = false;
  /// Allow one given keystroke to serve several target positions. Off by
  /// default: each given keystroke is consumed at most once.
  bool reuse_given = false;
};

struct MappingEntry {
  enum class Kind { Matched, Substituted };
  Kind kind = Kind::Matched;
  std::size_t given_index = 0;

  bool operator==(const MappingEntry&) const = default;
};

/// Correspondence from target positions to given keystrokes.
struct AlignmentMapping {
  std::size_t target_len = 0;
  std::vector<MappingEntry> mapping;  // one per target position
  std::vector<std::size_t> ignored;   // given indices that were not used
  /// Set when the given sequence ran out of unconsumed keystrokes and the
  /// last given keystroke had to be reused.
  bool exhausted = false;
};

struct Alignment {
  KeystrokeSequence sequence;
  AlignmentMapping mapping;
};

/// Aligns `given` to `target` keystroke by keystroke.
///
/// Target positions are visited left to right. Position i with key k takes
/// the unconsumed given keystroke named k whose index is closest to i (ties
/// toward the smaller index). Positions left without a match are then filled,
/// again left to right: the given keystroke at index i stands in if it is
/// still unconsumed, else the nearest unconsumed index. Given keystrokes not
/// picked by any position are ignored.
/// Timestamps are copied unchanged, so the output may be press-disordered.
Alignment align(const KeystrokeSequence& given, const KeystrokeSequence& target,
                const AlignOptions& options = {});

/// First |target| keystrokes of `given`, padded by repeating its last
/// keystroke when it is shorter.
KeystrokeSequence truncate_align(const KeystrokeSequence& given, const KeystrokeSequence& target);

/// Drops both Shift keys and Caps Lock.
KeystrokeSequence discard_modifiers(const KeystrokeSequence& seq);

/// Index of the shortest template, first one on ties.
std::size_t select_target(std::span<const KeystrokeSequence> templates);

struct AlignedSubject {
  std::size_t target_index = 0;
  std::vector<Alignment> templates;  // same order as the input templates
  std::vector<Alignment> queries;
};

/// Two-step alignment: every template and query is aligned to the shortest
/// template. The target itself is passed through with an identity mapping.
AlignedSubject align_subject(std::span<const KeystrokeSequence> templates,
                             std::span<const KeystrokeSequence> queries,
                             const AlignOptions& options = {});

/// Damerau-Levenshtein distance (insertions, deletions, substitutions and
/// adjacent transpositions, with no restriction on editing a substring more
/// than once).
std::size_t damerau_levenshtein(std::span<const std::string> a, std::span<const std::string> b);

struct AuditRow {
  std::string comparison_type;
  std::size_t count_total = 0;
  std::size_t count_differing = 0;
  double mean_dl = 0.0;
  double sd_dl = 0.0;  // population SD
  std::size_t max_dl = 0;
};

struct AuditReport {
  AuditRow template_template{"template_template"};
  AuditRow query_template{"query_template"};
};

/// Compares key sequences of every template pair and every query-template
/// pair within each subject.
AuditReport audit_dataset(const SubjectDataset& dataset);

/// TSV with a header row and one row per comparison type.
std::string format_audit(const AuditReport& report);

}  // namespace kbad

#endif  // KBAD_ALIGNMENT_HPP
