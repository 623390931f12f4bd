#ifndef KBAD_SCORE_NORM_HPP
#define KBAD_SCORE_NORM_HPP

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "kbad/types.hpp"

namespace kbad {

struct ScoreRecord {
  std::string subject_id;
  std::string sample_id;
  double raw_score = 0.0;
  std::optional<double> normalized_score;
  std::optional<Label> label;
  /// Failure to capture: the sample could not be scored. Failed records are
  /// always rejected and take no part in normalization statistics.
  bool failed = false;

  /// Score used for decisions: normalized if present, else raw; -inf if failed.
  double decision_score() const;
};

struct ScoreSet {
  std::vector<ScoreRecord> records;

  /// Sorts by (subject_id, sample_id) and throws Error on duplicate keys.
  void sort_and_check();
  std::size_t failure_count() const;
};

enum class ScoreNormKind { None, MinMax, SD };

struct ScoreNormMethod {
  ScoreNormKind kind = ScoreNormKind::SD;
  double h_s = 2.0;

  static ScoreNormMethod none() { return {ScoreNormKind::None, 0.0}; }
  static ScoreNormMethod minmax() { return {ScoreNormKind::MinMax, 0.0}; }
  static ScoreNormMethod sd(double h_s = 2.0) { return {ScoreNormKind::SD, h_s}; }
};

std::string to_string(ScoreNormKind kind);
ScoreNormKind parse_score_norm(const std::string& text);

/// Bounds mean -/+ h_s * SD (population), then the clamped linear map onto
/// [0,1]. Zero SD maps everything to 0.5. Needs at least 2 scores.
std::vector<double> normalize_sd(std::span<const double> scores, double h_s = 2.0);

/// Min maps to 0, max to 1; all-equal scores map to 0.5.
std::vector<double> normalize_minmax(std::span<const double> scores);

/// Normalizes each subject's non-failed scores independently; None copies
/// raw scores through. Failed records get no normalized score.
ScoreSet apply_normalization(const ScoreSet& scores, const ScoreNormMethod& method);

}  // namespace kbad

#endif  // KBAD_SCORE_NORM_HPP
