#ifndef KBAD_ROC_HPP
#define KBAD_ROC_HPP

#include <span>
#include <string>
#include <vector>

#include "kbad/score_norm.hpp"

namespace kbad {

struct OperatingPoint {
  double threshold = 0.0;
  double far = 0.0;  // impostors accepted / impostors
  double frr = 0.0;  // genuines rejected / genuines

  bool operator==(const OperatingPoint&) const = default;
};

/// Operating points by descending threshold. The first point uses +inf
/// (nothing accepted), then one point per distinct score, so the last point
/// accepts everything. A sample is accepted when score >= threshold.
struct RocCurve {
  std::vector<OperatingPoint> points;
};

/// Throws Error unless both classes are present.
RocCurve roc(std::span<const double> scores, std::span<const Label> labels);

/// FAR = FRR crossing, linearly interpolated between the two operating points
/// where FAR - FRR changes sign (or the exact point if one exists).
double equal_error_rate(const RocCurve& curve);

/// One pooled ROC over all labeled records' decision scores.
double global_eer(const ScoreSet& scores);

struct SubjectEerSummary {
  double mean = 0.0;
  double sd = 0.0;  // population SD
  std::vector<std::pair<std::string, double>> per_subject;
  /// Subjects skipped because their labeled queries lacked one class.
  std::vector<std::string> skipped;
};

/// Per-subject ROC and EER over labeled records.
SubjectEerSummary subject_eer(const ScoreSet& scores);

/// "threshold,far,frr" rows.
std::string format_roc_csv(const RocCurve& curve);

/// Histogram of decision scores per class over `bins` equal-width bins
/// spanning the finite score range: "bin_low,bin_high,genuine,impostor".
std::string format_score_histogram(const ScoreSet& scores, int bins = 20);

}  // namespace kbad

#endif  // KBAD_ROC_HPP
