#ifndef KBAD_DETECTORS_MANHATTAN_HPP
#define KBAD_DETECTORS_MANHATTAN_HPP

#include <span>

#include "kbad/features.hpp"

namespace kbad {

struct ManhattanState {
  Eigen::VectorXd mean;
  /// Per-feature mean absolute deviation; empty for the unscaled detector.
  Eigen::VectorXd scale;
};

/// Smallest per-feature scale used by the scaled variant.
inline constexpr double kMinManhattanScale = 0.01;

ManhattanState manhattan_fit(std::span<const FeatureVector> templates, bool scaled = false);

/// Negative (optionally scaled) L1 distance to the template mean.
double manhattan_score(const ManhattanState& state, const FeatureVector& query);

/// Arithmetic mean of member scores.
double ensemble_score(std::span<const double> member_scores);

}  // namespace kbad

#endif  // KBAD_DETECTORS_MANHATTAN_HPP
