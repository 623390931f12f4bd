#ifndef KBAD_FEATURES_HPP
#define KBAD_FEATURES_HPP

#include <Eigen/Core>
#include <span>
#include <string>
#include <vector>

#include "kbad/types.hpp"

namespace kbad {

/// Normalized features in [0,1]. Layout: n durations, then n-1 latencies.
using FeatureVector = Eigen::VectorXd;

/// Hold durations (one per keystroke) and press-press latencies (one per
/// adjacent pair, negative after a transposition), in milliseconds.
struct RawFeatureVector {
  std::vector<double> durations;
  std::vector<double> latencies;

  std::size_t size() const { return durations.size() + latencies.size(); }
  /// Durations followed by latencies.
  std::vector<double> values() const;
};

RawFeatureVector extract_features(const KeystrokeSequence& seq);

enum class FeatureScaling {
  Pooled,       // one pair of bounds per feature type (latency, duration)
  PerPosition,  // separate bounds for every feature position
};

/// Template-fitted normalization bounds mean +/- h_f * SD.
///
/// Pooled scaling fills a single lower/upper pair per feature type and
/// broadcasts it; per-position scaling keeps one pair per index. Either way
/// `lower`/`upper` have the full feature length.
struct FeatureNormalizer {
  FeatureScaling scaling = FeatureScaling::Pooled;
  double h_f = 1.0;
  double mu_p = 0.0, sigma_p = 0.0;  // pooled latency stats (ms)
  double mu_d = 0.0, sigma_d = 0.0;  // pooled duration stats (ms)
  std::size_t keystrokes = 0;
  std::vector<double> lower;
  std::vector<double> upper;
};

/// Fits bounds on aligned template features (population SD). When a bound
/// interval is narrower than 1 ms it is widened to 1 ms around the mean.
FeatureNormalizer fit_feature_normalizer(std::span<const RawFeatureVector> templates,
                                         double h_f = 1.0,
                                         FeatureScaling scaling = FeatureScaling::Pooled);

/// Maps each raw value into [0,1] with the fitted bounds, clamping outside.
FeatureVector normalize_features(const FeatureNormalizer& norm, const RawFeatureVector& raw);

/// CSV header "d_0,...,d_{n-1},p_0,...,p_{n-2}" followed by one row per vector.
std::string format_feature_csv(std::span<const std::string> sample_ids,
                               std::span<const FeatureVector> rows, std::size_t keystrokes);

}  // namespace kbad

#endif  // KBAD_FEATURES_HPP
