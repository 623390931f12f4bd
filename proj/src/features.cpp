#include "kbad/features.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace kbad {

namespace {

constexpr double kMinBoundWidth = 1.0;  // ms

struct MeanSd {
  double mean = 0.0;
  double sd = 0.0;
};

MeanSd mean_sd(const std::vector<double>& xs) {
  MeanSd r;
  if (xs.empty()) return r;
  for (double x : xs) r.mean += x;
  r.mean /= static_cast<double>(xs.size());
  double ss = 0.0;
  for (double x : xs) ss += (x - r.mean) * (x - r.mean);
  r.sd = std::sqrt(ss / static_cast<double>(xs.size()));
  return r;
}

std::pair<double, double> bounds(const MeanSd& s, double h_f) {
  double lo = s.mean - h_f * s.sd;
  double hi = s.mean + h_f * s.sd;
  if (hi - lo < kMinBoundWidth) {
    lo = s.mean - kMinBoundWidth / 2;
    hi = s.mean + kMinBoundWidth / 2;
  }
  return {lo, hi};
}

}  // namespace

std::vector<double> RawFeatureVector::values() const {
  std::vector<double> v(durations);
  v.insert(v.end(), latencies.begin(), latencies.end());
  return v;
}

RawFeatureVector extract_features(const KeystrokeSequence& seq) {
  if (seq.size() < 2) throw Error("extract_features: need at least 2 keystrokes");
  RawFeatureVector f;
  f.durations.reserve(seq.size());
  f.latencies.reserve(seq.size() - 1);
  for (const auto& k : seq.keystrokes) f.durations.push_back(static_cast<double>(k.duration()));
  for (std::size_t i = 0; i + 1 < seq.size(); ++i) {
    f.latencies.push_back(static_cast<double>(seq[i + 1].press_t - seq[i].press_t));
  }
  return f;
}

FeatureNormalizer fit_feature_normalizer(std::span<const RawFeatureVector> templates, double h_f,
                                         FeatureScaling scaling) {
  if (templates.empty()) throw Error("fit_feature_normalizer: no templates");
  const std::size_t n = templates.front().durations.size();
  for (const auto& t : templates) {
    if (t.durations.size() != n || t.latencies.size() + 1 != n) {
      throw Error("fit_feature_normalizer: template vectors differ in length");
    }
  }

  FeatureNormalizer norm;
  norm.scaling = scaling;
  norm.h_f = h_f;
  norm.keystrokes = n;

  std::vector<double> all_p, all_d;
  for (const auto& t : templates) {
    all_d.insert(all_d.end(), t.durations.begin(), t.durations.end());
    all_p.insert(all_p.end(), t.latencies.begin(), t.latencies.end());
  }
  const auto d = mean_sd(all_d);
  const auto p = mean_sd(all_p);
  norm.mu_d = d.mean;
  norm.sigma_d = d.sd;
  norm.mu_p = p.mean;
  norm.sigma_p = p.sd;

  const std::size_t len = 2 * n - 1;
  norm.lower.resize(len);
  norm.upper.resize(len);
  if (scaling == FeatureScaling::Pooled) {
    const auto [dlo, dhi] = bounds(d, h_f);
    const auto [plo, phi] = bounds(p, h_f);
    for (std::size_t i = 0; i < len; ++i) {
      norm.lower[i] = i < n ? dlo : plo;
      norm.upper[i] = i < n ? dhi : phi;
    }
  } else {
    for (std::size_t i = 0; i < len; ++i) {
      std::vector<double> column;
      for (const auto& t : templates) column.push_back(i < n ? t.durations[i] : t.latencies[i - n]);
      std::tie(norm.lower[i], norm.upper[i]) = bounds(mean_sd(column), h_f);
    }
  }
  return norm;
}

FeatureVector normalize_features(const FeatureNormalizer& norm, const RawFeatureVector& raw) {
  const auto values = raw.values();
  if (values.size() != norm.lower.size() || raw.durations.size() != norm.keystrokes) {
    throw Error("normalize_features: expected " + std::to_string(norm.lower.size()) +
                " features, got " + std::to_string(values.size()));
  }
  FeatureVector out(static_cast<Eigen::Index>(values.size()));
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double scaled = (values[i] - norm.lower[i]) / (norm.upper[i] - norm.lower[i]);
    out(static_cast<Eigen::Index>(i)) = std::clamp(scaled, 0.0, 1.0);
  }
  return out;
}

std::string format_feature_csv(std::span<const std::string> sample_ids,
                               std::span<const FeatureVector> rows, std::size_t keystrokes) {
  std::ostringstream out;
  out << "sample_id";
  for (std::size_t i = 0; i < keystrokes; ++i) out << ",d_" << i;
  for (std::size_t i = 0; i + 1 < keystrokes; ++i) out << ",p_" << i;
  out << '\n';
  out.setf(std::ios::fixed);
  out.precision(6);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    out << (r < sample_ids.size() ? sample_ids[r] : std::to_string(r));
    for (Eigen::Index i = 0; i < rows[r].size(); ++i) out << ',' << rows[r](i);
    out << '\n';
  }
  return out.str();
}

}  // namespace kbad
