#include "kbad/resolution.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace kbad {

namespace {

// Topographic prominence of the peak spanning [lo, hi] (a plateau when lo < hi).
double prominence(const std::vector<double>& f, std::size_t lo, std::size_t hi) {
  const double h = f[lo];
  double left_min = h;
  for (std::size_t i = lo; i-- > 0;) {
    if (f[i] > h) break;
    left_min = std::min(left_min, f[i]);
  }
  double right_min = h;
  for (std::size_t i = hi + 1; i < f.size(); ++i) {
    if (f[i] > h) break;
    right_min = std::min(right_min, f[i]);
  }
  return h - std::max(left_min, right_min);
}

}  // namespace

ResolutionEstimate estimate_resolution(std::span<const double> latencies, const ResolutionOptions& o) {
  if (!(o.bandwidth > 0)) throw Error("estimate_resolution: bandwidth must be positive");
  if (!(o.grid_step > 0) || !(o.grid_max > o.grid_min)) throw Error("estimate_resolution: bad grid");
  if (latencies.empty()) throw Error("resolution indeterminate: no latencies");

  ResolutionEstimate est;
  const auto points = static_cast<std::size_t>(std::floor((o.grid_max - o.grid_min) / o.grid_step + 1e-9)) + 1;
  const double norm = 1.0 / (static_cast<double>(latencies.size()) * o.bandwidth * std::sqrt(2.0 * std::numbers::pi));
  const double reach = 10.0 * o.bandwidth;
  std::vector<double> sorted(latencies.begin(), latencies.end());
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t g = 0; g < points; ++g) {
    const double x = o.grid_min + static_cast<double>(g) * o.grid_step;
    double sum = 0.0;
    for (auto it = std::lower_bound(sorted.begin(), sorted.end(), x - reach);
         it != sorted.end() && *it <= x + reach; ++it) {
      const double z = (x - *it) / o.bandwidth;
      sum += std::exp(-0.5 * z * z);
    }
    est.grid.push_back(x);
    est.density.push_back(sum * norm);
  }

  const auto& f = est.density;
  const double top = *std::max_element(f.begin(), f.end());
  if (!(top > 0)) throw Error("resolution indeterminate: no latencies inside the grid");
  std::size_t i = 0;
  while (i < f.size()) {
    std::size_t j = i;
    while (j + 1 < f.size() && f[j + 1] == f[i]) ++j;
    const bool left_lower = i == 0 || f[i - 1] < f[i];
    const bool right_lower = j + 1 == f.size() || f[j + 1] < f[i];
    if (left_lower && right_lower && f[i] > 0 && prominence(f, i, j) >= o.prominence * top) {
      est.modes.push_back((est.grid[i] + est.grid[j]) / 2.0);
    }
    i = j + 1;
  }
  if (est.modes.size() < 2) {
    throw Error("resolution indeterminate: " + std::to_string(est.modes.size()) + " mode(s) found");
  }
  // A tooth of the comb that falls under the floor leaves a gap of about k
  // spacings; it counts as k intervals rather than one.
  std::vector<double> gaps;
  for (std::size_t k = 1; k < est.modes.size(); ++k) gaps.push_back(est.modes[k] - est.modes[k - 1]);
  std::vector<double> sorted_gaps = gaps;
  std::nth_element(sorted_gaps.begin(), sorted_gaps.begin() + sorted_gaps.size() / 2, sorted_gaps.end());
  const double typical = sorted_gaps[sorted_gaps.size() / 2];
  double intervals = 0.0;
  for (double g : gaps) intervals += std::max(1.0, std::round(g / typical));
  est.quantum = (est.modes.back() - est.modes.front()) / intervals;
  return est;
}

std::vector<double> dataset_latencies(const SubjectDataset& dataset) {
  std::vector<double> out;
  for (const auto& [id, s] : dataset.subjects) {
    for (const auto* group : {&s.templates, &s.queries}) {
      for (const auto& sample : *group) {
        const auto& k = sample.sequence.keystrokes;
        for (std::size_t i = 1; i < k.size(); ++i) out.push_back(static_cast<double>(k[i].press_t - k[i - 1].press_t));
      }
    }
  }
  return out;
}

}  // namespace kbad
