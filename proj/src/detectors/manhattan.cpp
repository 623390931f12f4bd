#include "kbad/detectors/manhattan.hpp"

#include <algorithm>

namespace kbad {

ManhattanState manhattan_fit(std::span<const FeatureVector> templates, bool scaled) {
  if (templates.empty()) throw Error("manhattan_fit: no templates");
  const auto dim = templates.front().size();
  ManhattanState state;
  state.mean = Eigen::VectorXd::Zero(dim);
  for (const auto& t : templates) {
    if (t.size() != dim) throw Error("manhattan_fit: template dimension mismatch");
    state.mean += t;
  }
  state.mean /= static_cast<double>(templates.size());
  if (scaled) {
    state.scale = Eigen::VectorXd::Zero(dim);
    for (const auto& t : templates) state.scale += (t - state.mean).cwiseAbs();
    state.scale /= static_cast<double>(templates.size());
    state.scale = state.scale.cwiseMax(kMinManhattanScale);
  }
  return state;
}

double manhattan_score(const ManhattanState& state, const FeatureVector& query) {
  if (query.size() != state.mean.size()) {
    throw Error("manhattan_score: expected dimension " + std::to_string(state.mean.size()) +
                ", got " + std::to_string(query.size()));
  }
  const Eigen::VectorXd diff = (query - state.mean).cwiseAbs();
  if (state.scale.size() == 0) return -diff.sum();
  return -diff.cwiseQuotient(state.scale).sum();
}

double ensemble_score(std::span<const double> member_scores) {
  if (member_scores.empty()) throw Error("ensemble_score: no member scores");
  double sum = 0.0;
  for (double s : member_scores) sum += s;
  return sum / static_cast<double>(member_scores.size());
}

}  // namespace kbad
