#ifndef KBAD_DETECTORS_OCSVM_HPP
#define KBAD_DETECTORS_OCSVM_HPP

#include <span>
#include <vector>

#include "kbad/features.hpp"

namespace kbad {

/// Relative slack within which a coefficient counts as sitting on a bound.
inline constexpr double kOcsvmBoundTolerance = 1e-12;

struct OcsvmParams {
  double nu = 0.5;     // upper bound on the fraction of training errors
  double gamma = 0.9;  // RBF kernel exp(-gamma * ||x - y||^2)
  int max_iterations = 10000;
  double tolerance = 1e-10;  // projected-gradient norm
};

struct OneClassSvmState {
  std::vector<FeatureVector> points;  // training vectors
  Eigen::VectorXd alpha;              // dual coefficients, sum 1, each in [0, 1/(nu n)]
  double rho = 0.0;
  double gamma = 0.9;
  double nu = 0.5;
  int iterations = 0;

  double box() const { return 1.0 / (nu * static_cast<double>(points.size())); }
  /// Support vectors strictly inside the box.
  bool is_free(std::size_t i) const {
    const double a = alpha(static_cast<Eigen::Index>(i));
    return a > kOcsvmBoundTolerance * box() && a < box() * (1.0 - kOcsvmBoundTolerance);
  }
};

double rbf_kernel(const FeatureVector& a, const FeatureVector& b, double gamma);
Eigen::MatrixXd rbf_gram(std::span<const FeatureVector> points, double gamma);

/// 0.5 * alpha^T K alpha.
double ocsvm_dual_objective(const Eigen::MatrixXd& gram, const Eigen::VectorXd& alpha);

/// Euclidean projection onto {a : sum(a) = 1, 0 <= a_i <= cap}.
Eigen::VectorXd project_capped_simplex(const Eigen::VectorXd& v, double cap);

/// Solves min 0.5 a^T K a s.t. sum(a) = 1, 0 <= a_i <= 1/(nu n) by projected
/// gradient descent, then sets rho from the free support vectors (or the
/// midpoint of the KKT interval when every coefficient sits on a bound).
OneClassSvmState ocsvm_fit(std::span<const FeatureVector> templates, const OcsvmParams& params);

/// sum_i alpha_i K(x_i, query) - rho; positive inside the learned region.
double ocsvm_score(const OneClassSvmState& state, const FeatureVector& query);

/// Largest violation of the dual optimality conditions for the fitted rho.
double ocsvm_kkt_residual(const OneClassSvmState& state);

}  // namespace kbad

#endif  // KBAD_DETECTORS_OCSVM_HPP
