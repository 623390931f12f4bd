#include "kbad/detectors/ocsvm.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>

namespace kbad {

double rbf_kernel(const FeatureVector& a, const FeatureVector& b, double gamma) {
  return std::exp(-gamma * (a - b).squaredNorm());
}

Eigen::MatrixXd rbf_gram(std::span<const FeatureVector> points, double gamma) {
  const auto n = static_cast<Eigen::Index>(points.size());
  Eigen::MatrixXd k(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    k(i, i) = 1.0;
    for (Eigen::Index j = 0; j < i; ++j) {
      k(i, j) = k(j, i) = rbf_kernel(points[static_cast<std::size_t>(i)],
                                     points[static_cast<std::size_t>(j)], gamma);
    }
  }
  return k;
}

double ocsvm_dual_objective(const Eigen::MatrixXd& gram, const Eigen::VectorXd& alpha) {
  return 0.5 * alpha.dot(gram * alpha);
}

Eigen::VectorXd project_capped_simplex(const Eigen::VectorXd& v, double cap) {
  const auto n = v.size();
  if (n == 0 || cap * static_cast<double>(n) < 1.0) {
    throw Error("project_capped_simplex: feasible set is empty");
  }
  // sum_i clip(v_i - tau, 0, cap) is piecewise linear and non-increasing in
  // tau with kinks at v_i and v_i - cap; locate the segment that hits 1.
  auto mass = [&](double tau) { return (v.array() - tau).cwiseMax(0.0).cwiseMin(cap).sum(); };
  std::vector<double> kinks;
  kinks.reserve(static_cast<std::size_t>(2 * n));
  for (Eigen::Index i = 0; i < n; ++i) {
    kinks.push_back(v(i));
    kinks.push_back(v(i) - cap);
  }
  std::sort(kinks.begin(), kinks.end());
  double tau = kinks.front();
  for (std::size_t k = 0; k + 1 < kinks.size(); ++k) {
    const double lo = kinks[k], hi = kinks[k + 1];
    const double mlo = mass(lo), mhi = mass(hi);
    if (mlo >= 1.0 && mhi <= 1.0) {
      tau = mlo == mhi ? lo : lo + (mlo - 1.0) * (hi - lo) / (mlo - mhi);
      break;
    }
  }
  Eigen::VectorXd a = (v.array() - tau).cwiseMax(0.0).cwiseMin(cap).matrix();

  // Absorb rounding error into a coordinate that can take it.
  const double residual = 1.0 - a.sum();
  if (residual != 0.0) {
    for (Eigen::Index i = 0; i < n; ++i) {
      const double moved = a(i) + residual;
      if (moved >= 0.0 && moved <= cap) {
        a(i) = moved;
        break;
      }
    }
  }
  return a;
}

namespace {

bool at_lower(double a, double cap) { return a <= kOcsvmBoundTolerance * cap; }
bool at_upper(double a, double cap) { return a >= cap * (1.0 - kOcsvmBoundTolerance); }

double fit_rho(const Eigen::VectorXd& alpha, const Eigen::VectorXd& grad, double cap) {
  double free_sum = 0.0;
  int free_count = 0;
  double lower = -std::numeric_limits<double>::infinity();  // max G_i over alpha_i = cap
  double upper = std::numeric_limits<double>::infinity();   // min G_i over alpha_i = 0
  for (Eigen::Index i = 0; i < alpha.size(); ++i) {
    if (!at_lower(alpha(i), cap) && !at_upper(alpha(i), cap)) {
      free_sum += grad(i);
      ++free_count;
    } else if (at_lower(alpha(i), cap)) {
      upper = std::min(upper, grad(i));
    } else {
      lower = std::max(lower, grad(i));
    }
  }
  if (free_count > 0) return free_sum / free_count;
  if (!std::isfinite(lower)) return upper;
  if (!std::isfinite(upper)) return lower;
  return 0.5 * (lower + upper);
}

}  // namespace

OneClassSvmState ocsvm_fit(std::span<const FeatureVector> templates, const OcsvmParams& params) {
  if (templates.empty()) throw Error("ocsvm_fit: no templates");
  if (!(params.nu > 0.0 && params.nu <= 1.0)) throw Error("ocsvm_fit: nu must lie in (0, 1]");
  const auto dim = templates.front().size();
  for (const auto& t : templates) {
    if (t.size() != dim) throw Error("ocsvm_fit: template dimension mismatch");
  }

  OneClassSvmState state;
  state.points.assign(templates.begin(), templates.end());
  state.gamma = params.gamma;
  state.nu = params.nu;
  const double cap = state.box();
  const auto n = static_cast<Eigen::Index>(templates.size());
  const Eigen::MatrixXd gram = rbf_gram(templates, params.gamma);

  // Constant step 1/L with L the largest eigenvalue of the Gram matrix.
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram, Eigen::EigenvaluesOnly);
  const double lipschitz = std::max(eig.eigenvalues().maxCoeff(), 1e-12);
  const double step = 1.0 / lipschitz;

  Eigen::VectorXd alpha = project_capped_simplex(Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n)), cap);
  int it = 0;
  for (; it < params.max_iterations; ++it) {
    const Eigen::VectorXd grad = gram * alpha;
    const Eigen::VectorXd pg = alpha - project_capped_simplex(alpha - grad, cap);
    if (pg.norm() < params.tolerance) break;
    alpha = project_capped_simplex(alpha - step * grad, cap);
  }
  state.iterations = it;
  state.alpha = alpha;
  state.rho = fit_rho(alpha, gram * alpha, cap);
  return state;
}

double ocsvm_score(const OneClassSvmState& state, const FeatureVector& query) {
  if (state.points.empty()) throw Error("ocsvm_score: model is not fitted");
  if (query.size() != state.points.front().size()) throw Error("ocsvm_score: dimension mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < state.points.size(); ++i) {
    const double a = state.alpha(static_cast<Eigen::Index>(i));
    if (a != 0.0) s += a * rbf_kernel(state.points[i], query, state.gamma);
  }
  return s - state.rho;
}

double ocsvm_kkt_residual(const OneClassSvmState& state) {
  const Eigen::VectorXd grad = rbf_gram(state.points, state.gamma) * state.alpha;
  const double cap = state.box();
  double worst = 0.0;
  for (Eigen::Index i = 0; i < state.alpha.size(); ++i) {
    const double a = state.alpha(i);
    const double gap = grad(i) - state.rho;
    double v;
    if (!at_lower(a, cap) && !at_upper(a, cap)) {
      v = std::abs(gap);
    } else if (at_lower(a, cap)) {
      v = std::max(0.0, -gap);
    } else {
      v = std::max(0.0, gap);
    }
    worst = std::max(worst, v);
  }
  return worst;
}

}  // namespace kbad
