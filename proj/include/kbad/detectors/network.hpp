#ifndef KBAD_DETECTORS_NETWORK_HPP
#define KBAD_DETECTORS_NETWORK_HPP

#include <Eigen/Core>
#include <cmath>
#include <span>
#include <vector>

#include "kbad/random.hpp"

namespace kbad::nn {

/// Mutable views over every parameter tensor of a model, in a fixed order.
/// Gradients are returned as a model of the same shape, so the same view
/// order lines parameters up with their derivatives.
using TensorViews = std::vector<std::span<double>>;

inline std::span<double> view(Eigen::MatrixXd& m) {
  return {m.data(), static_cast<std::size_t>(m.size())};
}
inline std::span<double> view(Eigen::VectorXd& v) {
  return {v.data(), static_cast<std::size_t>(v.size())};
}

/// Uniform on +/- sqrt(6 / (fan_in + fan_out)).
inline Eigen::MatrixXd glorot_uniform(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
  std::uniform_real_distribution<double> dist(-limit, limit);
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = dist(rng);
  }
  return m;
}

inline double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

inline double softplus(double z) { return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

/// In-place `params -= rate * grads` over matching views.
inline void sgd_step(const TensorViews& params, const TensorViews& grads, double rate) {
  for (std::size_t t = 0; t < params.size(); ++t) {
    for (std::size_t i = 0; i < params[t].size(); ++i) params[t][i] -= rate * grads[t][i];
  }
}

inline bool all_finite(const TensorViews& views) {
  for (const auto& v : views) {
    for (double x : v) {
      if (!std::isfinite(x)) return false;
    }
  }
  return true;
}

/// Adam with bias-corrected moment estimates.
class Adam {
 public:
  explicit Adam(double learning_rate, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8)
      : rate_(learning_rate), beta1_(beta1), beta2_(beta2), eps_(eps) {}

  void step(const TensorViews& params, const TensorViews& grads) {
    if (m_.empty()) {
      for (const auto& p : params) {
        m_.emplace_back(p.size(), 0.0);
        v_.emplace_back(p.size(), 0.0);
      }
    }
    ++t_;
    const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
    for (std::size_t k = 0; k < params.size(); ++k) {
      for (std::size_t i = 0; i < params[k].size(); ++i) {
        const double g = grads[k][i];
        m_[k][i] = beta1_ * m_[k][i] + (1 - beta1_) * g;
        v_[k][i] = beta2_ * v_[k][i] + (1 - beta2_) * g * g;
        params[k][i] -= rate_ * (m_[k][i] / c1) / (std::sqrt(v_[k][i] / c2) + eps_);
      }
    }
  }

 private:
  double rate_, beta1_, beta2_, eps_;
  long t_ = 0;
  std::vector<std::vector<double>> m_, v_;
};

}  // namespace kbad::nn

#endif  // KBAD_DETECTORS_NETWORK_HPP
