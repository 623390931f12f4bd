#ifndef KBAD_DETECTORS_CONTRACTIVE_HPP
#define KBAD_DETECTORS_CONTRACTIVE_HPP

#include <cstdint>
#include <span>

#include "kbad/detectors/network.hpp"
#include "kbad/features.hpp"

namespace kbad {

struct ContractiveParams {
  int hidden = 400;
  double lambda = 1.5;
  double learning_rate = 0.01;
  int epochs = 1000;
};

/// One sigmoid hidden layer with tied weights: h = sigmoid(W x + b_h),
/// y = sigmoid(W^T h + b_y).
struct ContractiveState {
  Eigen::MatrixXd weights;  // d_h x d_x
  Eigen::VectorXd hidden_bias;
  Eigen::VectorXd output_bias;
  double lambda = 0.0;

  nn::TensorViews tensors();
};

ContractiveState cae_init(std::size_t input_dim, int hidden, double lambda, std::uint64_t seed);

Eigen::VectorXd cae_hidden(const ContractiveState& state, const FeatureVector& x);

/// Squared Frobenius norm of dh/dx in closed form:
/// sum_i [h_i (1 - h_i)]^2 * sum_j W_ij^2.
double cae_penalty(const ContractiveState& state, const FeatureVector& x);

/// Sum over the batch of reconstruction error plus lambda * penalty.
double cae_objective(const ContractiveState& state, std::span<const FeatureVector> batch);

ContractiveState cae_gradient(const ContractiveState& state, std::span<const FeatureVector> batch,
                              double* objective = nullptr);

ContractiveState cae_fit(std::span<const FeatureVector> templates, const ContractiveParams& params,
                         std::uint64_t seed);

/// Negative squared reconstruction error (the penalty is a training term only).
double cae_score(const ContractiveState& state, const FeatureVector& query);

}  // namespace kbad

#endif  // KBAD_DETECTORS_CONTRACTIVE_HPP
