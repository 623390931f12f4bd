#include "kbad/detectors/contractive.hpp"

#include <cmath>

namespace kbad {

namespace {

Eigen::MatrixXd sigmoid(const Eigen::MatrixXd& z) { return z.unaryExpr([](double v) { return nn::sigmoid(v); }); }

Eigen::MatrixXd stack(std::span<const FeatureVector> batch, Eigen::Index dim) {
  Eigen::MatrixXd x(dim, static_cast<Eigen::Index>(batch.size()));
  for (std::size_t i = 0; i < batch.size(); ++i) {
    if (batch[i].size() != dim) throw Error("contractive autoencoder: input dimension mismatch");
    x.col(static_cast<Eigen::Index>(i)) = batch[i];
  }
  return x;
}

}  // namespace

nn::TensorViews ContractiveState::tensors() {
  return {nn::view(weights), nn::view(hidden_bias), nn::view(output_bias)};
}

ContractiveState cae_init(std::size_t input_dim, int hidden, double lambda, std::uint64_t seed) {
  if (input_dim == 0 || hidden <= 0) throw Error("cae_init: dimensions must be positive");
  Rng rng(seed);
  ContractiveState s;
  s.weights = nn::glorot_uniform(hidden, static_cast<Eigen::Index>(input_dim), rng);
  s.hidden_bias = Eigen::VectorXd::Zero(hidden);
  s.output_bias = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(input_dim));
  s.lambda = lambda;
  return s;
}

Eigen::VectorXd cae_hidden(const ContractiveState& state, const FeatureVector& x) {
  if (x.size() != state.weights.cols()) throw Error("cae_hidden: input dimension mismatch");
  return sigmoid(state.weights * x + state.hidden_bias);
}

double cae_penalty(const ContractiveState& state, const FeatureVector& x) {
  const Eigen::ArrayXd h = cae_hidden(state, x).array();
  const Eigen::ArrayXd slope = h * (1.0 - h);
  const Eigen::ArrayXd row_norms = state.weights.rowwise().squaredNorm().array();
  return (slope.square() * row_norms).sum();
}

double cae_objective(const ContractiveState& state, std::span<const FeatureVector> batch) {
  double total = 0.0;
  for (const auto& x : batch) total -= cae_score(state, x);
  for (const auto& x : batch) total += state.lambda * cae_penalty(state, x);
  return total;
}

ContractiveState cae_gradient(const ContractiveState& state, std::span<const FeatureVector> batch,
                              double* objective) {
  const auto x = stack(batch, state.weights.cols());
  Eigen::MatrixXd zh = state.weights * x;
  zh.colwise() += state.hidden_bias;
  const Eigen::MatrixXd h = sigmoid(zh);
  Eigen::MatrixXd zy = state.weights.transpose() * h;
  zy.colwise() += state.output_bias;
  const Eigen::MatrixXd y = sigmoid(zy);

  const Eigen::MatrixXd residual = y - x;
  const Eigen::ArrayXXd slope = h.array() * (1.0 - h.array());  // s = h(1-h)
  const Eigen::VectorXd row_norms = state.weights.rowwise().squaredNorm();

  ContractiveState g;
  g.lambda = state.lambda;

  // Reconstruction term.
  const Eigen::MatrixXd dy = (2.0 * residual.array() * y.array() * (1.0 - y.array())).matrix();
  g.output_bias = dy.rowwise().sum();
  g.weights = h * dy.transpose();
  Eigen::MatrixXd dh_pre = ((state.weights * dy).array() * slope).matrix();

  // Penalty term: P = sum_i s_i^2 w_i with w_i = ||W_i.||^2 and ds/dz = s(1-2h).
  // dP/dW_ij = 2 s_i^2 W_ij + 2 w_i s_i^2 (1-2h_i) x_j.
  const Eigen::ArrayXXd s2 = slope.square();
  const Eigen::MatrixXd dpen_pre =
      (2.0 * s2 * (1.0 - 2.0 * h.array())).matrix().array().colwise() * row_norms.array();
  const Eigen::VectorXd s2_sum = s2.rowwise().sum().matrix();
  g.weights += state.lambda * (2.0 * s2_sum).asDiagonal() * state.weights;
  dh_pre += state.lambda * dpen_pre;

  g.hidden_bias = dh_pre.rowwise().sum();
  g.weights += dh_pre * x.transpose();

  if (objective) {
    *objective = residual.squaredNorm() + state.lambda * (s2.matrix().transpose() * row_norms).sum();
  }
  return g;
}

ContractiveState cae_fit(std::span<const FeatureVector> templates, const ContractiveParams& params,
                         std::uint64_t seed) {
  if (templates.empty()) throw Error("cae_fit: no templates");
  auto state = cae_init(static_cast<std::size_t>(templates.front().size()), params.hidden,
                        params.lambda, seed);
  auto views = state.tensors();
  const double rate = params.learning_rate / static_cast<double>(templates.size());
  for (int epoch = 0; epoch < params.epochs; ++epoch) {
    double objective = 0.0;
    auto grad = cae_gradient(state, templates, &objective);
    if (!std::isfinite(objective)) {
      throw Error("cae_fit: non-finite loss at epoch " + std::to_string(epoch));
    }
    nn::sgd_step(views, grad.tensors(), rate);
  }
  return state;
}

double cae_score(const ContractiveState& state, const FeatureVector& query) {
  const Eigen::VectorXd h = cae_hidden(state, query);
  Eigen::VectorXd y = state.weights.transpose() * h + state.output_bias;
  y = sigmoid(y);
  return -(query - y).squaredNorm();
}

}  // namespace kbad
