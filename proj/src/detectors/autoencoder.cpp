#include "kbad/detectors/autoencoder.hpp"

#include <cmath>

namespace kbad {

namespace {

Eigen::MatrixXd stack(std::span<const FeatureVector> batch, Eigen::Index dim) {
  Eigen::MatrixXd x(dim, static_cast<Eigen::Index>(batch.size()));
  for (std::size_t i = 0; i < batch.size(); ++i) {
    if (batch[i].size() != dim) throw Error("autoencoder: input dimension mismatch");
    x.col(static_cast<Eigen::Index>(i)) = batch[i];
  }
  return x;
}

struct Activations {
  std::vector<Eigen::MatrixXd> encoder;  // encoder[0] = x, encoder[l+1] = h_{l+1}
  std::vector<Eigen::MatrixXd> decoder;  // decoder[l] = r_l, decoder[L] = h_L
};

Activations forward(const AutoencoderState& s, const Eigen::MatrixXd& x) {
  const std::size_t layers = s.weights.size();
  Activations a;
  a.encoder.push_back(x);
  for (std::size_t l = 0; l < layers; ++l) {
    Eigen::MatrixXd z = s.weights[l] * a.encoder.back();
    z.colwise() += s.hidden_bias[l];
    a.encoder.push_back(z.array().tanh().matrix());
  }
  a.decoder.resize(layers + 1);
  a.decoder[layers] = a.encoder.back();
  for (std::size_t l = layers; l-- > 0;) {
    Eigen::MatrixXd u = s.weights[l].transpose() * a.decoder[l + 1];
    u.colwise() += s.decoder_bias[l];
    a.decoder[l] = u.array().tanh().matrix();
  }
  return a;
}

}  // namespace

nn::TensorViews AutoencoderState::tensors() {
  nn::TensorViews v;
  for (auto& w : weights) v.push_back(nn::view(w));
  for (auto& b : hidden_bias) v.push_back(nn::view(b));
  for (auto& c : decoder_bias) v.push_back(nn::view(c));
  return v;
}

AutoencoderState ae_init(std::size_t input_dim, const std::vector<int>& hidden, std::uint64_t seed) {
  if (input_dim == 0) throw Error("ae_init: zero input dimension");
  if (hidden.empty()) throw Error("ae_init: at least one hidden layer required");
  Rng rng(seed);
  AutoencoderState s;
  Eigen::Index prev = static_cast<Eigen::Index>(input_dim);
  for (int h : hidden) {
    if (h <= 0) throw Error("ae_init: hidden layer sizes must be positive");
    s.weights.push_back(nn::glorot_uniform(h, prev, rng));
    s.hidden_bias.push_back(Eigen::VectorXd::Zero(h));
    s.decoder_bias.push_back(Eigen::VectorXd::Zero(prev));
    prev = h;
  }
  return s;
}

Eigen::VectorXd ae_reconstruct(const AutoencoderState& state, const FeatureVector& x) {
  const FeatureVector batch[] = {x};
  return forward(state, stack(batch, static_cast<Eigen::Index>(state.input_dim()))).decoder[0].col(0);
}

double ae_loss(const AutoencoderState& state, std::span<const FeatureVector> batch) {
  const auto x = stack(batch, static_cast<Eigen::Index>(state.input_dim()));
  return (forward(state, x).decoder[0] - x).squaredNorm();
}

AutoencoderState ae_gradient(const AutoencoderState& state, std::span<const FeatureVector> batch,
                             double* loss) {
  const auto x = stack(batch, static_cast<Eigen::Index>(state.input_dim()));
  const auto a = forward(state, x);
  const std::size_t layers = state.weights.size();

  AutoencoderState g;
  for (std::size_t l = 0; l < layers; ++l) {
    g.weights.push_back(Eigen::MatrixXd::Zero(state.weights[l].rows(), state.weights[l].cols()));
    g.hidden_bias.push_back(Eigen::VectorXd::Zero(state.hidden_bias[l].size()));
    g.decoder_bias.push_back(Eigen::VectorXd::Zero(state.decoder_bias[l].size()));
  }

  const Eigen::MatrixXd residual = a.decoder[0] - x;
  if (loss) *loss = residual.squaredNorm();

  // Decoder, from the reconstruction back up to the code layer.
  Eigen::MatrixXd delta =
      (2.0 * residual).cwiseProduct((1.0 - a.decoder[0].array().square()).matrix());
  for (std::size_t l = 0; l < layers; ++l) {
    g.decoder_bias[l] = delta.rowwise().sum();
    g.weights[l] += a.decoder[l + 1] * delta.transpose();
    Eigen::MatrixXd up = state.weights[l] * delta;
    if (l + 1 < layers) {
      delta = up.cwiseProduct((1.0 - a.decoder[l + 1].array().square()).matrix());
    } else {
      delta = up;  // gradient w.r.t. the code h_L
    }
  }

  // Encoder, from the code back down to the input.
  for (std::size_t l = layers; l-- > 0;) {
    const Eigen::MatrixXd dz =
        delta.cwiseProduct((1.0 - a.encoder[l + 1].array().square()).matrix());
    g.hidden_bias[l] = dz.rowwise().sum();
    g.weights[l] += dz * a.encoder[l].transpose();
    delta = state.weights[l].transpose() * dz;
  }
  return g;
}

AutoencoderState ae_fit(std::span<const FeatureVector> templates, const AutoencoderParams& params,
                        std::uint64_t seed) {
  if (templates.empty()) throw Error("ae_fit: no templates");
  auto state = ae_init(static_cast<std::size_t>(templates.front().size()), params.hidden, seed);
  auto views = state.tensors();
  // Steps follow the mean loss per template so the rate does not scale with
  // the number of templates.
  const double rate = params.learning_rate / static_cast<double>(templates.size());
  for (int epoch = 0; epoch < params.epochs; ++epoch) {
    double loss = 0.0;
    auto grad = ae_gradient(state, templates, &loss);
    if (!std::isfinite(loss)) throw Error("ae_fit: non-finite loss at epoch " + std::to_string(epoch));
    nn::sgd_step(views, grad.tensors(), rate);
  }
  return state;
}

double ae_score(const AutoencoderState& state, const FeatureVector& query) {
  const FeatureVector batch[] = {query};
  return -ae_loss(state, batch);
}

}  // namespace kbad
