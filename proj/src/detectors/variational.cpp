#include "kbad/detectors/variational.hpp"

#include <algorithm>
#include <numeric>

namespace kbad {

namespace {

Eigen::MatrixXd softplus(const Eigen::MatrixXd& z) { return z.unaryExpr([](double v) { return nn::softplus(v); }); }
Eigen::MatrixXd sigmoid(const Eigen::MatrixXd& z) { return z.unaryExpr([](double v) { return nn::sigmoid(v); }); }

Eigen::MatrixXd affine(const Eigen::MatrixXd& w, const Eigen::VectorXd& b, const Eigen::MatrixXd& x) {
  Eigen::MatrixXd z = w * x;
  z.colwise() += b;
  return z;
}

struct Forward {
  std::vector<Eigen::MatrixXd> enc_pre, enc_act;  // enc_act[0] = x
  Eigen::MatrixXd mean, logvar, z;
  std::vector<Eigen::MatrixXd> dec_pre, dec_act;  // dec_act[0] = z
  Eigen::MatrixXd logits;
};

Forward forward(const VariationalState& s, const Eigen::MatrixXd& x, const Eigen::MatrixXd* noise) {
  Forward f;
  f.enc_act.push_back(x);
  for (std::size_t l = 0; l < s.encoder_weights.size(); ++l) {
    f.enc_pre.push_back(affine(s.encoder_weights[l], s.encoder_bias[l], f.enc_act.back()));
    f.enc_act.push_back(softplus(f.enc_pre.back()));
  }
  f.mean = affine(s.mean_weights, s.mean_bias, f.enc_act.back());
  f.logvar = affine(s.logvar_weights, s.logvar_bias, f.enc_act.back());
  f.z = f.mean;
  if (noise) f.z += ((0.5 * f.logvar.array()).exp() * noise->array()).matrix();

  f.dec_act.push_back(f.z);
  const std::size_t hidden = s.decoder_weights.size() - 1;
  for (std::size_t k = 0; k < hidden; ++k) {
    f.dec_pre.push_back(affine(s.decoder_weights[k], s.decoder_bias[k], f.dec_act.back()));
    f.dec_act.push_back(softplus(f.dec_pre.back()));
  }
  f.logits = affine(s.decoder_weights.back(), s.decoder_bias.back(), f.dec_act.back());
  return f;
}

// -log p(x | logits) summed over features and batch, for Bernoulli outputs.
double bernoulli_nll(const Eigen::MatrixXd& x, const Eigen::MatrixXd& logits) {
  return (softplus(logits).array() - x.array() * logits.array()).sum();
}

Eigen::MatrixXd stack(std::span<const FeatureVector> batch, Eigen::Index dim) {
  Eigen::MatrixXd x(dim, static_cast<Eigen::Index>(batch.size()));
  for (std::size_t i = 0; i < batch.size(); ++i) {
    if (batch[i].size() != dim) throw Error("variational autoencoder: input dimension mismatch");
    x.col(static_cast<Eigen::Index>(i)) = batch[i];
  }
  return x;
}

}  // namespace

nn::TensorViews VariationalState::tensors() {
  nn::TensorViews v;
  for (auto& w : encoder_weights) v.push_back(nn::view(w));
  for (auto& b : encoder_bias) v.push_back(nn::view(b));
  v.push_back(nn::view(mean_weights));
  v.push_back(nn::view(mean_bias));
  v.push_back(nn::view(logvar_weights));
  v.push_back(nn::view(logvar_bias));
  for (auto& w : decoder_weights) v.push_back(nn::view(w));
  for (auto& b : decoder_bias) v.push_back(nn::view(b));
  return v;
}

VariationalState vae_init(std::size_t input_dim, const VariationalParams& params, std::uint64_t seed) {
  if (input_dim == 0 || params.latent <= 0) throw Error("vae_init: dimensions must be positive");
  for (int h : params.hidden) {
    if (h <= 0) throw Error("vae_init: hidden layer sizes must be positive");
  }
  Rng rng(seed);
  VariationalState s;
  Eigen::Index prev = static_cast<Eigen::Index>(input_dim);
  for (int h : params.hidden) {
    s.encoder_weights.push_back(nn::glorot_uniform(h, prev, rng));
    s.encoder_bias.push_back(Eigen::VectorXd::Zero(h));
    prev = h;
  }
  s.mean_weights = nn::glorot_uniform(params.latent, prev, rng);
  s.mean_bias = Eigen::VectorXd::Zero(params.latent);
  s.logvar_weights = nn::glorot_uniform(params.latent, prev, rng);
  s.logvar_bias = Eigen::VectorXd::Zero(params.latent);

  prev = params.latent;
  for (auto it = params.hidden.rbegin(); it != params.hidden.rend(); ++it) {
    s.decoder_weights.push_back(nn::glorot_uniform(*it, prev, rng));
    s.decoder_bias.push_back(Eigen::VectorXd::Zero(*it));
    prev = *it;
  }
  s.decoder_weights.push_back(nn::glorot_uniform(static_cast<Eigen::Index>(input_dim), prev, rng));
  s.decoder_bias.push_back(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(input_dim)));
  return s;
}

double gaussian_kl(const Eigen::VectorXd& mean, const Eigen::VectorXd& logvar) {
  return -0.5 * (1.0 + logvar.array() - mean.array().square() - logvar.array().exp()).sum();
}

VaeLoss vae_loss(const VariationalState& state, std::span<const FeatureVector> batch,
                 const Eigen::MatrixXd& noise) {
  const auto x = stack(batch, state.input_dim());
  const auto f = forward(state, x, &noise);
  const double n = static_cast<double>(batch.size());
  VaeLoss loss;
  loss.reconstruction = bernoulli_nll(x, f.logits) / n;
  loss.latent = -0.5 * (1.0 + f.logvar.array() - f.mean.array().square() - f.logvar.array().exp()).sum() / n;
  return loss;
}

VariationalState vae_gradient(const VariationalState& state, std::span<const FeatureVector> batch,
                              const Eigen::MatrixXd& noise, VaeLoss* loss) {
  const auto x = stack(batch, state.input_dim());
  const auto f = forward(state, x, &noise);
  const double inv_n = 1.0 / static_cast<double>(batch.size());
  if (loss) {
    loss->reconstruction = bernoulli_nll(x, f.logits) * inv_n;
    loss->latent =
        -0.5 * (1.0 + f.logvar.array() - f.mean.array().square() - f.logvar.array().exp()).sum() * inv_n;
  }

  VariationalState g;
  g.encoder_weights.resize(state.encoder_weights.size());
  g.encoder_bias.resize(state.encoder_bias.size());
  g.decoder_weights.resize(state.decoder_weights.size());
  g.decoder_bias.resize(state.decoder_bias.size());

  // Decoder.
  Eigen::MatrixXd delta = (sigmoid(f.logits) - x) * inv_n;
  const std::size_t out = state.decoder_weights.size() - 1;
  g.decoder_weights[out] = delta * f.dec_act[out].transpose();
  g.decoder_bias[out] = delta.rowwise().sum();
  Eigen::MatrixXd up = state.decoder_weights[out].transpose() * delta;
  for (std::size_t k = out; k-- > 0;) {
    delta = up.cwiseProduct(sigmoid(f.dec_pre[k]));
    g.decoder_weights[k] = delta * f.dec_act[k].transpose();
    g.decoder_bias[k] = delta.rowwise().sum();
    up = state.decoder_weights[k].transpose() * delta;
  }

  // Reparameterization and KL.
  const Eigen::ArrayXXd stddev = (0.5 * f.logvar.array()).exp();
  const Eigen::MatrixXd d_mean = up + f.mean * inv_n;
  const Eigen::MatrixXd d_logvar =
      (up.array() * noise.array() * 0.5 * stddev + 0.5 * (f.logvar.array().exp() - 1.0) * inv_n).matrix();
  const Eigen::MatrixXd& top = f.enc_act.back();
  g.mean_weights = d_mean * top.transpose();
  g.mean_bias = d_mean.rowwise().sum();
  g.logvar_weights = d_logvar * top.transpose();
  g.logvar_bias = d_logvar.rowwise().sum();
  up = state.mean_weights.transpose() * d_mean + state.logvar_weights.transpose() * d_logvar;

  // Encoder.
  for (std::size_t l = state.encoder_weights.size(); l-- > 0;) {
    delta = up.cwiseProduct(sigmoid(f.enc_pre[l]));
    g.encoder_weights[l] = delta * f.enc_act[l].transpose();
    g.encoder_bias[l] = delta.rowwise().sum();
    up = state.encoder_weights[l].transpose() * delta;
  }
  return g;
}

VariationalState vae_fit(std::span<const FeatureVector> templates, const VariationalParams& params,
                         std::uint64_t seed) {
  if (templates.empty()) throw Error("vae_fit: no templates");
  if (params.batch_size <= 0) throw Error("vae_fit: batch size must be positive");
  auto state = vae_init(static_cast<std::size_t>(templates.front().size()), params, seed);
  Rng rng(derive_seed(seed, "vae-train"));
  std::normal_distribution<double> normal(0.0, 1.0);
  nn::Adam adam(params.learning_rate);
  auto views = state.tensors();

  std::vector<std::size_t> order(templates.size());
  std::iota(order.begin(), order.end(), 0);
  for (int epoch = 0; epoch < params.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(params.batch_size)) {
      const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(params.batch_size));
      std::vector<FeatureVector> batch;
      for (std::size_t i = start; i < end; ++i) batch.push_back(templates[order[i]]);
      Eigen::MatrixXd noise(state.latent_dim(), static_cast<Eigen::Index>(batch.size()));
      for (Eigen::Index j = 0; j < noise.cols(); ++j) {
        for (Eigen::Index i = 0; i < noise.rows(); ++i) noise(i, j) = normal(rng);
      }
      VaeLoss loss;
      auto grad = vae_gradient(state, batch, noise, &loss);
      if (!std::isfinite(loss.total())) {
        throw Error("vae_fit: non-finite loss at epoch " + std::to_string(epoch));
      }
      adam.step(views, grad.tensors());
    }
  }
  return state;
}

double vae_score(const VariationalState& state, const FeatureVector& query) {
  const FeatureVector batch[] = {query};
  const auto x = stack(batch, state.input_dim());
  const auto f = forward(state, x, nullptr);
  return -bernoulli_nll(x, f.logits);
}

}  // namespace kbad
