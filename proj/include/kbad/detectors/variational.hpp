#ifndef KBAD_DETECTORS_VARIATIONAL_HPP
#define KBAD_DETECTORS_VARIATIONAL_HPP

#include <cstdint>
#include <span>
#include <vector>

#include "kbad/detectors/network.hpp"
#include "kbad/features.hpp"

namespace kbad {

struct VariationalParams {
  std::vector<int> hidden{5, 5};
  int latent = 3;
  double learning_rate = 0.001;
  int batch_size = 2;
  int epochs = 700;
};

/// Gaussian-latent autoencoder with softplus hidden layers and a Bernoulli
/// decoder over the [0,1] features.
///
/// Encoder: hidden layers, then linear heads for the latent mean and
/// log-variance. Decoder: hidden layers in reverse order, then a linear
/// layer producing per-feature logits.
struct VariationalState {
  std::vector<Eigen::MatrixXd> encoder_weights;
  std::vector<Eigen::VectorXd> encoder_bias;
  Eigen::MatrixXd mean_weights;
  Eigen::VectorXd mean_bias;
  Eigen::MatrixXd logvar_weights;
  Eigen::VectorXd logvar_bias;
  std::vector<Eigen::MatrixXd> decoder_weights;  // last one emits logits
  std::vector<Eigen::VectorXd> decoder_bias;

  Eigen::Index input_dim() const { return encoder_weights.front().cols(); }
  Eigen::Index latent_dim() const { return mean_weights.rows(); }
  nn::TensorViews tensors();
};

VariationalState vae_init(std::size_t input_dim, const VariationalParams& params, std::uint64_t seed);

struct VaeLoss {
  double reconstruction = 0.0;  // Bernoulli negative log-likelihood
  double latent = 0.0;          // KL(q(z|x) || N(0, I))
  double total() const { return reconstruction + latent; }
};

/// Mean over the batch of reconstruction + KL, with the reparameterized latent
/// z = mu + exp(logvar / 2) * noise. `noise` is latent_dim x batch_size.
VaeLoss vae_loss(const VariationalState& state, std::span<const FeatureVector> batch,
                 const Eigen::MatrixXd& noise);

/// Gradient of vae_loss(...).total() for fixed noise.
VariationalState vae_gradient(const VariationalState& state, std::span<const FeatureVector> batch,
                              const Eigen::MatrixXd& noise, VaeLoss* loss = nullptr);

/// KL(N(mean, exp(logvar)) || N(0, I)).
double gaussian_kl(const Eigen::VectorXd& mean, const Eigen::VectorXd& logvar);

/// Adam on shuffled mini-batches, one noise draw per example per step.
VariationalState vae_fit(std::span<const FeatureVector> templates, const VariationalParams& params,
                         std::uint64_t seed);

/// Negative reconstruction loss decoding the latent mean (no sampling).
double vae_score(const VariationalState& state, const FeatureVector& query);

}  // namespace kbad

#endif  // KBAD_DETECTORS_VARIATIONAL_HPP
