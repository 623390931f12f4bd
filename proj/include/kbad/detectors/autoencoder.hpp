#ifndef KBAD_DETECTORS_AUTOENCODER_HPP
#define KBAD_DETECTORS_AUTOENCODER_HPP

#include <cstdint>
#include <span>
#include <vector>

#include "kbad/detectors/network.hpp"
#include "kbad/features.hpp"

namespace kbad {

struct AutoencoderParams {
  std::vector<int> hidden{5, 4, 3};
  double learning_rate = 0.5;
  int epochs = 5000;
};

/// Stacked tanh autoencoder with tied weights.
///
/// Encoder layer l computes h_{l+1} = tanh(W_l h_l + b_l); the decoder runs
/// the same matrices transposed in reverse, r_l = tanh(W_l^T r_{l+1} + c_l),
/// and r_0 is the reconstruction. `decoder_bias[0]` is the output bias.
struct AutoencoderState {
  std::vector<Eigen::MatrixXd> weights;       // weights[l]: size[l+1] x size[l]
  std::vector<Eigen::VectorXd> hidden_bias;   // size[l+1]
  std::vector<Eigen::VectorXd> decoder_bias;  // size[l]

  std::size_t input_dim() const { return weights.empty() ? 0 : static_cast<std::size_t>(weights.front().cols()); }
  nn::TensorViews tensors();
};

/// Zero biases, Glorot-uniform weights.
AutoencoderState ae_init(std::size_t input_dim, const std::vector<int>& hidden, std::uint64_t seed);

Eigen::VectorXd ae_reconstruct(const AutoencoderState& state, const FeatureVector& x);

/// Sum over the batch of squared reconstruction errors.
double ae_loss(const AutoencoderState& state, std::span<const FeatureVector> batch);

/// Gradient of ae_loss, shaped like the model. Writes the loss to `loss` if given.
AutoencoderState ae_gradient(const AutoencoderState& state, std::span<const FeatureVector> batch,
                             double* loss = nullptr);

/// Full-batch gradient descent on the loss averaged over templates. Throws Error naming the epoch if the loss
/// stops being finite.
AutoencoderState ae_fit(std::span<const FeatureVector> templates, const AutoencoderParams& params,
                        std::uint64_t seed);

/// Negative squared reconstruction error; never positive.
double ae_score(const AutoencoderState& state, const FeatureVector& query);

}  // namespace kbad

#endif  // KBAD_DETECTORS_AUTOENCODER_HPP
