#ifndef KBAD_DETECTORS_DETECTOR_HPP
#define KBAD_DETECTORS_DETECTOR_HPP

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "kbad/config.hpp"
#include "kbad/detectors/autoencoder.hpp"
#include "kbad/detectors/contractive.hpp"
#include "kbad/detectors/manhattan.hpp"
#include "kbad/detectors/ocsvm.hpp"
#include "kbad/detectors/variational.hpp"

namespace kbad {

/// Detector choice plus the hyperparameters of every detector kind. Only the
/// block matching `name` is used; `members` is used by "ensemble".
///
/// Names: manhattan, scaled_manhattan, autoencoder, cae, vae, ocsvm, ensemble.
struct DetectorConfig {
  std::string name = "manhattan";
  AutoencoderParams autoencoder;
  ContractiveParams contractive;
  VariationalParams variational;
  OcsvmParams ocsvm;
  std::vector<DetectorConfig> members;
};

bool is_known_detector(const std::string& name);

/// Parses "name" or "name{key=value,...}" with keys as in the config file
/// block for that detector, e.g. "cae{hidden=200,lambda=0.5}".
DetectorConfig parse_detector_spec(const std::string& spec);

/// Inverse of parse_detector_spec, listing only the parameters that matter
/// for the named detector.
std::string format_detector_spec(const DetectorConfig& config);

/// Reads `detector`, the per-detector `<name>.<param>` keys and
/// `ensemble.members` (comma-separated specs).
DetectorConfig detector_config_from(const KeyValueConfig& kv);
void write_detector_config(const DetectorConfig& config, KeyValueConfig& kv);

/// A fitted one-class model. Higher scores mean more likely genuine.
class Model {
 public:
  virtual ~Model() = default;
  virtual double score(const FeatureVector& query) const = 0;
  /// Per-member raw scores; a single element for non-ensemble models.
  virtual std::vector<double> member_scores(const FeatureVector& query) const { return {score(query)}; }
};

/// Fits the configured detector on normalized template vectors. Training is
/// deterministic given `seed`; ensemble member i uses derive_seed(seed, i).
std::unique_ptr<const Model> fit_detector(const DetectorConfig& config,
                                          std::span<const FeatureVector> templates,
                                          std::uint64_t seed);

}  // namespace kbad

#endif  // KBAD_DETECTORS_DETECTOR_HPP
