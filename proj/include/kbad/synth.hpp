#ifndef KBAD_SYNTH_HPP
#define KBAD_SYNTH_HPP

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "kbad/config.hpp"
#include "kbad/types.hpp"

namespace kbad {

/// Parameters of the synthetic name-typing generator.
///
/// Each subject types "Shift first-name Space Shift last-name". Timings are
/// lognormal per key position; a Shift is held until shortly after the next
/// letter goes down. Each sample independently gets at most one modifier
/// perturbation: Caps Lock in place of a Shift (either site with equal odds),
/// both Shifts left out, or the second Shift pressed before the preceding
/// Space.
/// The rates are the fractions of samples receiving each perturbation.
struct SynthConfig {
  int subjects = 50;
  int min_keys = 12;
  int max_keys = 30;
  int templates = 4;
  int queries = 20;
  int impostors_min = 8;
  int impostors_max = 12;
  int impostor_identities = 3;

  double shift_drop = 0.0;
  double shift_transpose = 0.0;
  double capslock = 0.0;

  /// Impostor log-timing means: mu + blend * (mu_other - mu) + shift, where
  /// mu_other is an independent profile. blend 0 and shift 0 reproduce the
  /// subject's own distribution.
  double impostor_blend = 0.6;
  double impostor_shift = 0.0;

  double latency_sd = 0.25;   // within-subject log SD of latencies
  double duration_sd = 0.2;   // within-subject log SD of durations
  double position_sd = 0.3;   // spread of per-position log means
  double tempo_sd = 0.08;     // per-sample log tempo factor SD
  double modifier_sd_scale = 0.5;  // within-subject noise of Shift timings relative to letters
  double pause_rate = 0.0;    // per-latency probability of a long pause
  double pause_scale = 4.0;   // pause multiplies the latency by 1 + this
  int clock_quantum_ms = 0;   // 0 leaves times at 1 ms
  std::uint64_t seed = 1;

  static SynthConfig from(const KeyValueConfig& kv);
  KeyValueConfig snapshot() const;
  /// Throws Error describing the first invalid field.
  void validate() const;
};

enum class Perturbation { None, CapsLock, Drop, Transpose };

std::string to_string(Perturbation p);

struct PerturbationRecord {
  std::string subject_id;
  std::string sample_id;
  Perturbation site0 = Perturbation::None;
  Perturbation site1 = Perturbation::None;

  bool operator==(const PerturbationRecord&) const = default;
};

struct SynthDataset {
  SubjectDataset dataset;  // every sample labeled
  std::vector<PerturbationRecord> perturbations;
  /// Key sequence each subject's samples are perturbed from.
  std::map<std::string, std::vector<std::string>> canonical;
};

SynthDataset generate_synthetic(const SynthConfig& config);

/// Dataset layout with hidden query labels, plus ground_truth.tsv (label
/// file), perturbations.tsv and synth.conf.
void write_synthetic(const SynthDataset& data, const SynthConfig& config, const std::filesystem::path& root);

std::string format_perturbations(const std::vector<PerturbationRecord>& records);

}  // namespace kbad

#endif  // KBAD_SYNTH_HPP
