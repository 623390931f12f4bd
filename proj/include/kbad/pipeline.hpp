#ifndef KBAD_PIPELINE_HPP
#define KBAD_PIPELINE_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "kbad/alignment.hpp"
#include "kbad/config.hpp"
#include "kbad/detectors/detector.hpp"
#include "kbad/features.hpp"
#include "kbad/score_norm.hpp"

namespace kbad {

enum class AlignmentMethod { Align, Truncate, Discard };

std::string to_string(AlignmentMethod method);
AlignmentMethod parse_alignment_method(const std::string& text);

enum class EnsembleMode {
  Raw,         // average raw member scores, then normalize the average
  Normalized,  // normalize each member's scores per subject, then average
};

struct PipelineConfig {
  AlignmentMethod alignment = AlignmentMethod::Align;
  AlignOptions align_options;
  double h_f = 1.0;
  FeatureScaling feature_scaling = FeatureScaling::Pooled;
  DetectorConfig detector;
  ScoreNormMethod score_norm = ScoreNormMethod::sd(2.0);
  EnsembleMode ensemble_mode = EnsembleMode::Raw;
  std::uint64_t seed = 0;

  /// Reads every pipeline and detector key; unknown keys are an error.
  static PipelineConfig from(const KeyValueConfig& kv);
  /// Every field, explicitly, so the snapshot alone reproduces a run.
  KeyValueConfig snapshot() const;
};

struct PipelineResult {
  ScoreSet scores;
  std::vector<std::string> warnings;
  std::size_t ftc = 0;  // records that could not be scored
};

/// Default worker count: KBAD_THREADS if set to a positive integer, else the
/// hardware concurrency.
unsigned default_thread_count();

/// Aligns, extracts and normalizes features, fits the detector on each
/// subject's templates and scores its queries, then normalizes scores per
/// subject. Samples that cannot be processed become failed records; the
/// output has exactly one record per query, sorted by (subject, sample).
PipelineResult run_pipeline(const SubjectDataset& dataset, const PipelineConfig& config,
                            unsigned threads = 0);

struct Metrics {
  double global_eer = 0.0;
  double subject_eer_mean = 0.0;
  double subject_eer_sd = 0.0;
  std::size_t records = 0;
  std::size_t ftc = 0;
};

/// Needs labels on both classes; subjects without both classes are left out
/// of the subject EER.
Metrics compute_metrics(const ScoreSet& scores);
std::string format_metrics(const Metrics& metrics);

struct ValidationResult {
  std::vector<double> eers;  // global EER per repetition
  double mean = 0.0;
  double sd = 0.0;  // population SD
};

/// Per repetition and subject, draws `templates` genuine samples (templates
/// and genuine-labeled queries pooled) as templates and uses the remaining
/// labeled samples as queries, then runs the pipeline and takes the global
/// EER. Throws Error when a subject has fewer than templates + 1 genuine
/// samples.
ValidationResult monte_carlo_validate(const SubjectDataset& dev, const PipelineConfig& config,
                                      int repetitions, std::uint64_t seed, int templates = 4,
                                      unsigned threads = 0);

}  // namespace kbad

#endif  // KBAD_PIPELINE_HPP
