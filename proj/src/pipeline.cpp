#include "kbad/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <sstream>
#include <thread>

#include "kbad/random.hpp"
#include "kbad/roc.hpp"

namespace kbad {

std::string to_string(AlignmentMethod method) {
  switch (method) {
    case AlignmentMethod::Align: return "align";
    case AlignmentMethod::Truncate: return "truncate";
    case AlignmentMethod::Discard: return "discard";
  }
  return "?";
}

AlignmentMethod parse_alignment_method(const std::string& text) {
  if (text == "align") return AlignmentMethod::Align;
  if (text == "truncate") return AlignmentMethod::Truncate;
  if (text == "discard") return AlignmentMethod::Discard;
  throw Error("unknown alignment method '" + text + "' (expected align, truncate or discard)");
}

PipelineConfig PipelineConfig::from(const KeyValueConfig& kv) {
  PipelineConfig c;
  c.alignment = parse_alignment_method(kv.get_string("alignment", to_string(c.alignment)));
  c.align_options.merge_shift = kv.get_bool("merge_shift", c.align_options.merge_shift);
  c.align_options.reuse_given = kv.get_bool("reuse_given", c.align_options.reuse_given);
  c.h_f = kv.get_double("h_f", c.h_f);
  const std::string scaling = kv.get_string("feature_norm", "pooled");
  if (scaling == "pooled") {
    c.feature_scaling = FeatureScaling::Pooled;
  } else if (scaling == "per_position") {
    c.feature_scaling = FeatureScaling::PerPosition;
  } else {
    throw Error("unknown feature_norm '" + scaling + "' (expected pooled or per_position)");
  }
  c.score_norm.kind = parse_score_norm(kv.get_string("score_norm", to_string(c.score_norm.kind)));
  c.score_norm.h_s = kv.get_double("h_s", 2.0);
  const std::string mode = kv.get_string("ensemble_mode", "raw");
  if (mode == "raw") {
    c.ensemble_mode = EnsembleMode::Raw;
  } else if (mode == "normalized") {
    c.ensemble_mode = EnsembleMode::Normalized;
  } else {
    throw Error("unknown ensemble_mode '" + mode + "' (expected raw or normalized)");
  }
  const long long seed = kv.get_int("seed", 0);
  if (seed < 0) throw Error("seed must be non-negative");
  c.seed = static_cast<std::uint64_t>(seed);
  c.detector = detector_config_from(kv);
  if (c.h_f <= 0) throw Error("h_f must be positive");
  if (c.score_norm.kind == ScoreNormKind::SD && c.score_norm.h_s <= 0) throw Error("h_s must be positive");
  kv.require_all_used("pipeline config");
  return c;
}

KeyValueConfig PipelineConfig::snapshot() const {
  KeyValueConfig kv;
  kv.set("alignment", to_string(alignment));
  kv.set("merge_shift", align_options.merge_shift ? "true" : "false");
  kv.set("reuse_given", align_options.reuse_given ? "true" : "false");
  kv.set("h_f", format_double(h_f));
  kv.set("feature_norm", feature_scaling == FeatureScaling::Pooled ? "pooled" : "per_position");
  kv.set("score_norm", to_string(score_norm.kind));
  kv.set("h_s", format_double(score_norm.kind == ScoreNormKind::SD ? score_norm.h_s : 2.0));
  kv.set("ensemble_mode", ensemble_mode == EnsembleMode::Raw ? "raw" : "normalized");
  kv.set("seed", std::to_string(seed));
  write_detector_config(detector, kv);
  return kv;
}

unsigned default_thread_count() {
  if (const char* env = std::getenv("KBAD_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

namespace {

struct SubjectOutput {
  std::vector<ScoreRecord> records;
  std::vector<std::vector<double>> member_scores;  // parallel to records
  std::vector<std::string> warnings;
};

KeystrokeSequence place(const KeystrokeSequence& given, const KeystrokeSequence& target,
                        const PipelineConfig& config, const std::string& who,
                        std::vector<std::string>& warnings) {
  if (config.alignment == AlignmentMethod::Truncate) return truncate_align(given, target);
  Alignment a = align(given, target, config.align_options);
  if (a.mapping.exhausted) warnings.push_back(who + ": alignment reused the last keystroke");
  return std::move(a.sequence);
}

ScoreRecord failed_record(const std::string& subject, const Sample& q) {
  ScoreRecord r;
  r.subject_id = subject;
  r.sample_id = q.sample_id;
  r.label = q.label;
  r.failed = true;
  r.raw_score = -std::numeric_limits<double>::infinity();
  return r;
}

SubjectOutput process_subject(const std::string& subject, const SubjectSamples& samples,
                              const PipelineConfig& config) {
  SubjectOutput out;
  auto prepare = [&](const Sample& s) {
    return config.alignment == AlignmentMethod::Discard ? discard_modifiers(s.sequence) : s.sequence;
  };

  std::unique_ptr<const Model> model;
  FeatureNormalizer normalizer;
  KeystrokeSequence target;
  try {
    if (samples.templates.size() < 2) throw Error("fewer than 2 templates");
    std::vector<KeystrokeSequence> templates;
    for (const auto& t : samples.templates) templates.push_back(prepare(t));
    target = templates[select_target(templates)];
    std::vector<RawFeatureVector> raw;
    for (std::size_t i = 0; i < templates.size(); ++i) {
      raw.push_back(extract_features(
          place(templates[i], target, config, subject + "/" + samples.templates[i].sample_id, out.warnings)));
    }
    normalizer = fit_feature_normalizer(raw, config.h_f, config.feature_scaling);
    std::vector<FeatureVector> vectors;
    for (const auto& r : raw) vectors.push_back(normalize_features(normalizer, r));
    model = fit_detector(config.detector, vectors, derive_seed(config.seed, subject));
  } catch (const Error& e) {
    out.warnings.push_back(subject + ": subject failed: " + e.what());
    for (const auto& q : samples.queries) {
      out.records.push_back(failed_record(subject, q));
      out.member_scores.emplace_back();
    }
    return out;
  }

  for (const auto& q : samples.queries) {
    try {
      const auto seq = place(prepare(q), target, config, subject + "/" + q.sample_id, out.warnings);
      const FeatureVector v = normalize_features(normalizer, extract_features(seq));
      ScoreRecord r;
      r.subject_id = subject;
      r.sample_id = q.sample_id;
      r.label = q.label;
      auto members = model->member_scores(v);
      r.raw_score = model->score(v);
      if (!std::isfinite(r.raw_score)) throw Error("non-finite score");
      out.records.push_back(std::move(r));
      out.member_scores.push_back(std::move(members));
    } catch (const Error& e) {
      out.warnings.push_back(subject + "/" + q.sample_id + ": " + e.what());
      out.records.push_back(failed_record(subject, q));
      out.member_scores.emplace_back();
    }
  }
  return out;
}

template <typename Fn>
void parallel_for(std::size_t n, unsigned threads, Fn fn) {
  if (threads == 0) threads = default_thread_count();
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(n, 1)));
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace

PipelineResult run_pipeline(const SubjectDataset& dataset, const PipelineConfig& config, unsigned threads) {
  std::vector<const std::pair<const std::string, SubjectSamples>*> subjects;
  for (const auto& entry : dataset.subjects) subjects.push_back(&entry);
  std::vector<SubjectOutput> outputs(subjects.size());
  parallel_for(subjects.size(), threads, [&](std::size_t i) {
    outputs[i] = process_subject(subjects[i]->first, subjects[i]->second, config);
  });

  PipelineResult result;
  std::vector<std::vector<double>> member_scores;
  for (auto& o : outputs) {
    for (std::size_t k = 0; k < o.records.size(); ++k) {
      result.scores.records.push_back(std::move(o.records[k]));
      member_scores.push_back(std::move(o.member_scores[k]));
    }
    for (auto& w : o.warnings) result.warnings.push_back(std::move(w));
  }

  const bool per_member = config.detector.name == "ensemble" && config.ensemble_mode == EnsembleMode::Normalized;
  if (!per_member) {
    result.scores = apply_normalization(result.scores, config.score_norm);
  } else {
    const std::size_t m = config.detector.members.size();
    std::vector<double> sums(result.scores.records.size(), 0.0);
    for (std::size_t j = 0; j < m; ++j) {
      ScoreSet member = result.scores;
      for (std::size_t k = 0; k < member.records.size(); ++k) {
        if (!member.records[k].failed) member.records[k].raw_score = member_scores[k][j];
      }
      member = apply_normalization(member, config.score_norm);
      for (std::size_t k = 0; k < member.records.size(); ++k) {
        if (member.records[k].normalized_score) sums[k] += *member.records[k].normalized_score;
      }
    }
    for (std::size_t k = 0; k < sums.size(); ++k) {
      auto& r = result.scores.records[k];
      r.normalized_score.reset();
      if (!r.failed) r.normalized_score = sums[k] / static_cast<double>(m);
    }
  }
  result.scores.sort_and_check();
  result.ftc = result.scores.failure_count();
  return result;
}

Metrics compute_metrics(const ScoreSet& scores) {
  Metrics m;
  m.global_eer = global_eer(scores);
  const auto s = subject_eer(scores);
  m.subject_eer_mean = s.mean;
  m.subject_eer_sd = s.sd;
  m.records = scores.records.size();
  m.ftc = scores.failure_count();
  return m;
}

std::string format_metrics(const Metrics& m) {
  std::ostringstream out;
  out.setf(std::ios::fixed);
  out.precision(6);
  out << "metric\tvalue\n";
  out << "global_eer\t" << m.global_eer << '\n';
  out << "subject_eer_mean\t" << m.subject_eer_mean << '\n';
  out << "subject_eer_sd\t" << m.subject_eer_sd << '\n';
  out << "records\t" << m.records << '\n';
  out << "ftc\t" << m.ftc << '\n';
  return out.str();
}

ValidationResult monte_carlo_validate(const SubjectDataset& dev, const PipelineConfig& config,
                                      int repetitions, std::uint64_t seed, int templates,
                                      unsigned threads) {
  if (repetitions < 1) throw Error("monte_carlo_validate: repetitions must be positive");
  if (templates < 2) throw Error("monte_carlo_validate: need at least 2 templates");
  const auto k = static_cast<std::size_t>(templates);

  struct Pools {
    std::vector<const Sample*> genuine, impostor;
  };
  std::map<std::string, Pools> pools;
  for (const auto& [id, s] : dev.subjects) {
    Pools p;
    for (const auto& t : s.templates) p.genuine.push_back(&t);
    for (const auto& q : s.queries) {
      if (!q.label) continue;
      (*q.label == Label::Genuine ? p.genuine : p.impostor).push_back(&q);
    }
    if (p.genuine.size() < k + 1) {
      throw Error("subject " + id + " has " + std::to_string(p.genuine.size()) + " genuine samples; need at least " +
                  std::to_string(k + 1));
    }
    pools.emplace(id, std::move(p));
  }

  ValidationResult result;
  for (int rep = 0; rep < repetitions; ++rep) {
    const auto rep_seed = derive_seed(seed, static_cast<std::uint64_t>(rep));
    SubjectDataset split;
    for (const auto& [id, p] : pools) {
      Rng rng(derive_seed(rep_seed, id));
      std::vector<const Sample*> order = p.genuine;
      std::shuffle(order.begin(), order.end(), rng);
      SubjectSamples s;
      for (std::size_t i = 0; i < order.size(); ++i) {
        Sample copy = *order[i];
        copy.label = Label::Genuine;
        copy.role = i < k ? Role::Template : Role::Query;
        (i < k ? s.templates : s.queries).push_back(std::move(copy));
      }
      for (const auto* q : p.impostor) s.queries.push_back(*q);
      split.subjects.emplace(id, std::move(s));
    }
    PipelineConfig c = config;
    c.seed = derive_seed(config.seed, static_cast<std::uint64_t>(rep));
    result.eers.push_back(global_eer(run_pipeline(split, c, threads).scores));
  }
  double sum = 0.0;
  for (double e : result.eers) sum += e;
  result.mean = sum / static_cast<double>(result.eers.size());
  double ss = 0.0;
  for (double e : result.eers) ss += (e - result.mean) * (e - result.mean);
  result.sd = std::sqrt(ss / static_cast<double>(result.eers.size()));
  return result;
}

}  // namespace kbad
