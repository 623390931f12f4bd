#include "kbad/cli.hpp"

#include <CLI11.hpp>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>

#include "kbad/alignment.hpp"
#include "kbad/dataset_io.hpp"
#include "kbad/pipeline.hpp"
#include "kbad/resolution.hpp"
#include "kbad/roc.hpp"
#include "kbad/synth.hpp"

namespace kbad {

namespace fs = std::filesystem;

namespace {

struct Options {
  std::string config;
  std::string data;
  std::string out;
  std::string labels;
  std::string scores;
  std::string method;
  std::string score_norm;
  std::string detector;
  std::optional<std::uint64_t> seed;
  int repetitions = 10;
  double bandwidth = 3.0;
  int bins = 20;
  unsigned threads = 0;
  int verbose = 0;
};

std::string fixed6(double v) {
  std::ostringstream s;
  s.setf(std::ios::fixed);
  s.precision(6);
  s << v;
  return s.str();
}

void report_warnings(const std::vector<std::string>& warnings, const Options& o, std::ostream& err) {
  if (warnings.empty()) return;
  if (o.verbose > 0) {
    for (const auto& w : warnings) err << "warning: " << w << '\n';
  } else {
    err << warnings.size() << " warning(s); rerun with -v to list them\n";
  }
}

PipelineConfig pipeline_config(const Options& o) {
  const KeyValueConfig kv = o.config.empty() ? KeyValueConfig{} : KeyValueConfig::load(o.config);
  PipelineConfig c = PipelineConfig::from(kv);
  if (!o.method.empty()) c.alignment = parse_alignment_method(o.method);
  if (!o.score_norm.empty()) c.score_norm.kind = parse_score_norm(o.score_norm);
  if (!o.detector.empty()) {
    if (o.detector == "ensemble") {
      if (c.detector.members.size() < 2) throw Error("--detector ensemble needs ensemble.members in the config");
      c.detector.name = "ensemble";
    } else {
      c.detector = parse_detector_spec(o.detector);
    }
  }
  if (o.seed) c.seed = *o.seed;
  return c;
}

SubjectDataset labeled_dataset(const Options& o, std::vector<std::string>& warnings) {
  SubjectDataset data = load_dataset(o.data, &warnings);
  if (!o.labels.empty()) apply_labels(data, read_labels(o.labels));
  return data;
}

bool has_both_classes(const ScoreSet& s) {
  bool g = false, i = false;
  for (const auto& r : s.records) {
    if (r.label) (*r.label == Label::Genuine ? g : i) = true;
  }
  return g && i;
}

void write_snapshot(const fs::path& out, KeyValueConfig kv) { write_text_file(out / "config.conf", kv.format()); }

KeyValueConfig invocation(const std::string& command, const Options& o) {
  KeyValueConfig kv;
  kv.set("command", command);
  if (!o.data.empty()) kv.set("data", o.data);
  if (!o.labels.empty()) kv.set("labels", o.labels);
  if (!o.scores.empty()) kv.set("scores", o.scores);
  return kv;
}

int cmd_synth(const Options& o, std::ostream& out) {
  const KeyValueConfig kv = o.config.empty() ? KeyValueConfig{} : KeyValueConfig::load(o.config);
  SynthConfig c = SynthConfig::from(kv);
  if (o.seed) c.seed = *o.seed;
  const auto data = generate_synthetic(c);
  write_synthetic(data, c, o.out);
  out << "wrote " << data.dataset.subjects.size() << " subjects, " << data.dataset.sample_count() << " samples to "
      << o.out << '\n';
  return 0;
}

int cmd_audit(const Options& o, std::ostream& out, std::ostream& err) {
  std::vector<std::string> warnings;
  const auto data = load_dataset(o.data, &warnings);
  report_warnings(warnings, o, err);
  const std::string report = format_audit(audit_dataset(data));
  out << report;
  if (!o.out.empty()) {
    write_text_file(fs::path(o.out) / "audit.tsv", report);
    write_snapshot(o.out, invocation("audit", o));
  }
  return 0;
}

int cmd_resolution(const Options& o, std::ostream& out, std::ostream& err) {
  std::vector<std::string> warnings;
  const auto data = load_dataset(o.data, &warnings);
  report_warnings(warnings, o, err);
  ResolutionOptions ro;
  ro.bandwidth = o.bandwidth;
  const auto lat = dataset_latencies(data);
  const auto est = estimate_resolution(lat, ro);
  out << "resolution_ms\t" << fixed6(est.quantum) << '\n' << "modes\t" << est.modes.size() << '\n';
  if (!o.out.empty()) {
    std::string csv = "latency_ms,density\n";
    for (std::size_t i = 0; i < est.grid.size(); ++i) csv += fixed6(est.grid[i]) + "," + fixed6(est.density[i]) + "\n";
    write_text_file(fs::path(o.out) / "kde.csv", csv);
    auto kv = invocation("resolution", o);
    kv.set("bandwidth", format_double(ro.bandwidth));
    kv.set("grid_step", format_double(ro.grid_step));
    kv.set("grid_min", format_double(ro.grid_min));
    kv.set("grid_max", format_double(ro.grid_max));
    kv.set("prominence", format_double(ro.prominence));
    write_snapshot(o.out, kv);
  }
  return 0;
}

int cmd_evaluate(const Options& o, std::ostream& out, std::ostream& err) {
  const PipelineConfig config = pipeline_config(o);
  std::vector<std::string> warnings;
  const auto data = labeled_dataset(o, warnings);
  const auto threads = o.threads ? o.threads : default_thread_count();
  auto result = run_pipeline(data, config, threads);
  warnings.insert(warnings.end(), result.warnings.begin(), result.warnings.end());
  report_warnings(warnings, o, err);

  const fs::path dir = o.out;
  write_scores(result.scores, dir / "scores.tsv");
  write_snapshot(dir, config.snapshot());
  out << "scored " << result.scores.records.size() << " queries (" << result.ftc << " failed to capture)\n";
  if (has_both_classes(result.scores)) {
    const auto metrics = compute_metrics(result.scores);
    write_text_file(dir / "metrics.tsv", format_metrics(metrics));
    std::vector<double> s;
    std::vector<Label> l;
    for (const auto& r : result.scores.records) {
      if (!r.label) continue;
      s.push_back(r.decision_score());
      l.push_back(*r.label);
    }
    write_text_file(dir / "roc.csv", format_roc_csv(roc(s, l)));
    write_text_file(dir / "score_histogram.csv", format_score_histogram(result.scores, o.bins));
    out << format_metrics(metrics);
  } else {
    out << "no genuine and impostor labels available; metrics skipped\n";
  }
  return 0;
}

int cmd_eer(const Options& o, std::ostream& out) {
  ScoreSet scores = read_scores(o.scores);
  attach_labels(scores, read_labels(o.labels));
  const auto metrics = compute_metrics(scores);
  out << format_metrics(metrics);
  if (!o.out.empty()) {
    write_text_file(fs::path(o.out) / "metrics.tsv", format_metrics(metrics));
    write_snapshot(o.out, invocation("eer", o));
  }
  return 0;
}

int cmd_validate(const Options& o, std::ostream& out, std::ostream& err) {
  const PipelineConfig config = pipeline_config(o);
  std::vector<std::string> warnings;
  const auto data = labeled_dataset(o, warnings);
  report_warnings(warnings, o, err);
  const auto threads = o.threads ? o.threads : default_thread_count();
  const auto v = monte_carlo_validate(data, config, o.repetitions, config.seed, 4, threads);
  std::string table = "repetition\tglobal_eer\n";
  for (std::size_t i = 0; i < v.eers.size(); ++i) table += std::to_string(i) + "\t" + fixed6(v.eers[i]) + "\n";
  const std::string summary = "mean_eer\t" + fixed6(v.mean) + "\nsd_eer\t" + fixed6(v.sd) + "\n";
  out << summary;
  if (!o.out.empty()) {
    write_text_file(fs::path(o.out) / "validation.tsv", table);
    write_text_file(fs::path(o.out) / "metrics.tsv", "metric\tvalue\n" + summary);
    auto kv = config.snapshot();
    kv.set("repetitions", std::to_string(o.repetitions));
    write_snapshot(o.out, kv);
  }
  return 0;
}

int cmd_ablate(const Options& o, std::ostream& out, std::ostream& err) {
  const PipelineConfig base = pipeline_config(o);
  std::vector<std::string> warnings;
  const auto data = labeled_dataset(o, warnings);
  report_warnings(warnings, o, err);
  const auto threads = o.threads ? o.threads : default_thread_count();
  const bool per_member = base.detector.name == "ensemble" && base.ensemble_mode == EnsembleMode::Normalized;

  std::string table = "alignment\tscore_norm\tglobal_eer\tsubject_eer_mean\tsubject_eer_sd\tftc\n";
  for (auto method : {AlignmentMethod::Align, AlignmentMethod::Truncate, AlignmentMethod::Discard}) {
    PipelineConfig c = base;
    c.alignment = method;
    c.score_norm = ScoreNormMethod::none();
    const auto raw = per_member ? PipelineResult{} : run_pipeline(data, c, threads);
    for (auto norm : {ScoreNormMethod::none(), ScoreNormMethod::minmax(), ScoreNormMethod::sd(base.score_norm.h_s)}) {
      ScoreSet scores;
      if (per_member) {
        c.score_norm = norm;
        scores = run_pipeline(data, c, threads).scores;
      } else {
        scores = apply_normalization(raw.scores, norm);
      }
      const auto m = compute_metrics(scores);
      table += to_string(method) + "\t" + to_string(norm.kind) + "\t" + fixed6(m.global_eer) + "\t" +
               fixed6(m.subject_eer_mean) + "\t" + fixed6(m.subject_eer_sd) + "\t" + std::to_string(m.ftc) + "\n";
    }
  }
  out << table;
  if (!o.out.empty()) {
    write_text_file(fs::path(o.out) / "ablation.tsv", table);
    write_snapshot(o.out, base.snapshot());
  }
  return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Keystroke biometric anomaly detection toolkit", "kbad"};
  app.require_subcommand(1);
  Options o;
  app.add_flag("-v,--verbose", o.verbose, "List warnings");

  auto add_threads = [&](CLI::App* c) {
    c->add_option("--threads", o.threads, "Worker threads (default: KBAD_THREADS or all cores)");
  };
  auto add_pipeline = [&](CLI::App* c) {
    c->add_option("--config", o.config, "Pipeline config file")->check(CLI::ExistingFile);
    c->add_option("--data", o.data, "Dataset root")->required()->check(CLI::ExistingDirectory);
    c->add_option("--labels", o.labels, "Label file for the queries")->check(CLI::ExistingFile);
    c->add_option("--method", o.method, "Alignment method")->check(CLI::IsMember({"align", "truncate", "discard"}));
    c->add_option("--score-norm", o.score_norm, "Score normalization")->check(CLI::IsMember({"none", "minmax", "sd"}));
    c->add_option("--detector", o.detector, "Detector name or spec, e.g. cae{hidden=200}");
    c->add_option("--seed", o.seed, "Seed override");
    add_threads(c);
  };

  auto* synth = app.add_subcommand("synth", "Generate a synthetic dataset");
  synth->add_option("--config", o.config, "Generator config file")->check(CLI::ExistingFile);
  synth->add_option("--out", o.out, "Output dataset root")->required();
  synth->add_option("--seed", o.seed, "Seed override");

  auto* audit = app.add_subcommand("audit", "Damerau-Levenshtein audit of key sequences");
  audit->add_option("--data", o.data, "Dataset root")->required()->check(CLI::ExistingDirectory);
  audit->add_option("--out", o.out, "Output directory");

  auto* resolution = app.add_subcommand("resolution", "Estimate the timestamp resolution");
  resolution->add_option("--data", o.data, "Dataset root")->required()->check(CLI::ExistingDirectory);
  resolution->add_option("--bandwidth", o.bandwidth, "KDE bandwidth in ms")->check(CLI::PositiveNumber);
  resolution->add_option("--out", o.out, "Output directory");

  auto* evaluate = app.add_subcommand("evaluate", "Score a dataset and write scores and metrics");
  add_pipeline(evaluate);
  evaluate->add_option("--out", o.out, "Output directory")->required();
  evaluate->add_option("--bins", o.bins, "Score histogram bins")->check(CLI::PositiveNumber);

  auto* eer = app.add_subcommand("eer", "Global and subject EER of a score file");
  eer->add_option("--scores", o.scores, "Score file")->required()->check(CLI::ExistingFile);
  eer->add_option("--labels", o.labels, "Label file")->required()->check(CLI::ExistingFile);
  eer->add_option("--out", o.out, "Output directory");

  auto* validate = app.add_subcommand("validate", "Monte Carlo validation on a labeled dataset");
  add_pipeline(validate);
  validate->add_option("--repetitions", o.repetitions, "Repetitions")->check(CLI::PositiveNumber);
  validate->add_option("--out", o.out, "Output directory");

  auto* ablate = app.add_subcommand("ablate", "Alignment by score normalization grid");
  add_pipeline(ablate);
  ablate->add_option("--out", o.out, "Output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "kbad: " << e.what() << "\n\n" << app.help();
    return 2;
  }

  try {
    if (*synth) return cmd_synth(o, out);
    if (*audit) return cmd_audit(o, out, err);
    if (*resolution) return cmd_resolution(o, out, err);
    if (*evaluate) return cmd_evaluate(o, out, err);
    if (*eer) return cmd_eer(o, out);
    if (*validate) return cmd_validate(o, out, err);
    if (*ablate) return cmd_ablate(o, out, err);
  } catch (const std::exception& e) {
    err << "kbad: error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}

}  // namespace kbad
