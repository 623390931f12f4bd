#include "kbad/score_norm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

namespace kbad {

namespace {

std::vector<double> clamp_map(std::span<const double> scores, double lo, double hi) {
  std::vector<double> out;
  out.reserve(scores.size());
  for (double s : scores) {
    out.push_back(hi > lo ? std::clamp((s - lo) / (hi - lo), 0.0, 1.0) : 0.5);
  }
  return out;
}

}  // namespace

double ScoreRecord::decision_score() const {
  if (failed) return -std::numeric_limits<double>::infinity();
  return normalized_score ? *normalized_score : raw_score;
}

void ScoreSet::sort_and_check() {
  std::sort(records.begin(), records.end(), [](const ScoreRecord& a, const ScoreRecord& b) {
    return std::tie(a.subject_id, a.sample_id) < std::tie(b.subject_id, b.sample_id);
  });
  for (std::size_t i = 1; i < records.size(); ++i) {
    if (records[i].subject_id == records[i - 1].subject_id &&
        records[i].sample_id == records[i - 1].sample_id) {
      throw Error("duplicate score record " + records[i].subject_id + "/" + records[i].sample_id);
    }
  }
}

std::size_t ScoreSet::failure_count() const {
  return static_cast<std::size_t>(
      std::count_if(records.begin(), records.end(), [](const ScoreRecord& r) { return r.failed; }));
}

std::string to_string(ScoreNormKind kind) {
  switch (kind) {
    case ScoreNormKind::None: return "none";
    case ScoreNormKind::MinMax: return "minmax";
    case ScoreNormKind::SD: return "sd";
  }
  return "?";
}

ScoreNormKind parse_score_norm(const std::string& text) {
  if (text == "none") return ScoreNormKind::None;
  if (text == "minmax") return ScoreNormKind::MinMax;
  if (text == "sd") return ScoreNormKind::SD;
  throw Error("unknown score normalization '" + text + "' (expected none, minmax or sd)");
}

std::vector<double> normalize_sd(std::span<const double> scores, double h_s) {
  if (scores.size() < 2) throw Error("normalize_sd: need at least 2 scores");
  double mean = 0.0;
  for (double s : scores) mean += s;
  mean /= static_cast<double>(scores.size());
  double ss = 0.0;
  for (double s : scores) ss += (s - mean) * (s - mean);
  const double sd = std::sqrt(ss / static_cast<double>(scores.size()));
  if (sd == 0.0) return std::vector<double>(scores.size(), 0.5);
  return clamp_map(scores, mean - h_s * sd, mean + h_s * sd);
}

std::vector<double> normalize_minmax(std::span<const double> scores) {
  if (scores.empty()) return {};
  const auto [lo, hi] = std::minmax_element(scores.begin(), scores.end());
  return clamp_map(scores, *lo, *hi);
}

ScoreSet apply_normalization(const ScoreSet& scores, const ScoreNormMethod& method) {
  ScoreSet out = scores;
  std::map<std::string, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < out.records.size(); ++i) {
    auto& r = out.records[i];
    r.normalized_score.reset();
    if (!r.failed) groups[r.subject_id].push_back(i);
  }
  for (const auto& [subject, idx] : groups) {
    std::vector<double> raw;
    raw.reserve(idx.size());
    for (auto i : idx) raw.push_back(out.records[i].raw_score);
    std::vector<double> norm;
    switch (method.kind) {
      case ScoreNormKind::None: norm = raw; break;
      case ScoreNormKind::MinMax: norm = normalize_minmax(raw); break;
      case ScoreNormKind::SD:
        // A subject with a single usable score has no spread to normalize by.
        norm = raw.size() < 2 ? std::vector<double>(raw.size(), 0.5) : normalize_sd(raw, method.h_s);
        break;
    }
    for (std::size_t k = 0; k < idx.size(); ++k) out.records[idx[k]].normalized_score = norm[k];
  }
  return out;
}

}  // namespace kbad
