#include "kbad/roc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>

namespace kbad {

RocCurve roc(std::span<const double> scores, std::span<const Label> labels) {
  if (scores.size() != labels.size()) throw Error("roc: scores and labels differ in length");
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

  const auto genuine = static_cast<double>(std::count(labels.begin(), labels.end(), Label::Genuine));
  const auto impostor = static_cast<double>(labels.size()) - genuine;
  if (genuine == 0 || impostor == 0) throw Error("roc: both genuine and impostor scores are required");

  RocCurve curve;
  curve.points.push_back({std::numeric_limits<double>::infinity(), 0.0, 1.0});
  double accepted_genuine = 0, accepted_impostor = 0;
  std::size_t i = 0;
  while (i < order.size()) {
    const double t = scores[order[i]];
    while (i < order.size() && scores[order[i]] == t) {
      (labels[order[i]] == Label::Genuine ? accepted_genuine : accepted_impostor) += 1;
      ++i;
    }
    curve.points.push_back({t, accepted_impostor / impostor, (genuine - accepted_genuine) / genuine});
  }
  return curve;
}

double equal_error_rate(const RocCurve& curve) {
  const auto& p = curve.points;
  if (p.empty()) throw Error("equal_error_rate: empty curve");
  for (std::size_t k = 0; k < p.size(); ++k) {
    const double d = p[k].far - p[k].frr;
    if (d == 0.0) return p[k].far;
    if (d > 0.0) {
      if (k == 0) return p[k].far;
      const double dprev = p[k - 1].far - p[k - 1].frr;
      const double t = -dprev / (d - dprev);
      return p[k - 1].far + t * (p[k].far - p[k - 1].far);
    }
  }
  return p.back().far;
}

namespace {

double eer_of(const std::vector<const ScoreRecord*>& records) {
  std::vector<double> s;
  std::vector<Label> l;
  for (const auto* r : records) {
    s.push_back(r->decision_score());
    l.push_back(*r->label);
  }
  return equal_error_rate(roc(s, l));
}

}  // namespace

double global_eer(const ScoreSet& scores) {
  std::vector<const ScoreRecord*> labeled;
  for (const auto& r : scores.records) {
    if (r.label) labeled.push_back(&r);
  }
  return eer_of(labeled);
}

SubjectEerSummary subject_eer(const ScoreSet& scores) {
  std::map<std::string, std::vector<const ScoreRecord*>> groups;
  for (const auto& r : scores.records) {
    if (r.label) groups[r.subject_id].push_back(&r);
  }
  SubjectEerSummary out;
  for (const auto& [subject, recs] : groups) {
    const bool has_g = std::any_of(recs.begin(), recs.end(), [](auto* r) { return *r->label == Label::Genuine; });
    const bool has_i = std::any_of(recs.begin(), recs.end(), [](auto* r) { return *r->label == Label::Impostor; });
    if (!has_g || !has_i) {
      out.skipped.push_back(subject);
      continue;
    }
    out.per_subject.emplace_back(subject, eer_of(recs));
  }
  if (out.per_subject.empty()) return out;
  double sum = 0.0;
  for (const auto& [s, e] : out.per_subject) sum += e;
  out.mean = sum / static_cast<double>(out.per_subject.size());
  double ss = 0.0;
  for (const auto& [s, e] : out.per_subject) ss += (e - out.mean) * (e - out.mean);
  out.sd = std::sqrt(ss / static_cast<double>(out.per_subject.size()));
  return out;
}

std::string format_roc_csv(const RocCurve& curve) {
  std::ostringstream out;
  out << "threshold,far,frr\n";
  out.setf(std::ios::fixed);
  out.precision(6);
  for (const auto& p : curve.points) out << p.threshold << ',' << p.far << ',' << p.frr << '\n';
  return out.str();
}

std::string format_score_histogram(const ScoreSet& scores, int bins) {
  if (bins <= 0) throw Error("format_score_histogram: bins must be positive");
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const auto& r : scores.records) {
    const double s = r.decision_score();
    if (!r.label || !std::isfinite(s)) continue;
    lo = std::min(lo, s);
    hi = std::max(hi, s);
  }
  std::vector<long> gen(static_cast<std::size_t>(bins), 0), imp(static_cast<std::size_t>(bins), 0);
  if (lo <= hi) {
    const double width = hi > lo ? (hi - lo) / bins : 1.0;
    for (const auto& r : scores.records) {
      const double s = r.decision_score();
      if (!r.label || !std::isfinite(s)) continue;
      auto b = static_cast<std::size_t>(std::min<double>(bins - 1, std::floor((s - lo) / width)));
      (*r.label == Label::Genuine ? gen : imp)[b]++;
    }
  } else {
    lo = 0.0;
    hi = 1.0;
  }
  std::ostringstream out;
  out << "bin_low,bin_high,genuine,impostor\n";
  out.setf(std::ios::fixed);
  out.precision(6);
  const double width = hi > lo ? (hi - lo) / bins : 1.0;
  for (int b = 0; b < bins; ++b) {
    out << lo + b * width << ',' << lo + (b + 1) * width << ',' << gen[static_cast<std::size_t>(b)]
        << ',' << imp[static_cast<std::size_t>(b)] << '\n';
  }
  return out.str();
}

}  // namespace kbad
