#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "kbad/alignment.hpp"

namespace kbad {

// Lowrance-Wagner recurrence. Row/column 0 of `d` is the "infinity" border,
// so d[i + 1][j + 1] is the distance between prefixes a[0, i) and b[0, j).
std::size_t damerau_levenshtein(std::span<const std::string> a, std::span<const std::string> b) {
  const std::size_t la = a.size();
  const std::size_t lb = b.size();
  const std::size_t inf = la + lb;
  std::vector<std::vector<std::size_t>> d(la + 2, std::vector<std::size_t>(lb + 2, 0));
  d[0][0] = inf;
  for (std::size_t i = 0; i <= la; ++i) {
    d[i + 1][0] = inf;
    d[i + 1][1] = i;
  }
  for (std::size_t j = 0; j <= lb; ++j) {
    d[0][j + 1] = inf;
    d[1][j + 1] = j;
  }

  std::map<std::string_view, std::size_t> last_row;  // last row where a symbol occurred
  for (std::size_t i = 1; i <= la; ++i) {
    std::size_t last_match_col = 0;
    for (std::size_t j = 1; j <= lb; ++j) {
      auto it = last_row.find(b[j - 1]);
      const std::size_t k = it == last_row.end() ? 0 : it->second;
      const std::size_t l = last_match_col;
      std::size_t cost = 1;
      if (a[i - 1] == b[j - 1]) {
        cost = 0;
        last_match_col = j;
      }
      d[i + 1][j + 1] = std::min({d[i][j] + cost, d[i + 1][j] + 1, d[i][j + 1] + 1,
                                  d[k][l] + (i - k - 1) + 1 + (j - l - 1)});
    }
    last_row[a[i - 1]] = i;
  }
  return d[la + 1][lb + 1];
}

namespace {

struct Accumulator {
  std::vector<std::size_t> values;

  void add(std::size_t v) { values.push_back(v); }

  void finish(AuditRow& row) const {
    row.count_total = values.size();
    row.count_differing = 0;
    row.mean_dl = row.sd_dl = 0.0;
    row.max_dl = 0;
    if (values.empty()) return;
    double sum = 0.0;
    for (auto v : values) {
      sum += static_cast<double>(v);
      row.count_differing += v > 0 ? 1 : 0;
      row.max_dl = std::max(row.max_dl, v);
    }
    row.mean_dl = sum / static_cast<double>(values.size());
    double ss = 0.0;
    for (auto v : values) ss += (static_cast<double>(v) - row.mean_dl) * (static_cast<double>(v) - row.mean_dl);
    row.sd_dl = std::sqrt(ss / static_cast<double>(values.size()));
  }
};

}  // namespace

AuditReport audit_dataset(const SubjectDataset& dataset) {
  Accumulator tt, qt;
  for (const auto& [id, subject] : dataset.subjects) {
    std::vector<std::vector<std::string>> tkeys;
    for (const auto& t : subject.templates) tkeys.push_back(t.sequence.key_names());
    for (std::size_t i = 0; i < tkeys.size(); ++i) {
      for (std::size_t j = i + 1; j < tkeys.size(); ++j) {
        tt.add(damerau_levenshtein(tkeys[i], tkeys[j]));
      }
    }
    for (const auto& q : subject.queries) {
      auto qkeys = q.sequence.key_names();
      for (const auto& t : tkeys) qt.add(damerau_levenshtein(qkeys, t));
    }
  }
  AuditReport report;
  tt.finish(report.template_template);
  qt.finish(report.query_template);
  return report;
}

std::string format_audit(const AuditReport& report) {
  std::ostringstream out;
  out << "comparison_type\tcount_total\tcount_differing\tmean_dl\tsd_dl\tmax_dl\n";
  out.setf(std::ios::fixed);
  out.precision(6);
  for (const auto* row : {&report.template_template, &report.query_template}) {
    out << row->comparison_type << '\t' << row->count_total << '\t' << row->count_differing
        << '\t' << row->mean_dl << '\t' << row->sd_dl << '\t' << row->max_dl << '\n';
  }
  return out.str();
}

}  // namespace kbad
