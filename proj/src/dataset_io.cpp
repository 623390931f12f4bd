#include "kbad/dataset_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "kbad/events.hpp"

namespace kbad {

namespace fs = std::filesystem;

namespace {

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const auto tab = line.find('\t', start);
    fields.push_back(line.substr(start, tab - start));
    if (tab == std::string::npos) break;
    start = tab + 1;
  }
  return fields;
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> lines;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  return lines;
}

std::string format_fixed(double v) {
  if (std::isinf(v)) return v < 0 ? "-inf" : "inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  std::string s = buf;
  if (s == "-0.000000") s = "0.000000";
  return s;
}

}  // namespace

std::string read_text_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
  if (!out) throw Error("write failed: " + path.string());
}

SubjectDataset load_dataset(const fs::path& root, std::vector<std::string>* warnings) {
  const auto manifest = root / "manifest.tsv";
  if (!fs::exists(manifest)) throw Error("missing " + manifest.string());
  const auto lines = lines_of(read_text_file(manifest));

  SubjectDataset dataset;
  std::set<fs::path> listed;
  std::vector<std::string> missing;
  std::set<std::pair<std::string, std::string>> seen;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto& line = lines[i];
    if (line.empty()) continue;
    const auto f = split_tabs(line);
    if (i == 0 && !f.empty() && f[0] == "subject_id") continue;
    if (f.size() != 4) throw ParseError(i + 1, "manifest row needs 4 tab-separated fields");
    Sample s;
    s.subject_id = f[0];
    s.sample_id = f[1];
    try {
      s.role = parse_role(f[2]);
      if (f[3] != "?") s.label = parse_label(f[3]);
    } catch (const Error& e) {
      throw ParseError(i + 1, e.what());
    }
    if (s.role == Role::Template && s.label != Label::Genuine) {
      throw ParseError(i + 1, "template " + s.sample_id + " must be labeled genuine");
    }
    if (!seen.insert({s.subject_id, s.sample_id}).second) {
      throw ParseError(i + 1, "duplicate sample " + s.subject_id + "/" + s.sample_id);
    }
    const auto file = root / s.subject_id / (s.sample_id + ".txt");
    listed.insert(file.lexically_normal());
    if (!fs::exists(file)) {
      missing.push_back(file.string());
      continue;
    }
    try {
      std::vector<std::string> w;
      s.sequence = pair_events(parse_raw_events(read_text_file(file)), &w);
      if (warnings) {
        for (auto& msg : w) warnings->push_back(s.subject_id + "/" + s.sample_id + ": " + msg);
      }
    } catch (const Error& e) {
      throw Error(file.string() + ": " + e.what());
    }
    auto& subject = dataset.subjects[s.subject_id];
    (s.role == Role::Template ? subject.templates : subject.queries).push_back(std::move(s));
  }

  std::vector<std::string> unlisted;
  for (const auto& entry : fs::directory_iterator(root)) {
    if (!entry.is_directory()) continue;
    for (const auto& file : fs::directory_iterator(entry.path())) {
      if (file.path().extension() == ".txt" && !listed.count(file.path().lexically_normal())) {
        unlisted.push_back(file.path().string());
      }
    }
  }
  if (!missing.empty() || !unlisted.empty()) {
    std::string msg = "dataset " + root.string() + " does not match its manifest";
    for (const auto& m : missing) msg += "\n  missing: " + m;
    std::sort(unlisted.begin(), unlisted.end());
    for (const auto& u : unlisted) msg += "\n  not in manifest: " + u;
    throw Error(msg);
  }
  return dataset;
}

void write_dataset(const SubjectDataset& dataset, const fs::path& root, bool hide_query_labels) {
  fs::create_directories(root);
  std::string manifest = "subject_id\tsample_id\trole\tlabel\n";
  for (const auto& [id, subject] : dataset.subjects) {
    for (const auto* group : {&subject.templates, &subject.queries}) {
      for (const auto& s : *group) {
        manifest += id + "\t" + s.sample_id + "\t" + to_string(s.role) + "\t" +
                    (s.label && !(hide_query_labels && s.role == Role::Query) ? to_string(*s.label) : "?") + "\n";
        write_text_file(root / id / (s.sample_id + ".txt"), format_raw_events(to_raw_events(s.sequence)));
      }
    }
  }
  write_text_file(root / "manifest.tsv", manifest);
}

std::string format_scores(const ScoreSet& scores) {
  ScoreSet sorted = scores;
  sorted.sort_and_check();
  std::string out;
  for (const auto& r : sorted.records) {
    out += r.subject_id + "\t" + r.sample_id + "\t" + format_fixed(r.decision_score()) + "\n";
  }
  return out;
}

void write_scores(const ScoreSet& scores, const fs::path& path) { write_text_file(path, format_scores(scores)); }

ScoreSet parse_scores(const std::string& text) {
  ScoreSet set;
  const auto lines = lines_of(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const auto f = split_tabs(lines[i]);
    if (f.size() != 3) throw ParseError(i + 1, "score line needs 3 tab-separated fields");
    ScoreRecord r;
    r.subject_id = f[0];
    r.sample_id = f[1];
    if (f[2] == "-inf") {
      r.failed = true;
      r.raw_score = -std::numeric_limits<double>::infinity();
    } else {
      std::size_t used = 0;
      try {
        r.raw_score = std::stod(f[2], &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != f[2].size() || !std::isfinite(r.raw_score)) throw ParseError(i + 1, "bad score '" + f[2] + "'");
    }
    set.records.push_back(std::move(r));
  }
  set.sort_and_check();
  return set;
}

ScoreSet read_scores(const fs::path& path) { return parse_scores(read_text_file(path)); }

LabelMap parse_labels(const std::string& text) {
  LabelMap labels;
  const auto lines = lines_of(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const auto f = split_tabs(lines[i]);
    if (f.size() != 3) throw ParseError(i + 1, "label line needs 3 tab-separated fields");
    Label l;
    try {
      l = parse_label(f[2]);
    } catch (const Error& e) {
      throw ParseError(i + 1, e.what());
    }
    if (!labels.emplace(std::make_pair(f[0], f[1]), l).second) {
      throw ParseError(i + 1, "duplicate label for " + f[0] + "/" + f[1]);
    }
  }
  return labels;
}

LabelMap read_labels(const fs::path& path) { return parse_labels(read_text_file(path)); }

std::string format_labels(const LabelMap& labels) {
  std::string out;
  for (const auto& [key, label] : labels) out += key.first + "\t" + key.second + "\t" + to_string(label) + "\n";
  return out;
}

LabelMap dataset_labels(const SubjectDataset& dataset) {
  LabelMap labels;
  for (const auto& [id, subject] : dataset.subjects) {
    for (const auto& q : subject.queries) {
      if (q.label) labels[{id, q.sample_id}] = *q.label;
    }
  }
  return labels;
}

void apply_labels(SubjectDataset& dataset, const LabelMap& labels) {
  for (auto& [id, subject] : dataset.subjects) {
    for (auto& q : subject.queries) {
      const auto it = labels.find({id, q.sample_id});
      if (it != labels.end()) q.label = it->second;
    }
  }
}

void attach_labels(ScoreSet& scores, const LabelMap& labels) {
  std::vector<std::string> unlabeled;
  for (auto& r : scores.records) {
    const auto it = labels.find({r.subject_id, r.sample_id});
    if (it == labels.end()) {
      unlabeled.push_back(r.subject_id + "/" + r.sample_id);
    } else {
      r.label = it->second;
    }
  }
  if (!unlabeled.empty()) {
    std::string msg = std::to_string(unlabeled.size()) + " score records have no label:";
    for (std::size_t i = 0; i < unlabeled.size() && i < 10; ++i) msg += " " + unlabeled[i];
    if (unlabeled.size() > 10) msg += " ...";
    throw Error(msg);
  }
}

}  // namespace kbad
