#ifndef KBAD_DATASET_IO_HPP
#define KBAD_DATASET_IO_HPP

#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "kbad/score_norm.hpp"
#include "kbad/types.hpp"

namespace kbad {

/// Loads `<root>/manifest.tsv` (subject_id, sample_id, role, label with "?"
/// for hidden labels) and `<root>/<subject_id>/<sample_id>.txt` for each row.
/// Missing sample files and sample files without a manifest row are reported
/// together in one Error. Pairing warnings are appended to `warnings`.
SubjectDataset load_dataset(const std::filesystem::path& root, std::vector<std::string>* warnings = nullptr);

/// Writes the layout read by load_dataset, creating directories as needed.
/// With `hide_query_labels` every query is listed with label "?".
void write_dataset(const SubjectDataset& dataset, const std::filesystem::path& root,
                   bool hide_query_labels = false);

/// Score file lines "subject_id<TAB>sample_id<TAB>score", 6 decimals, sorted
/// by (subject_id, sample_id). The decision score is written: normalized when
/// present, else raw, and "-inf" for failed records.
std::string format_scores(const ScoreSet& scores);
void write_scores(const ScoreSet& scores, const std::filesystem::path& path);

/// Reads a score file into raw scores ("-inf" marks a failed record).
ScoreSet parse_scores(const std::string& text);
ScoreSet read_scores(const std::filesystem::path& path);

using LabelMap = std::map<std::pair<std::string, std::string>, Label>;

/// Label file lines "subject_id<TAB>sample_id<TAB>genuine|impostor".
LabelMap parse_labels(const std::string& text);
LabelMap read_labels(const std::filesystem::path& path);
std::string format_labels(const LabelMap& labels);

/// Labels of every labeled query in the dataset.
LabelMap dataset_labels(const SubjectDataset& dataset);

/// Sets the label of every query found in `labels`; templates are untouched.
void apply_labels(SubjectDataset& dataset, const LabelMap& labels);

/// Sets each record's label from `labels`; throws Error listing records
/// that have no label.
void attach_labels(ScoreSet& scores, const LabelMap& labels);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace kbad

#endif  // KBAD_DATASET_IO_HPP
