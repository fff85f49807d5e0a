#ifndef TRIVOTE_CORPUS_HPP
#define TRIVOTE_CORPUS_HPP

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <tuple>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

namespace trivote {

enum class Source { kTwitter, kGab };
enum class Language { kEn, kEs };
// Fixed encoding: the positive class is 1 everywhere.
enum class Label : int { kNonSexist = 0, kSexist = 1 };

std::string_view to_string(Source s);
std::string_view to_string(Language l);
// "sexist" / "non-sexist".
std::string_view to_string(Label l);

// Parsers accept the canonical spellings above. Labels additionally accept
// "0" and "1". Anything else, including "grab", yields std::nullopt.
std::optional<Source> parse_source(std::string_view s);
std::optional<Language> parse_language(std::string_view s);
std::optional<Label> parse_label(std::string_view s);

inline int label_value(Label l) { return static_cast<int>(l); }

struct Sample {
  std::string id;
  // Absent when the corpus carries no source column (e.g. training data).
  std::optional<Source> source;
  Language language = Language::kEn;
  std::string text;
  std::optional<Label> label;

  friend bool operator==(const Sample&, const Sample&) = default;
};

class LabeledDataset {
 public:
  LabeledDataset() = default;
  // Validates the dataset invariants: non-empty unique ids, non-empty text,
  // and a label on every sample when `labeled` is set. Throws DataError.
  LabeledDataset(std::string name, std::vector<Sample> samples, bool labeled);

  const std::string& name() const { return name_; }
  bool labeled() const { return labeled_; }
  const std::vector<Sample>& samples() const { return samples_; }
  std::size_t size() const { return samples_.size(); }
  bool empty() const { return samples_.empty(); }
  const Sample& operator[](std::size_t i) const { return samples_[i]; }

  auto begin() const { return samples_.begin(); }
  auto end() const { return samples_.end(); }

  friend bool operator==(const LabeledDataset&, const LabeledDataset&) = default;

 private:
  std::string name_;
  std::vector<Sample> samples_;
  bool labeled_ = false;
};

// Names the header of each field in a TSV file. The source column is read
// when the file has it and skipped otherwise; `label` is only consulted for
// labeled loads.
struct ColumnMapping {
  std::string id = "id";
  std::optional<std::string> source = std::string("source");
  std::string language = "language";
  std::string text = "text";
  std::string label = "label";

  static ColumnMapping from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

struct LoadOptions {
  bool labeled = true;
  // Apply normalize_text to every text field; empty results are rejected.
  bool normalize = true;
  // Dataset name; defaults to the file stem.
  std::optional<std::string> name;
};

// Reads a UTF-8 TSV file with a header row. Errors carry the file path and
// the 1-based line number of the offending row.
LabeledDataset load_dataset(const std::filesystem::path& path,
                            const ColumnMapping& mapping,
                            const LoadOptions& options = {});

// Writes the dataset in the layout described by `mapping`. The source column
// is written when the mapping names one and the samples carry sources; the
// label column when the dataset is labeled.
void write_dataset(const LabeledDataset& ds, const std::filesystem::path& path,
                   const ColumnMapping& mapping);

// Unicode NFC, URLs -> "<URL>", @-mentions -> "<USER>", whitespace runs -> a
// single space, trim. Deterministic and idempotent.
std::string normalize_text(std::string_view raw);

inline constexpr std::string_view kUrlPlaceholder = "<URL>";
inline constexpr std::string_view kMentionPlaceholder = "<USER>";

struct DatasetStats {
  std::string dataset;
  // One cell per observed (language, label) pair.
  std::map<std::pair<Language, Label>, std::int64_t> by_language_label;
  // One cell per observed (language, label, source) triple, for samples that
  // carry a source.
  std::map<std::tuple<Language, Label, Source>, std::int64_t> by_source;
  std::int64_t total = 0;

  std::int64_t count(Language l, Label y) const;
  std::int64_t count(Language l, Label y, Source s) const;
};

// Throws DataError for an unlabeled dataset.
DatasetStats dataset_stats(const LabeledDataset& ds);

// Table-shaped rendering: one row per (dataset, language, label, count).
std::string render_stats_text(const std::vector<DatasetStats>& stats);
nlohmann::json stats_to_json(const std::vector<DatasetStats>& stats);

struct SplitResult {
  LabeledDataset train;
  LabeledDataset validation;
};

// Stratified by (language, label). The validation side holds
// round(fraction * |ds|) samples; both sides preserve input order.
SplitResult split(const LabeledDataset& ds, double validation_fraction,
                  std::uint64_t seed);

}  // namespace trivote

#endif  // TRIVOTE_CORPUS_HPP
