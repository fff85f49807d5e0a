#ifndef TRIVOTE_EVALUATION_HPP
#define TRIVOTE_EVALUATION_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "trivote/corpus.hpp"

namespace trivote {

struct PredictionRecord {
  std::string id;
  int gold = 0;
  int predicted = 0;
  std::optional<Source> source;
  std::optional<Language> language;
  std::string model_tag;
};

enum class Averaging { kPositiveClass, kMacro };

std::string_view to_string(Averaging a);
// "positive_class" or "macro"; throws ConfigError otherwise.
Averaging parse_averaging(std::string_view s);

// Exact non-negative rational; metrics are kept as fractions of integer
// counts and converted to double with a single division.
struct Fraction {
  std::int64_t num = 0;
  std::int64_t den = 1;

  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
  friend bool operator==(const Fraction&, const Fraction&) = default;
};

struct Confusion {
  std::int64_t tp = 0;
  std::int64_t fp = 0;
  std::int64_t fn = 0;
  std::int64_t tn = 0;

  std::int64_t n() const { return tp + fp + fn + tn; }
  friend bool operator==(const Confusion&, const Confusion&) = default;
};

// Throws DataError on an empty span or a non-binary label.
Confusion confusion(std::span<const PredictionRecord> records);

Fraction accuracy_fraction(const Confusion& c);
// 2tp / (2tp + fp + fn) for `positive` = 1, the mirror for 0. A class absent
// from both gold and predicted yields 0/1 and sets *degenerate.
Fraction class_f1_fraction(const Confusion& c, int positive, bool* degenerate = nullptr);
Fraction f_measure_fraction(const Confusion& c, Averaging averaging,
                            std::vector<std::string>* warnings = nullptr);

double accuracy(std::span<const PredictionRecord> records);
double f_measure(std::span<const PredictionRecord> records, Averaging averaging);

struct MetricsReport {
  std::int64_t n = 0;
  double accuracy = 0.0;
  double f1 = 0.0;
  Averaging averaging = Averaging::kMacro;
  Confusion confusion;
  std::vector<std::string> warnings;
};

MetricsReport metrics(std::span<const PredictionRecord> records, Averaging averaging);

enum class Axis { kSource, kLanguage, kModel };

std::string_view to_string(Axis a);

struct BreakdownReport {
  Axis axis = Axis::kSource;
  std::map<std::string, MetricsReport> cells;
};

// Partitions by the axis value. Throws DataError when a record lacks it.
BreakdownReport breakdown(std::span<const PredictionRecord> records, Axis axis,
                          Averaging averaging);

// One evaluated system (a basic model or the voting ensemble).
struct SystemReport {
  std::string tag;
  MetricsReport overall;
  BreakdownReport by_source;
  BreakdownReport by_language;
};

// Builds the overall, per-source and per-language reports. The source
// breakdown is left empty when no record carries a source.
SystemReport evaluate_system(std::string tag, std::span<const PredictionRecord> records,
                             Averaging averaging);

// Conventional tags and their display names.
inline constexpr std::string_view kModelOneTag = "model_one";
inline constexpr std::string_view kModelTwoTag = "model_two";
inline constexpr std::string_view kModelThreeTag = "model_three";
inline constexpr std::string_view kFinalTag = "final";
std::string display_name(std::string_view tag);

// Published reference numbers for the four systems on the shared-task test
// set. Only accuracy is published for the per-source and per-language cells.
struct BaselineCell {
  double accuracy;
  std::optional<double> f1;
};
std::optional<BaselineCell> published_baseline(std::string_view tag);
std::optional<BaselineCell> published_baseline(std::string_view tag, Source s);
std::optional<BaselineCell> published_baseline(std::string_view tag, Language l);

struct RenderOptions {
  bool baseline = false;
};

struct RenderedReport {
  // Table layout with comma decimals; '*' marks the best value per column.
  std::string text;
  // {"metadata": ..., "models": {tag: {overall, by_source, by_language}}}
  nlohmann::json document;
};

// Throws ConfigError when `systems` is empty.
RenderedReport render_report(const std::vector<SystemReport>& systems,
                             const RenderOptions& options);

// "0,7553" style, four decimals.
std::string format_decimal_comma(double v);

}  // namespace trivote

#endif  // TRIVOTE_EVALUATION_HPP
