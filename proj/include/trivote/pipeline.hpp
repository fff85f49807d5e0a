#ifndef TRIVOTE_PIPELINE_HPP
#define TRIVOTE_PIPELINE_HPP

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "trivote/corpus.hpp"
#include "trivote/encoders.hpp"
#include "trivote/evaluation.hpp"
#include "trivote/models.hpp"

namespace trivote {

// A pipeline run, read from a JSON file:
//
// {
//   "paths": {"train": "train.tsv", "test": "test.tsv", "output": "runs/demo"},
//   "schema": {"id": "id", "source": "source", "language": "language",
//              "text": "text", "label": "label"},
//   "encoders": [{"name": "english-bert", "type": "bert", "path": "..."}],
//   "models": {"model_one": {...}, "model_two": {...}, "model_three": {...}},
//   "training": {...},
//   "validation_fraction": 0.2,
//   "evaluation": {"averaging": "macro", "baseline": false},
//   "parallel": false,
//   "seed": 13
// }
//
// Relative paths resolve against the config file's directory.
struct RunConfig {
  std::filesystem::path train_path;
  std::optional<std::filesystem::path> test_path;
  std::filesystem::path output_dir;
  ColumnMapping schema;
  std::vector<EncoderDefinition> encoders;
  std::array<ModelConfig, 3> models;
  TrainConfig training;
  double validation_fraction = 0.2;
  Averaging averaging = Averaging::kMacro;
  bool baseline = false;
  // Train the three models, and predict with them, as concurrent jobs.
  bool parallel = false;
  std::uint64_t seed = 0;

  static RunConfig from_json(const nlohmann::json& j, const std::filesystem::path& base_dir);
  // Throws ConfigError naming the file on any problem.
  static RunConfig load(const std::filesystem::path& path);
  nlohmann::json to_json() const;

  // Seed used for model k (0-based): seed + k.
  std::uint64_t model_seed(std::size_t k) const { return seed + k; }
};

inline constexpr std::array<std::string_view, 3> kModelTags{"model_one", "model_two",
                                                            "model_three"};

struct PredictPaths {
  std::optional<std::array<std::filesystem::path, 3>> model_dirs;
  std::optional<std::filesystem::path> input;
};

struct EvaluatePaths {
  std::optional<std::filesystem::path> predictions;
  std::optional<std::filesystem::path> gold;
};

// Each command writes its files under config.output_dir, prints a summary to
// `log`, and returns the process exit code: 0 success, 1 usage/config error,
// 2 data error, 3 training failure. Config and data errors propagate as
// exceptions; per-model training failures are reported and turn into 3.
int cmd_stats(const RunConfig& config, std::ostream& log);
int cmd_train(const RunConfig& config, std::ostream& log);
int cmd_predict(const RunConfig& config, const PredictPaths& paths, std::ostream& log);
int cmd_evaluate(const RunConfig& config, const EvaluatePaths& paths, std::ostream& log);

// Writes train.tsv, test.tsv and a runnable config.json using hash encoders.
struct SynthOptions {
  std::filesystem::path output_dir;
  std::uint64_t seed = 7;
  std::size_t per_cell = 150;
  // Use the subtask-one cell counts instead of per_cell.
  bool table1 = false;
};
int cmd_synth(const SynthOptions& options, std::ostream& log);

// Hash-encoder configuration used by cmd_synth.
nlohmann::json desk_config_json(const std::filesystem::path& train, const std::filesystem::path& test,
                                const std::filesystem::path& output, std::uint64_t seed);

}  // namespace trivote

#endif  // TRIVOTE_PIPELINE_HPP
