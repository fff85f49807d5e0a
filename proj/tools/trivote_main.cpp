// trivote: train three sentence classifiers, vote, and report.
//
//   trivote stats    --config run.json
//   trivote train    --config run.json [--seed N]
//   trivote predict  --config run.json [--models a b c] [--input test.tsv]
//   trivote evaluate --config run.json [--predictions p.tsv] [--gold g.tsv] [--baseline]
//   trivote synth    --out DIR [--seed N] [--per-cell N | --table1]

#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "trivote/error.hpp"
#include "trivote/pipeline.hpp"

namespace {

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  bool baseline = false;
  std::vector<std::string> models;
  std::optional<std::string> input;
  std::optional<std::string> predictions;
  std::optional<std::string> gold;
  std::size_t per_cell = 150;
  bool table1 = false;
  int verbosity = 0;
};

trivote::RunConfig load_config(const Options& o) {
  trivote::RunConfig config = trivote::RunConfig::load(o.config);
  if (o.seed) config.seed = *o.seed;
  if (o.out) config.output_dir = *o.out;
  if (o.baseline) config.baseline = true;
  return config;
}

int run(CLI::App& app, const Options& o) {
  auto* sub = app.get_subcommands().front();
  const std::string name = sub->get_name();
  if (name == "synth") {
    trivote::SynthOptions s;
    s.output_dir = o.out.value_or("synthetic");
    s.seed = o.seed.value_or(s.seed);
    s.per_cell = o.per_cell;
    s.table1 = o.table1;
    return trivote::cmd_synth(s, std::cout);
  }
  const trivote::RunConfig config = load_config(o);
  if (name == "stats") return trivote::cmd_stats(config, std::cout);
  if (name == "train") return trivote::cmd_train(config, std::cout);
  if (name == "predict") {
    trivote::PredictPaths paths;
    if (!o.models.empty()) {
      if (o.models.size() != 3) throw trivote::ConfigError("--models takes exactly three directories");
      paths.model_dirs = std::array<std::filesystem::path, 3>{o.models[0], o.models[1], o.models[2]};
    }
    if (o.input) paths.input = *o.input;
    return trivote::cmd_predict(config, paths, std::cout);
  }
  trivote::EvaluatePaths paths;
  if (o.predictions) paths.predictions = *o.predictions;
  if (o.gold) paths.gold = *o.gold;
  return trivote::cmd_evaluate(config, paths, std::cout);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Three-model sexism classifier with majority voting"};
  app.require_subcommand(1);
  Options o;
  app.add_flag("-v,--verbose", o.verbosity, "More logging (repeatable)");

  auto add_config = [&](CLI::App* sub) {
    sub->add_option("-c,--config", o.config, "Run configuration (JSON)")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", o.out, "Override the output directory");
    sub->add_option("--seed", o.seed, "Override the run seed");
  };
  add_config(app.add_subcommand("stats", "Per-language, per-label counts"));
  add_config(app.add_subcommand("train", "Train the three basic models"));
  auto* predict = app.add_subcommand("predict", "Predict with the trained models and vote");
  add_config(predict);
  predict->add_option("--models", o.models, "Model directories for model one, two, three")->expected(3);
  predict->add_option("--input", o.input, "Input TSV (defaults to the configured test file)");
  auto* evaluate = app.add_subcommand("evaluate", "Score predictions against gold labels");
  add_config(evaluate);
  evaluate->add_option("--predictions", o.predictions, "Ensemble TSV written by predict");
  evaluate->add_option("--gold", o.gold, "Labeled TSV (defaults to the configured test file)");
  evaluate->add_flag("--baseline", o.baseline, "Print the published figures alongside");
  auto* synth = app.add_subcommand("synth", "Write a synthetic corpus and a runnable config");
  synth->add_option("--out", o.out, "Output directory")->required();
  synth->add_option("--seed", o.seed, "Generator seed");
  synth->add_option("--per-cell", o.per_cell, "Samples per language/label cell")->check(CLI::PositiveNumber);
  synth->add_flag("--table1", o.table1, "Use the shared-task cell counts");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }
  spdlog::set_level(o.verbosity >= 2 ? spdlog::level::trace
                    : o.verbosity == 1 ? spdlog::level::debug
                                       : spdlog::level::warn);

  try {
    return run(app, o);
  } catch (const trivote::ConfigError& e) {
    std::cerr << fmt::format("error: {}\n", e.what());
    return 1;
  } catch (const trivote::DataError& e) {
    std::cerr << fmt::format("error: {}\n", e.what());
    return 2;
  } catch (const trivote::TrainingError& e) {
    std::cerr << fmt::format("error: {}\n", e.what());
    return 3;
  }
}
