#include <chrono>
#include <fstream>
#include <future>
#include <ostream>
#include <unordered_map>
#include <unordered_set>

#include <fmt/chrono.h>
#include <fmt/format.h>
#include <fmt/ostream.h>

#include "trivote/error.hpp"
#include "trivote/pipeline.hpp"
#include "trivote/synthetic.hpp"
#include "trivote/voting.hpp"

namespace trivote {
namespace {

using Clock = std::chrono::system_clock;

std::string timestamp(Clock::time_point t) {
  return fmt::format("{:%Y-%m-%dT%H:%M:%SZ}", fmt::gmtime(Clock::to_time_t(t)));
}

void write_text(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << content;
  if (!out) throw DataError(fmt::format("{}: cannot write file", path.string()));
}

void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
  write_text(path, j.dump(2) + "\n");
}

// Timestamps live in a side file so the primary outputs stay byte-stable.
void write_run_metadata(const RunConfig& config, std::string_view command,
                        Clock::time_point started) {
  write_json(config.output_dir / fmt::format("{}_metadata.json", command),
             {{"command", command},
              {"started_at", timestamp(started)},
              {"finished_at", timestamp(Clock::now())}});
}

LabeledDataset load_named(const std::filesystem::path& path, const ColumnMapping& schema,
                          bool labeled, std::string name) {
  LoadOptions opts;
  opts.labeled = labeled;
  opts.name = std::move(name);
  return load_dataset(path, schema, opts);
}

const std::filesystem::path& require_test_path(const RunConfig& config) {
  if (!config.test_path) throw ConfigError("paths.test is not set");
  return *config.test_path;
}

std::string list_ids(const std::vector<std::string>& ids) {
  constexpr std::size_t kShown = 10;
  std::string out;
  for (std::size_t i = 0; i < ids.size() && i < kShown; ++i) out += (i ? ", " : "") + ids[i];
  if (ids.size() > kShown) out += fmt::format(", ... ({} in total)", ids.size());
  return out;
}

}  // namespace

int cmd_stats(const RunConfig& config, std::ostream& log) {
  const auto started = Clock::now();
  std::vector<DatasetStats> stats;
  stats.push_back(dataset_stats(load_named(config.train_path, config.schema, true, "train")));
  if (config.test_path) {
    stats.push_back(dataset_stats(load_named(*config.test_path, config.schema, true, "test")));
  }
  const std::string text = render_stats_text(stats);
  write_text(config.output_dir / "stats.txt", text);
  write_json(config.output_dir / "stats.json", stats_to_json(stats));
  write_run_metadata(config, "stats", started);
  log << text;
  return 0;
}

int cmd_train(const RunConfig& config, std::ostream& log) {
  const auto started = Clock::now();
  // Configuration problems surface before any data is read or trained.
  const EncoderRegistry registry = build_registry(config.encoders);
  std::vector<BasicModel> untrained;
  for (const ModelConfig& m : config.models) untrained.push_back(build_model(m, registry));
  if (config.training.fine_tune_encoders) {
    throw ConfigError("training.fine_tune_encoders is not supported by the configured encoders");
  }

  const LabeledDataset data = load_named(config.train_path, config.schema, true, "train");
  const SplitResult parts = split(data, config.validation_fraction, config.seed);
  log << fmt::format("training on {} samples, validating on {}\n", parts.train.size(),
                     parts.validation.size());

  struct Outcome {
    std::optional<TrainedModel> model;
    std::string error;
  };
  auto run = [&](std::size_t k) {
    Outcome o;
    TrainConfig tc = config.training;
    tc.seed = config.model_seed(k);
    try {
      o.model = train(untrained[k], parts.train, parts.validation, tc);
      save_model(*o.model, config.output_dir / kModelTags[k]);
    } catch (const Error& e) {
      o.model.reset();
      o.error = e.what();
    }
    return o;
  };

  std::array<Outcome, 3> outcomes;
  if (config.parallel) {
    std::array<std::future<Outcome>, 3> jobs;
    for (std::size_t k = 0; k < 3; ++k) jobs[k] = std::async(std::launch::async, run, k);
    for (std::size_t k = 0; k < 3; ++k) outcomes[k] = jobs[k].get();
  } else {
    for (std::size_t k = 0; k < 3; ++k) outcomes[k] = run(k);
  }

  bool failed = false;
  for (std::size_t k = 0; k < 3; ++k) {
    if (outcomes[k].model) {
      const TrainingHistory& h = outcomes[k].model->history;
      log << fmt::format("{}: best validation accuracy {:.4f} at epoch {} of {}\n", kModelTags[k],
                         h.best_validation_accuracy, h.best_epoch, h.epochs.size());
    } else {
      failed = true;
      log << fmt::format("{}: training failed: {}\n", kModelTags[k], outcomes[k].error);
    }
  }
  write_json(config.output_dir / "run_config.json", config.to_json());
  write_run_metadata(config, "train", started);
  return failed ? 3 : 0;
}

int cmd_predict(const RunConfig& config, const PredictPaths& paths, std::ostream& log) {
  const auto started = Clock::now();
  const EncoderRegistry registry = build_registry(config.encoders);
  std::vector<TrainedModel> models;
  for (std::size_t k = 0; k < 3; ++k) {
    const std::filesystem::path dir =
        paths.model_dirs ? (*paths.model_dirs)[k] : config.output_dir / kModelTags[k];
    TrainedModel tm = load_model(dir, registry);
    if (to_json(tm.model.config()) != to_json(config.models[k])) {
      throw ConfigError(fmt::format("{}: model was trained with a different {} configuration",
                                    dir.string(), kModelTags[k]));
    }
    models.push_back(std::move(tm));
  }

  const std::filesystem::path input = paths.input ? *paths.input : require_test_path(config);
  const LabeledDataset ds = load_named(input, config.schema, false, "input");
  const std::vector<EnsembleRecord> records =
      ensemble_predict_batch(models[0], models[1], models[2], ds, config.parallel);

  const std::filesystem::path out = config.output_dir / "predictions";
  write_ensemble_tsv(records, out / "ensemble.tsv");
  write_submission(records, out / "submission.tsv");
  for (std::size_t k = 0; k < 3; ++k) {
    std::vector<std::pair<std::string, InferenceResult>> member;
    member.reserve(records.size());
    for (const EnsembleRecord& r : records) member.emplace_back(r.id, r.members[k]);
    write_predictions(member, out / fmt::format("{}.tsv", kModelTags[k]));
  }
  write_run_metadata(config, "predict", started);
  log << fmt::format("wrote {} predictions to {}\n", records.size(), out.string());
  return 0;
}

int cmd_evaluate(const RunConfig& config, const EvaluatePaths& paths, std::ostream& log) {
  const auto started = Clock::now();
  const std::filesystem::path pred_path =
      paths.predictions ? *paths.predictions : config.output_dir / "predictions" / "ensemble.tsv";
  const std::vector<EnsembleRow> rows = read_ensemble_tsv(pred_path);
  const std::filesystem::path gold_path = paths.gold ? *paths.gold : require_test_path(config);
  const LabeledDataset gold = load_named(gold_path, config.schema, true, "gold");

  std::unordered_map<std::string, const EnsembleRow*> by_id;
  for (const EnsembleRow& r : rows) {
    if (!by_id.emplace(r.id, &r).second) {
      throw DataError(fmt::format("{}: duplicate id '{}'", pred_path.string(), r.id));
    }
  }
  std::vector<std::string> missing_predictions, missing_gold;
  std::unordered_set<std::string> gold_ids;
  for (const Sample& s : gold) {
    gold_ids.insert(s.id);
    if (!by_id.count(s.id)) missing_predictions.push_back(s.id);
  }
  for (const EnsembleRow& r : rows) {
    if (!gold_ids.count(r.id)) missing_gold.push_back(r.id);
  }
  if (!missing_predictions.empty() || !missing_gold.empty()) {
    std::string msg = "predictions and gold labels do not cover the same ids";
    if (!missing_predictions.empty()) msg += "; no prediction for: " + list_ids(missing_predictions);
    if (!missing_gold.empty()) msg += "; no gold label for: " + list_ids(missing_gold);
    throw DataError(msg);
  }

  const std::array<std::string_view, 4> tags{kModelOneTag, kModelTwoTag, kModelThreeTag, kFinalTag};
  std::vector<SystemReport> systems;
  for (std::size_t t = 0; t < tags.size(); ++t) {
    std::vector<PredictionRecord> records;
    records.reserve(gold.size());
    for (const Sample& s : gold) {
      const EnsembleRow& r = *by_id.at(s.id);
      const int predicted = t == 0 ? r.votes.i1 : t == 1 ? r.votes.i2 : t == 2 ? r.votes.i3 : r.final.value;
      records.push_back({s.id, label_value(*s.label), predicted, s.source, s.language, std::string(tags[t])});
    }
    systems.push_back(evaluate_system(std::string(tags[t]), records, config.averaging));
  }

  const RenderedReport report = render_report(systems, {config.baseline});
  write_text(config.output_dir / "report.txt", report.text);
  write_json(config.output_dir / "report.json", report.document);
  write_run_metadata(config, "evaluate", started);
  log << report.text;
  return 0;
}

nlohmann::json desk_config_json(const std::filesystem::path& train, const std::filesystem::path& test,
                                const std::filesystem::path& output, std::uint64_t seed) {
  return {
      {"paths", {{"train", train.string()}, {"test", test.string()}, {"output", output.string()}}},
      {"schema", ColumnMapping{}.to_json()},
      {"encoders",
       {{{"name", "hash-english"}, {"type", "hash"}, {"dim", 64}, {"seed", 11}},
        {{"name", "hash-multilingual"}, {"type", "hash"}, {"dim", 64}, {"seed", 12}},
        {{"name", "hash-spanish"}, {"type", "hash"}, {"dim", 64}, {"seed", 13}}}},
      {"models",
       {{"model_one",
         {{"type", "concat_pair"}, {"encoder_a", "hash-english"}, {"encoder_b", "hash-multilingual"},
          {"hidden_sizes", {32}}, {"dropout", 0.1}, {"threshold", 0.5}}},
        {"model_two",
         {{"type", "concat_pair"}, {"encoder_a", "hash-english"}, {"encoder_b", "hash-spanish"},
          {"hidden_sizes", {32}}, {"dropout", 0.1}, {"threshold", 0.5}}},
        {"model_three",
         {{"type", "bilstm"}, {"encoder", "hash-multilingual"}, {"hidden_size", 16}, {"layers", 1},
          {"dropout", 0.0}, {"threshold", 0.5}}}}},
      {"training",
       {{"epochs", 200}, {"batch_size", 16}, {"learning_rate", 0.01}, {"optimizer", "adam"},
        {"early_stop_patience", 10}, {"gradient_clip", 5.0}}},
      {"validation_fraction", 0.2},
      {"evaluation", {{"averaging", "macro"}, {"baseline", false}}},
      {"parallel", false},
      {"seed", seed}};
}

int cmd_synth(const SynthOptions& options, std::ostream& log) {
  SyntheticOptions train_opts, test_opts;
  if (options.table1) {
    train_opts = table1_train_options(options.seed);
    test_opts = table1_test_options(options.seed + 1);
  } else {
    train_opts = balanced_options(options.per_cell, options.seed);
    train_opts.name = "train";
    train_opts.id_prefix = "train";
    test_opts = balanced_options(std::max<std::size_t>(1, options.per_cell / 2), options.seed + 1);
    test_opts.name = "test";
    test_opts.id_prefix = "test";
  }
  const LabeledDataset train_ds = generate_synthetic(train_opts);
  const LabeledDataset test_ds = generate_synthetic(test_opts);
  const auto& dir = options.output_dir;
  write_dataset(train_ds, dir / "train.tsv", ColumnMapping{});
  write_dataset(test_ds, dir / "test.tsv", ColumnMapping{});
  write_json(dir / "config.json", desk_config_json("train.tsv", "test.tsv", "run", options.seed));
  log << fmt::format("wrote {} training and {} test samples to {}\n", train_ds.size(),
                     test_ds.size(), dir.string());
  return 0;
}

}  // namespace trivote
