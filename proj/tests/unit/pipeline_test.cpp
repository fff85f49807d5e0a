#include <cstdlib>
#include <sstream>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>
#include <sys/wait.h>

#include "test_support.hpp"
#include "trivote/error.hpp"
#include "trivote/pipeline.hpp"
#include "trivote/synthetic.hpp"
#include "trivote/voting.hpp"

namespace trivote {
namespace {

using testing::read_file;
using testing::source_dir;
using testing::TempDir;
using testing::write_file;

struct CliResult {
  int exit_code = -1;
  std::string output;
};

CliResult run_cli(const std::string& args, const TempDir& dir) {
  const auto log = dir / "cli.log";
  const std::string cmd = std::string(TRIVOTE_CLI) + " " + args + " > '" + log.string() + "' 2>&1";
  const int status = std::system(cmd.c_str());
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, read_file(log)};
}

// Small, quick desk configuration over a synthetic corpus in `dir`.
nlohmann::json small_config(const TempDir& dir, std::size_t per_cell = 40) {
  SyntheticOptions train = balanced_options(per_cell, 1);
  train.name = "train";
  SyntheticOptions test = balanced_options(10, 2);
  test.id_prefix = "test";
  write_dataset(generate_synthetic(train), dir / "train.tsv", ColumnMapping{});
  write_dataset(generate_synthetic(test), dir / "test.tsv", ColumnMapping{});
  nlohmann::json j = desk_config_json("train.tsv", "test.tsv", "run", 3);
  j["training"]["epochs"] = 8;
  j["models"]["model_one"]["hidden_sizes"] = {8};
  j["models"]["model_two"]["hidden_sizes"] = {8};
  j["models"]["model_three"]["hidden_size"] = 4;
  return j;
}

RunConfig save_and_load(const TempDir& dir, const nlohmann::json& j, const std::string& name = "config.json") {
  write_file(dir / name, j.dump(2));
  return RunConfig::load(dir / name);
}

TEST(RunConfig, ResolvesPathsAndDefaults) {
  TempDir dir;
  const RunConfig c = save_and_load(dir, small_config(dir));
  EXPECT_EQ(c.train_path, dir / "train.tsv");
  EXPECT_EQ(c.output_dir, dir / "run");
  EXPECT_EQ(c.averaging, Averaging::kMacro);
  EXPECT_EQ(c.model_seed(2), 5u);
  EXPECT_EQ(c.encoders.size(), 3u);
  EXPECT_EQ(RunConfig::from_json(c.to_json(), "/").to_json(), c.to_json());
}

TEST(RunConfig, RejectsBadConfigs) {
  TempDir dir;
  nlohmann::json j = small_config(dir);
  j["models"].erase("model_two");
  EXPECT_THROW(save_and_load(dir, j), ConfigError);
  j = small_config(dir);
  j["evaluation"]["averaging"] = "weighted";
  EXPECT_THROW(save_and_load(dir, j), ConfigError);
  j = small_config(dir);
  j["validation_fraction"] = 1.5;
  EXPECT_THROW(save_and_load(dir, j), ConfigError);
  write_file(dir / "broken.json", "{ not json");
  EXPECT_THROW(RunConfig::load(dir / "broken.json"), ConfigError);
  EXPECT_THROW(RunConfig::load(dir / "absent.json"), ConfigError);
}

TEST(CmdStats, TableOneFixture) {
  TempDir dir;
  nlohmann::json j = desk_config_json(source_dir() / "data" / "table1" / "train.tsv",
                                      source_dir() / "data" / "table1" / "test.tsv", dir.path(), 1);
  const RunConfig c = save_and_load(dir, j);
  std::ostringstream log;
  EXPECT_EQ(cmd_stats(c, log), 0);
  EXPECT_NE(log.str().find("train        total                 6977"), std::string::npos) << log.str();
  EXPECT_NE(log.str().find("test         total                 4368"), std::string::npos);
  const auto stats = nlohmann::json::parse(read_file(dir / "stats.json"));
  EXPECT_EQ(stats.at("totals").at("train"), 6977);
  EXPECT_EQ(stats.at("totals").at("test"), 4368);
  EXPECT_EQ(read_file(dir / "stats.txt"), log.str());
}

TEST(CmdStats, EmptyFileAndMissingFile) {
  TempDir dir;
  write_file(dir / "empty.tsv", "id\tlanguage\ttext\tlabel\n");
  nlohmann::json j = small_config(dir);
  j["paths"]["train"] = "empty.tsv";
  j["paths"].erase("test");
  std::ostringstream log;
  EXPECT_EQ(cmd_stats(save_and_load(dir, j), log), 0);
  EXPECT_NE(log.str().find("total                 0"), std::string::npos) << log.str();

  j["paths"]["train"] = "nowhere.tsv";
  save_and_load(dir, j);
  const CliResult r = run_cli("stats --config '" + (dir / "config.json").string() + "'", dir);
  EXPECT_EQ(r.exit_code, 2);
  EXPECT_NE(r.output.find("nowhere.tsv"), std::string::npos) << r.output;
}

TEST(Cli, UsageErrorsExitOne) {
  TempDir dir;
  EXPECT_EQ(run_cli("", dir).exit_code, 1);
  EXPECT_EQ(run_cli("frobnicate", dir).exit_code, 1);
  EXPECT_EQ(run_cli("train", dir).exit_code, 1);
  EXPECT_EQ(run_cli("train --config '" + (dir / "missing.json").string() + "'", dir).exit_code, 1);
  EXPECT_EQ(run_cli("--help", dir).exit_code, 0);
}

TEST(CmdTrain, UnknownEncoderFailsBeforeTraining) {
  TempDir dir;
  nlohmann::json j = small_config(dir);
  j["models"]["model_three"]["encoder"] = "no-such";
  const RunConfig c = save_and_load(dir, j);
  std::ostringstream log;
  EXPECT_THROW(cmd_train(c, log), ConfigError);
  EXPECT_FALSE(std::filesystem::exists(dir / "run" / "model_one"));
  const CliResult r = run_cli("train --config '" + (dir / "config.json").string() + "'", dir);
  EXPECT_EQ(r.exit_code, 1);
  EXPECT_NE(r.output.find("no-such"), std::string::npos) << r.output;
}

TEST(CmdTrain, DivergentTrainingExitsThree) {
  TempDir dir;
  nlohmann::json j = small_config(dir);
  j["training"]["optimizer"] = "sgd";
  j["training"]["learning_rate"] = 1e308;
  j["training"]["gradient_clip"] = 0.0;
  const RunConfig c = save_and_load(dir, j);
  std::ostringstream log;
  EXPECT_EQ(cmd_train(c, log), 3);
  for (std::string_view tag : kModelTags) {
    EXPECT_NE(log.str().find(std::string(tag) + ": training failed"), std::string::npos) << log.str();
  }
}

class PipelineRun : public ::testing::Test {
 protected:
  void SetUp() override { config_ = save_and_load(dir_, small_config(dir_)); }
  TempDir dir_;
  RunConfig config_;
};

TEST_F(PipelineRun, TrainPredictEvaluate) {
  std::ostringstream log;
  ASSERT_EQ(cmd_train(config_, log), 0) << log.str();
  for (std::string_view tag : kModelTags) {
    const auto manifest = nlohmann::json::parse(read_file(config_.output_dir / tag / "manifest.json"));
    EXPECT_FALSE(manifest.at("history").at("epochs").empty());
    EXPECT_TRUE(manifest.at("history").at("epochs")[0].contains("validation_accuracy"));
  }
  EXPECT_TRUE(std::filesystem::exists(config_.output_dir / "run_config.json"));

  ASSERT_EQ(cmd_predict(config_, {}, log), 0);
  const auto rows = read_ensemble_tsv(config_.output_dir / "predictions" / "ensemble.tsv");
  ASSERT_EQ(rows.size(), 40u);
  for (const auto& r : rows) EXPECT_EQ(r.final, majority_vote(r.votes));
  const std::string submission = read_file(config_.output_dir / "predictions" / "submission.tsv");
  EXPECT_EQ(std::count(submission.begin(), submission.end(), '\n'), 40);
  EXPECT_TRUE(std::filesystem::exists(config_.output_dir / "predictions" / "model_three.tsv"));

  std::ostringstream report;
  ASSERT_EQ(cmd_evaluate(config_, {}, report), 0);
  const auto doc = nlohmann::json::parse(read_file(config_.output_dir / "report.json"));
  for (const char* tag : {"model_one", "model_two", "model_three", "final"}) {
    EXPECT_EQ(doc.at("models").at(tag).at("overall").at("n"), 40);
    EXPECT_EQ(doc.at("models").at(tag).at("by_source").size(), 2u);
  }
  EXPECT_NE(report.str().find("Evaluation Results by Language"), std::string::npos);
}

TEST_F(PipelineRun, PredictOnUnlabeledInputAndRowErrors) {
  std::ostringstream log;
  ASSERT_EQ(cmd_train(config_, log), 0);
  std::string input = "id\tlanguage\ttext\n";
  for (int i = 0; i < 10; ++i) input += "u" + std::to_string(i) + "\ten\tsome words " + std::to_string(i) + "\n";
  write_file(dir_ / "unlabeled.tsv", input);
  PredictPaths paths;
  paths.input = dir_ / "unlabeled.tsv";
  ASSERT_EQ(cmd_predict(config_, paths, log), 0);
  const auto rows = read_ensemble_tsv(config_.output_dir / "predictions" / "ensemble.tsv");
  ASSERT_EQ(rows.size(), 10u);
  EXPECT_EQ(rows[3].id, "u3");

  write_file(dir_ / "blank.tsv", "id\tlanguage\ttext\nok\ten\tfine\nbad-row\ten\t  \n");
  paths.input = dir_ / "blank.tsv";
  try {
    cmd_predict(config_, paths, log);
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("bad-row"), std::string::npos) << e.what();
  }
}

TEST_F(PipelineRun, PredictRefusesEncoderDrift) {
  std::ostringstream log;
  ASSERT_EQ(cmd_train(config_, log), 0);
  nlohmann::json j = small_config(dir_);
  j["encoders"][0]["seed"] = 1234;
  const RunConfig drifted = save_and_load(dir_, j, "drifted.json");
  EXPECT_THROW(cmd_predict(drifted, {}, log), ConfigError);

  j = small_config(dir_);
  j["models"]["model_one"]["threshold"] = 0.7;
  EXPECT_THROW(cmd_predict(save_and_load(dir_, j, "changed.json"), {}, log), ConfigError);
}

TEST_F(PipelineRun, SameSeedSameOutputs) {
  std::ostringstream log;
  ASSERT_EQ(cmd_train(config_, log), 0);
  ASSERT_EQ(cmd_predict(config_, {}, log), 0);
  ASSERT_EQ(cmd_evaluate(config_, {}, log), 0);
  const auto first_dir = config_.output_dir;

  RunConfig again = config_;
  again.output_dir = dir_ / "run-again";
  again.parallel = true;
  ASSERT_EQ(cmd_train(again, log), 0);
  ASSERT_EQ(cmd_predict(again, {}, log), 0);
  ASSERT_EQ(cmd_evaluate(again, {}, log), 0);
  for (std::string_view tag : kModelTags) {
    EXPECT_EQ(read_file(first_dir / tag / "parameters.bin"), read_file(again.output_dir / tag / "parameters.bin"));
    EXPECT_EQ(read_file(first_dir / tag / "manifest.json"), read_file(again.output_dir / tag / "manifest.json"));
  }
  for (const char* f : {"ensemble.tsv", "submission.tsv", "model_one.tsv", "model_two.tsv", "model_three.tsv"}) {
    EXPECT_EQ(read_file(first_dir / "predictions" / f), read_file(again.output_dir / "predictions" / f)) << f;
  }
  EXPECT_EQ(read_file(first_dir / "report.json"), read_file(again.output_dir / "report.json"));
}

TEST(CmdEvaluate, KnownConfusionAndJoinErrors) {
  TempDir dir;
  nlohmann::json j = small_config(dir);
  write_file(dir / "gold.tsv",
             "id\tsource\tlanguage\ttext\tlabel\n"
             "a\ttwitter\ten\tx\tsexist\n"
             "b\tgab\ten\tx\tnon-sexist\n"
             "c\ttwitter\tes\tx\tsexist\n"
             "d\tgab\tes\tx\tnon-sexist\n");
  // final: a, c, d right. i1: a, d right. i3: c, d right.
  write_file(dir / "pred.tsv",
             "id\ti1\ti2\ti3\tfinal\n"
             "a\t1\t1\t0\t1\n"
             "b\t1\t1\t1\t1\n"
             "c\t0\t1\t1\t1\n"
             "d\t0\t0\t0\t0\n");
  const RunConfig c = save_and_load(dir, j);
  EvaluatePaths paths{dir / "pred.tsv", dir / "gold.tsv"};
  std::ostringstream log;
  ASSERT_EQ(cmd_evaluate(c, paths, log), 0);
  const auto doc = nlohmann::json::parse(read_file(c.output_dir / "report.json"));
  EXPECT_EQ(doc.at("models").at("final").at("overall").at("accuracy"), 0.75);
  EXPECT_EQ(doc.at("models").at("model_one").at("overall").at("accuracy"), 0.5);
  EXPECT_EQ(doc.at("models").at("model_three").at("overall").at("accuracy"), 0.5);
  EXPECT_EQ(doc.at("models").at("final").at("by_source").at("gab").at("accuracy"), 0.5);
  EXPECT_EQ(doc.at("models").at("final").at("by_language").at("es").at("accuracy"), 1.0);

  write_file(dir / "other.tsv", "id\ti1\ti2\ti3\tfinal\nz\t1\t1\t1\t1\n");
  paths.predictions = dir / "other.tsv";
  try {
    cmd_evaluate(c, paths, log);
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("a, b, c, d"), std::string::npos) << msg;
    EXPECT_NE(msg.find("z"), std::string::npos) << msg;
  }
}

TEST(CmdEvaluate, BaselineFlagAddsPublishedColumns) {
  TempDir dir;
  write_file(dir / "gold.tsv", "id\tsource\tlanguage\ttext\tlabel\na\ttwitter\ten\tx\t1\nb\tgab\tes\ty\t0\n");
  write_file(dir / "pred.tsv", "id\ti1\ti2\ti3\tfinal\na\t1\t1\t0\t1\nb\t0\t0\t1\t0\n");
  save_and_load(dir, small_config(dir));
  const std::string base = "evaluate --config '" + (dir / "config.json").string() + "' --predictions '" +
                           (dir / "pred.tsv").string() + "' --gold '" + (dir / "gold.tsv").string() + "'";
  CliResult r = run_cli(base, dir);
  EXPECT_EQ(r.exit_code, 0) << r.output;
  EXPECT_EQ(r.output.find("0,7553"), std::string::npos);
  r = run_cli(base + " --baseline", dir);
  EXPECT_EQ(r.exit_code, 0) << r.output;
  for (const char* v : {"0,7553", "0,7551", "0,7719", "0,7504", "0,7559", "0,7546"}) {
    EXPECT_NE(r.output.find(v), std::string::npos) << v;
  }
}

TEST(CmdSynth, WritesRunnableConfig) {
  TempDir dir;
  const CliResult r = run_cli("synth --out '" + (dir / "s").string() + "' --per-cell 12", dir);
  ASSERT_EQ(r.exit_code, 0) << r.output;
  const RunConfig c = RunConfig::load(dir / "s" / "config.json");
  std::ostringstream log;
  EXPECT_EQ(cmd_stats(c, log), 0);
  EXPECT_NE(log.str().find("train        total                 48"), std::string::npos) << log.str();
}

}  // namespace
}  // namespace trivote
