#include <cmath>

#include <gtest/gtest.h>

#include "test_support.hpp"
#include "trivote/error.hpp"
#include "trivote/models.hpp"
#include "trivote/networks.hpp"
#include "trivote/synthetic.hpp"


namespace trivote {
namespace {

using testing::read_file;
using testing::TempDir;
using testing::write_file;

// ||a - n|| / (||a|| + ||n||) over every parameter, plus the worst entry.
struct GradientCheck {
  double relative_error = 0.0;
  double max_abs_diff = 0.0;
};

template <typename Net, typename Input>
GradientCheck check_gradients(Net& net, const Input& x, double label, std::uint64_t dropout_seed,
                              bool use_dropout) {
  auto loss_at = [&](Parameters& scratch) {
    Rng rng(dropout_seed);
    scratch.set_zero();
    return net.accumulate_gradient(x, label, use_dropout ? &rng : nullptr, scratch);
  };
  Parameters analytic = net.parameters().zeros_like();
  loss_at(analytic);
  Parameters scratch = analytic.zeros_like();

  constexpr double h = 1e-6;
  double diff2 = 0.0, a2 = 0.0, n2 = 0.0, max_abs = 0.0;
  for (std::size_t t = 0; t < net.parameters().size(); ++t) {
    Eigen::MatrixXd& w = net.parameters()[t];
    for (Eigen::Index i = 0; i < w.size(); ++i) {
      const double saved = w.data()[i];
      w.data()[i] = saved + h;
      const double up = loss_at(scratch);
      w.data()[i] = saved - h;
      const double down = loss_at(scratch);
      w.data()[i] = saved;
      const double numeric = (up - down) / (2 * h);
      const double a = analytic[t].data()[i];
      diff2 += (a - numeric) * (a - numeric);
      a2 += a * a;
      n2 += numeric * numeric;
      max_abs = std::max(max_abs, std::abs(a - numeric));
    }
  }
  return {std::sqrt(diff2) / (std::sqrt(a2) + std::sqrt(n2)), max_abs};
}

Eigen::VectorXd random_vector(Rng& rng, int n) {
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v[i] = uniform(rng, -1.0, 1.0);
  return v;
}

Eigen::MatrixXd random_matrix(Rng& rng, int rows, int cols) {
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = uniform(rng, -1.0, 1.0);
  return m;
}

TEST(Losses, StableBinaryCrossEntropy) {
  EXPECT_NEAR(bce_with_logit(0.0, 1.0), std::log(2.0), 1e-15);
  EXPECT_NEAR(bce_with_logit(2.0, 0.0), -std::log(1.0 - sigmoid(2.0)), 1e-12);
  EXPECT_TRUE(std::isfinite(bce_with_logit(800.0, 0.0)));
  EXPECT_NEAR(bce_with_logit(-800.0, 0.0), 0.0, 1e-300);
  EXPECT_EQ(sigmoid(0.0), 0.5);
}

TEST(FeedForwardNet, GradientsMatchFiniteDifferences) {
  Rng rng(1);
  for (auto hidden : {std::vector<int>{}, std::vector<int>{5}, std::vector<int>{8, 4}}) {
    FeedForwardNet net(6, hidden, 0.0);
    net.initialize(rng);
    for (double label : {0.0, 1.0}) {
      const GradientCheck g = check_gradients(net, random_vector(rng, 6), label, 0, false);
      EXPECT_LT(g.relative_error, 1e-4) << hidden.size() << " hidden layers";
      EXPECT_LT(g.max_abs_diff, 1e-6);
    }
  }
}

TEST(FeedForwardNet, GradientsWithFixedDropoutMask) {
  Rng rng(2);
  FeedForwardNet net(8, {8, 6}, 0.3);
  net.initialize(rng);
  const GradientCheck g = check_gradients(net, random_vector(rng, 8), 1.0, 42, true);
  EXPECT_LT(g.relative_error, 1e-4);
}

TEST(FeedForwardNet, LayoutAndInference) {
  FeedForwardNet net(128, {16}, 0.1);
  Rng rng(3);
  net.initialize(rng);
  ASSERT_EQ(net.parameters().size(), 4u);
  EXPECT_EQ(net.parameters()[0].cols(), 128);
  EXPECT_EQ(net.parameters()[2].rows(), 1);
  EXPECT_TRUE(net.parameters()[1].isZero());
  Parameters grads = net.parameters().zeros_like();
  const Eigen::VectorXd x = random_vector(rng, 128);
  const double loss = net.accumulate_gradient(x, 1.0, nullptr, grads);
  EXPECT_NEAR(loss, bce_with_logit(net.logit(x), 1.0), 1e-12);
}

TEST(BiLstmNet, GradientsMatchFiniteDifferences) {
  Rng rng(4);
  for (int layers : {1, 2}) {
    BiLstmNet net(5, 4, layers, 0.0);
    net.initialize(rng);
    for (int length : {1, 3, 6}) {
      const GradientCheck g = check_gradients(net, random_matrix(rng, length, 5), length % 2, 0, false);
      EXPECT_LT(g.relative_error, 1e-4) << layers << " layers, length " << length;
      EXPECT_LT(g.max_abs_diff, 1e-6);
    }
  }
}

TEST(BiLstmNet, GradientsAtMaximumToySize) {
  Rng rng(5);
  BiLstmNet net(8, 8, 1, 0.0);
  net.initialize(rng);
  const GradientCheck g = check_gradients(net, random_matrix(rng, 5, 8), 1.0, 0, false);
  EXPECT_LT(g.relative_error, 1e-4);
}

TEST(BiLstmNet, GradientsWithFixedDropoutMask) {
  Rng rng(6);
  BiLstmNet net(4, 3, 2, 0.25);
  net.initialize(rng);
  const GradientCheck g = check_gradients(net, random_matrix(rng, 4, 4), 0.0, 9, true);
  EXPECT_LT(g.relative_error, 1e-4);
}

TEST(BiLstmNet, LayoutAndForgetBias) {
  BiLstmNet net(6, 3, 1, 0.0);
  Rng rng(7);
  net.initialize(rng);
  EXPECT_EQ(net.classifier_input_width(), 6);
  EXPECT_EQ(net.parameters().name(0), "lstm0.fwd.wx");
  // Gate order i, f, g, o: the forget block of the bias starts at row hidden.
  const Eigen::MatrixXd& bias = net.parameters()[2];
  EXPECT_EQ(bias.rows(), 12);
  EXPECT_EQ(bias(3, 0), 1.0);
  EXPECT_EQ(bias(0, 0), 0.0);
  const double p = sigmoid(net.logit(random_matrix(rng, 1, 6)));
  EXPECT_GE(p, 0.0);
  EXPECT_LE(p, 1.0);
}

// Encoder stub that only offers token sequences.
class TokenOnlyEncoder final : public Encoder {
 public:
  TokenOnlyEncoder() : spec_{"tokens-only", EncoderKind::kToken, 4, 16} {}
  const EncoderSpec& spec() const override { return spec_; }
  std::string version() const override { return "stub"; }
  SentenceEmbedding encode_sentence(std::string_view) const override {
    throw ConfigError("no sentence embeddings");
  }
  TokenEmbeddingSequence encode_tokens(std::string_view) const override {
    return {Eigen::MatrixXd::Ones(1, 4), {true}};
  }

 private:
  EncoderSpec spec_;
};

constexpr int kHashDim = 32;

EncoderRegistry test_registry() {
  EncoderDefinition a{"hash-a", "hash", kHashDim, 1, 128, {}, BertPooling::kCls};
  EncoderDefinition b{"hash-b", "hash", kHashDim, 2, 128, {}, BertPooling::kCls};
  EncoderRegistry reg = build_registry({a, b});
  reg.add(std::make_shared<TokenOnlyEncoder>());
  return reg;
}

ConcatPairConfig small_pair() {
  ConcatPairConfig c;
  c.encoder_a = "hash-a";
  c.encoder_b = "hash-b";
  c.hidden_sizes = {8};
  return c;
}

BiLstmConfig small_lstm() {
  BiLstmConfig c;
  c.encoder = "hash-a";
  c.hidden_size = 6;
  c.dropout = 0.0;
  return c;
}

TrainConfig quick_training(std::uint64_t seed) {
  TrainConfig tc;
  tc.epochs = 40;
  tc.batch_size = 16;
  tc.learning_rate = 0.01;
  tc.optimizer = OptimizerKind::kAdam;
  tc.early_stop_patience = 0;
  tc.seed = seed;
  return tc;
}

struct ToyData {
  LabeledDataset train, validation;
};

ToyData toy_data(std::size_t per_cell, std::uint64_t seed) {
  const SplitResult s = split(generate_synthetic(balanced_options(per_cell, seed)), 0.25, seed);
  return {s.train, s.validation};
}

TEST(BuildModel, WidthLaws) {
  const EncoderRegistry reg = test_registry();
  ConcatPairConfig pair;
  pair.encoder_a = "hash-test";
  pair.encoder_b = "hash-test";
  EXPECT_EQ(build_concat_pair(pair, reg).head_input_width(), 128);
  BiLstmConfig lstm;
  lstm.encoder = "hash-test";
  lstm.hidden_size = 256;
  const BasicModel m = build_bilstm(lstm, reg);
  EXPECT_EQ(m.head_input_width(), 512);
  EXPECT_EQ(m.architecture(), Architecture::kBiLstm);
  EXPECT_EQ(m.encoder_versions().at("hash-test"), "hash-v1;dim=64;seed=0;max_tokens=128");
}

TEST(BuildModel, RejectsUnknownOrWrongKindEncoders) {
  const EncoderRegistry reg = test_registry();
  ConcatPairConfig pair = small_pair();
  pair.encoder_b = "english-bert";
  EXPECT_THROW(build_concat_pair(pair, reg), ConfigError);
  pair.encoder_b = "tokens-only";
  EXPECT_THROW(build_concat_pair(pair, reg), ConfigError);
  BiLstmConfig lstm = small_lstm();
  lstm.encoder = "tokens-only";
  EXPECT_NO_THROW(build_bilstm(lstm, reg));
  lstm.encoder = "missing";
  EXPECT_THROW(build_bilstm(lstm, reg), ConfigError);
}

TEST(ModelConfig, JsonRoundTripAndValidation) {
  const ModelConfig pair = small_pair();
  EXPECT_EQ(to_json(model_config_from_json(to_json(pair))), to_json(pair));
  const ModelConfig lstm = small_lstm();
  EXPECT_EQ(to_json(model_config_from_json(to_json(lstm))), to_json(lstm));
  EXPECT_THROW(model_config_from_json({{"type", "cnn"}}), ConfigError);
  nlohmann::json bad = to_json(pair);
  bad["threshold"] = 1.0;
  EXPECT_THROW(model_config_from_json(bad), ConfigError);
  bad = to_json(lstm);
  bad["dropout"] = 1.0;
  EXPECT_THROW(model_config_from_json(bad), ConfigError);
  EXPECT_THROW(TrainConfig::from_json({{"epochs", 0}}), ConfigError);
  EXPECT_THROW(TrainConfig::from_json({{"optimizer", "rmsprop"}}), ConfigError);
  const TrainConfig tc = quick_training(3);
  EXPECT_EQ(TrainConfig::from_json(tc.to_json()).to_json(), tc.to_json());
}

TEST(Train, SameSeedSameParameters) {
  const EncoderRegistry reg = test_registry();
  const ToyData data = toy_data(20, 1);
  for (const ModelConfig& cfg : {ModelConfig(small_pair()), ModelConfig(small_lstm())}) {
    TrainConfig tc = quick_training(5);
    tc.epochs = 5;
    const TrainedModel a = train(build_model(cfg, reg), data.train, data.validation, tc);
    const TrainedModel b = train(build_model(cfg, reg), data.train, data.validation, tc);
    EXPECT_EQ(a.parameter_checksum(), b.parameter_checksum());
    tc.seed = 6;
    const TrainedModel c = train(build_model(cfg, reg), data.train, data.validation, tc);
    EXPECT_NE(a.parameter_checksum(), c.parameter_checksum());
  }
}

TEST(Train, InitialLossNearLogTwo) {
  const EncoderRegistry reg = test_registry();
  const ToyData data = toy_data(25, 2);
  for (const ModelConfig& cfg : {ModelConfig(small_pair()), ModelConfig(small_lstm())}) {
    TrainConfig tc = quick_training(11);
    tc.epochs = 1;
    const TrainedModel tm = train(build_model(cfg, reg), data.train, data.validation, tc);
    EXPECT_NEAR(tm.history.initial_train_loss, std::log(2.0), 0.15);
  }
}

TEST(Train, LearnsSeparableData) {
  const EncoderRegistry reg = test_registry();
  const ToyData data = toy_data(100, 3);
  for (const ModelConfig& cfg : {ModelConfig(small_pair()), ModelConfig(small_lstm())}) {
    const TrainedModel tm = train(build_model(cfg, reg), data.train, data.validation, quick_training(1));
    EXPECT_GE(tm.history.best_validation_accuracy, 0.95);
    EXPECT_LT(tm.history.epochs.back().train_loss, tm.history.initial_train_loss);
  }
}

TEST(Train, RestoresBestEpoch) {
  const EncoderRegistry reg = test_registry();
  const ToyData data = toy_data(20, 4);
  TrainConfig tc = quick_training(2);
  tc.epochs = 15;
  tc.learning_rate = 0.05;
  const TrainedModel tm = train(build_model(small_pair(), reg), data.train, data.validation, tc);
  const EpochRecord& best = tm.history.epochs.at(tm.history.best_epoch - 1);
  EXPECT_EQ(best.validation_accuracy, tm.history.best_validation_accuracy);
  for (int e = 0; e < tm.history.best_epoch - 1; ++e) {
    EXPECT_LT(tm.history.epochs[e].validation_accuracy, tm.history.best_validation_accuracy);
  }
  std::size_t correct = 0;
  for (const Sample& s : data.validation) correct += predict(tm, s.text).label == label_value(*s.label);
  EXPECT_DOUBLE_EQ(static_cast<double>(correct) / data.validation.size(),
                   tm.history.best_validation_accuracy);
}

TEST(Train, EarlyStopsOnStagnantValidation) {
  const EncoderRegistry reg = test_registry();
  const ToyData data = toy_data(10, 5);
  TrainConfig tc = quick_training(3);
  tc.optimizer = OptimizerKind::kSgd;
  tc.learning_rate = 1e-12;
  tc.epochs = 20;
  tc.early_stop_patience = 2;
  const TrainedModel tm = train(build_model(small_pair(), reg), data.train, data.validation, tc);
  EXPECT_TRUE(tm.history.stopped_early);
  EXPECT_EQ(tm.history.epochs.size(), 3u);
  EXPECT_EQ(tm.history.best_epoch, 1);
}

TEST(Train, Errors) {
  const EncoderRegistry reg = test_registry();
  const ToyData data = toy_data(10, 6);
  const LabeledDataset empty("empty", {}, true);
  EXPECT_THROW(train(build_model(small_pair(), reg), empty, data.validation, quick_training(1)),
               DataError);
  TrainConfig tc = quick_training(1);
  tc.fine_tune_encoders = true;
  EXPECT_THROW(train(build_model(small_pair(), reg), data.train, data.validation, tc), ConfigError);

  tc = quick_training(1);
  tc.optimizer = OptimizerKind::kSgd;
  tc.learning_rate = 1e308;
  tc.gradient_clip = 0.0;
  EXPECT_THROW(train(build_model(small_pair(), reg), data.train, data.validation, tc), TrainingError);
}

TEST(Predict, ThresholdTieRule) {
  EXPECT_EQ(threshold_label(0.73, 0.5), 1);
  EXPECT_EQ(threshold_label(0.5, 0.5), 1);
  EXPECT_EQ(threshold_label(0.4999999, 0.5), 0);
}

class TrainedFixture : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    registry_ = new EncoderRegistry(test_registry());
    data_ = new ToyData(toy_data(30, 7));
    TrainConfig tc = quick_training(4);
    tc.epochs = 10;
    pair_ = new TrainedModel(train(build_model(small_pair(), *registry_), data_->train, data_->validation, tc));
    lstm_ = new TrainedModel(train(build_model(small_lstm(), *registry_), data_->train, data_->validation, tc));
  }
  static void TearDownTestSuite() {
    delete pair_;
    delete lstm_;
    delete data_;
    delete registry_;
  }
  static EncoderRegistry* registry_;
  static ToyData* data_;
  static TrainedModel* pair_;
  static TrainedModel* lstm_;
};
EncoderRegistry* TrainedFixture::registry_ = nullptr;
ToyData* TrainedFixture::data_ = nullptr;
TrainedModel* TrainedFixture::pair_ = nullptr;
TrainedModel* TrainedFixture::lstm_ = nullptr;

TEST_F(TrainedFixture, PredictIsDeterministicAndBounded) {
  for (const TrainedModel* tm : {pair_, lstm_}) {
    const InferenceResult a = predict(*tm, "mujer en la cocina");
    const InferenceResult b = predict(*tm, "mujer en la cocina");
    EXPECT_EQ(a.probability, b.probability);
    EXPECT_GE(a.probability, 0.0);
    EXPECT_LE(a.probability, 1.0);
    EXPECT_EQ(a.label, threshold_label(a.probability, 0.5));
    const InferenceResult single = predict(*tm, "x");
    EXPECT_GE(single.probability, 0.0);
    EXPECT_LE(single.probability, 1.0);
    EXPECT_THROW(predict(*tm, "   "), DataError);
  }
}

TEST_F(TrainedFixture, BatchMatchesSinglePredictions) {
  const LabeledDataset& ds = data_->train;
  ASSERT_GE(ds.size(), 50u);
  std::vector<Sample> first(ds.begin(), ds.begin() + 50);
  const LabeledDataset fifty("fifty", first, true);
  for (const TrainedModel* tm : {pair_, lstm_}) {
    const auto batch = predict_batch(*tm, fifty);
    ASSERT_EQ(batch.size(), 50u);
    for (std::size_t i = 0; i < 50; ++i) {
      EXPECT_EQ(batch[i].first, fifty[i].id);
      EXPECT_EQ(batch[i].second.probability, predict(*tm, fifty[i].text).probability);
    }
    EXPECT_EQ(predict_batch(*tm, LabeledDataset("one", {first[0]}, true)).size(), 1u);
    EXPECT_THROW(predict_batch(*tm, LabeledDataset("none", {}, false)), DataError);
  }
}

TEST_F(TrainedFixture, SaveLoadRoundTrip) {
  TempDir dir;
  for (const TrainedModel* tm : {pair_, lstm_}) {
    save_model(*tm, dir / "m");
    const TrainedModel back = load_model(dir / "m", *registry_);
    EXPECT_EQ(back.parameter_checksum(), tm->parameter_checksum());
    EXPECT_EQ(back.history.to_json(), tm->history.to_json());
    EXPECT_EQ(to_json(back.model.config()), to_json(tm->model.config()));
    EXPECT_EQ(predict(back, "hola mujer").probability, predict(*tm, "hola mujer").probability);
    const std::string manifest = read_file(dir / "m" / "manifest.json");
    EXPECT_NE(manifest.find("\"version\": \"hash-v1;dim=32;seed=1;max_tokens=128\""), std::string::npos) << manifest;
  }
}

TEST_F(TrainedFixture, LoadRefusesEncoderDriftAndCorruption) {
  TempDir dir;
  save_model(*pair_, dir / "m");

  EncoderDefinition drifted{"hash-a", "hash", kHashDim, 99, 128, {}, BertPooling::kCls};
  EncoderDefinition b{"hash-b", "hash", kHashDim, 2, 128, {}, BertPooling::kCls};
  EXPECT_THROW(load_model(dir / "m", build_registry({drifted, b})), ConfigError);
  EXPECT_THROW(load_model(dir / "m", build_registry({b})), ConfigError);

  std::string blob = read_file(dir / "m" / "parameters.bin");
  blob[3] = static_cast<char>(blob[3] ^ 0x55);
  write_file(dir / "m" / "parameters.bin", blob);
  EXPECT_THROW(load_model(dir / "m", *registry_), DataError);
  EXPECT_THROW(load_model(dir / "nowhere", *registry_), DataError);
}

TEST_F(TrainedFixture, WritesPredictionTsv) {
  TempDir dir;
  write_predictions({{"a", {0.25, 0}}, {"b", {0.5, 1}}}, dir / "p.tsv");
  EXPECT_EQ(read_file(dir / "p.tsv"), "id\tprobability\tlabel\na\t0.250000000\t0\nb\t0.500000000\t1\n");
}

}  // namespace
}  // namespace trivote
