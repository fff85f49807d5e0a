#ifndef TRIVOTE_MODELS_HPP
#define TRIVOTE_MODELS_HPP

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "trivote/corpus.hpp"
#include "trivote/encoders.hpp"
#include "trivote/networks.hpp"
#include "trivote/optimizer.hpp"

namespace trivote {

enum class Architecture { kConcatPair, kBiLstm };

std::string_view to_string(Architecture a);

// Two sentence encoders whose embeddings are concatenated and fed to a
// feed-forward head.
struct ConcatPairConfig {
  std::string encoder_a;
  std::string encoder_b;
  std::vector<int> hidden_sizes{256};
  double dropout = 0.1;
  double threshold = 0.5;

  static ConcatPairConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

// One token encoder feeding a bidirectional LSTM.
struct BiLstmConfig {
  std::string encoder;
  int hidden_size = 256;
  int layers = 1;
  double dropout = 0.1;
  double threshold = 0.5;

  static BiLstmConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

using ModelConfig = std::variant<ConcatPairConfig, BiLstmConfig>;

// Reads {"type": "concat_pair" | "bilstm", ...}.
ModelConfig model_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ModelConfig& c);

struct TrainConfig {
  int epochs = 20;
  int batch_size = 32;
  double learning_rate = 0.01;
  std::uint64_t seed = 0;
  // Stop after this many epochs without a validation-accuracy improvement;
  // 0 disables early stopping.
  int early_stop_patience = 3;
  OptimizerKind optimizer = OptimizerKind::kSgd;
  // Rescale each batch gradient to at most this global L2 norm; 0 disables.
  double gradient_clip = 5.0;
  // Train encoder weights as well. Only encoders with trainable parameters
  // can honor this; none of the bundled encoders do.
  bool fine_tune_encoders = false;

  static TrainConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0.0;
  double validation_loss = 0.0;
  double validation_accuracy = 0.0;
};

struct TrainingHistory {
  // Mean loss over the training set before the first update.
  double initial_train_loss = 0.0;
  std::vector<EpochRecord> epochs;
  int best_epoch = 0;
  double best_validation_accuracy = 0.0;
  bool stopped_early = false;

  nlohmann::json to_json() const;
  static TrainingHistory from_json(const nlohmann::json& j);
};

struct InferenceResult {
  double probability = 0.0;
  int label = 0;
};

// label = 1 iff probability >= threshold.
inline int threshold_label(double probability, double threshold) {
  return probability >= threshold ? 1 : 0;
}

// A basic classifier: frozen encoder(s) plus a trainable head.
class BasicModel {
 public:
  Architecture architecture() const;
  const ModelConfig& config() const { return config_; }
  double threshold() const;
  const std::vector<EncoderHandle>& encoders() const { return encoders_; }
  // Name -> version for each encoder.
  std::map<std::string, std::string> encoder_versions() const;

  // Width of the first feed-forward layer (concat pair) or of the classifier
  // input (2 x hidden for the BiLSTM).
  int head_input_width() const;

  // Normalizes the text and runs the encoder(s). Throws DataError for text
  // that is empty after normalization.
  Features featurize(std::string_view text) const;
  double probability(const Features& features) const;
  double probability(std::string_view text) const { return probability(featurize(text)); }

  const std::variant<FeedForwardNet, BiLstmNet>& network() const { return network_; }
  std::variant<FeedForwardNet, BiLstmNet>& network() { return network_; }
  Parameters& parameters();
  const Parameters& parameters() const;
  bool initialized() const { return initialized_; }
  void mark_initialized() { initialized_ = true; }

 private:
  friend BasicModel build_concat_pair(const ConcatPairConfig&, const EncoderRegistry&);
  friend BasicModel build_bilstm(const BiLstmConfig&, const EncoderRegistry&);

  ModelConfig config_;
  std::vector<EncoderHandle> encoders_;
  std::variant<FeedForwardNet, BiLstmNet> network_;
  bool initialized_ = false;
};

// Throw ConfigError for unknown encoders or encoders of the wrong kind.
BasicModel build_concat_pair(const ConcatPairConfig& cfg, const EncoderRegistry& registry);
BasicModel build_bilstm(const BiLstmConfig& cfg, const EncoderRegistry& registry);
BasicModel build_model(const ModelConfig& cfg, const EncoderRegistry& registry);

struct TrainedModel {
  BasicModel model;
  TrainConfig train_config;
  TrainingHistory history;

  // SHA-256 over the serialized parameter blob.
  std::string parameter_checksum() const;
};

// Mini-batch minimization of binary cross-entropy. Keeps the parameters of
// the epoch with the best validation accuracy (earliest on ties). Throws
// DataError for empty or unlabeled data and TrainingError when the loss
// stops being finite.
TrainedModel train(BasicModel model, const LabeledDataset& train_ds,
                   const LabeledDataset& validation_ds, const TrainConfig& tc);

InferenceResult predict(const TrainedModel& tm, std::string_view text);

// Order-preserving; failures name the sample id.
std::vector<std::pair<std::string, InferenceResult>> predict_batch(const TrainedModel& tm,
                                                                   const LabeledDataset& ds);

// id, probability, label
void write_predictions(const std::vector<std::pair<std::string, InferenceResult>>& predictions,
                       const std::filesystem::path& path);

// Directory layout: manifest.json (human-readable) and parameters.bin
// (little-endian float64, tensors in manifest order, each row-major).
void save_model(const TrainedModel& tm, const std::filesystem::path& dir);
// Rebuilds the model against `registry`. Throws ConfigError when an encoder
// is missing or its version differs from the one recorded at training time,
// DataError when the blob is corrupt.
TrainedModel load_model(const std::filesystem::path& dir, const EncoderRegistry& registry);

}  // namespace trivote

#endif  // TRIVOTE_MODELS_HPP
