#include <fmt/format.h>

#include "trivote/error.hpp"
#include "trivote/models.hpp"

namespace trivote {
namespace {

template <typename T>
T get_or(const nlohmann::json& j, const char* key, T fallback) {
  return j.contains(key) ? j.at(key).get<T>() : fallback;
}

void check_threshold_dropout(double threshold, double dropout) {
  if (!(threshold > 0.0 && threshold < 1.0)) {
    throw ConfigError(fmt::format("threshold {} is outside (0, 1)", threshold));
  }
  if (!(dropout >= 0.0 && dropout < 1.0)) {
    throw ConfigError(fmt::format("dropout {} is outside [0, 1)", dropout));
  }
}

template <typename F>
auto json_guard(const char* what, F&& f) {
  try {
    return f();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(fmt::format("{}: {}", what, e.what()));
  }
}

}  // namespace

std::string_view to_string(Architecture a) {
  return a == Architecture::kConcatPair ? "concat_pair" : "bilstm";
}

ConcatPairConfig ConcatPairConfig::from_json(const nlohmann::json& j) {
  return json_guard("concat_pair config", [&] {
    ConcatPairConfig c;
    c.encoder_a = j.at("encoder_a").get<std::string>();
    c.encoder_b = j.at("encoder_b").get<std::string>();
    c.hidden_sizes = get_or(j, "hidden_sizes", c.hidden_sizes);
    c.dropout = get_or(j, "dropout", c.dropout);
    c.threshold = get_or(j, "threshold", c.threshold);
    check_threshold_dropout(c.threshold, c.dropout);
    for (int h : c.hidden_sizes) {
      if (h <= 0) throw ConfigError("hidden_sizes must be positive");
    }
    return c;
  });
}

nlohmann::json ConcatPairConfig::to_json() const {
  return {{"type", "concat_pair"}, {"encoder_a", encoder_a}, {"encoder_b", encoder_b},
          {"hidden_sizes", hidden_sizes}, {"dropout", dropout}, {"threshold", threshold}};
}

BiLstmConfig BiLstmConfig::from_json(const nlohmann::json& j) {
  return json_guard("bilstm config", [&] {
    BiLstmConfig c;
    c.encoder = j.at("encoder").get<std::string>();
    c.hidden_size = get_or(j, "hidden_size", c.hidden_size);
    c.layers = get_or(j, "layers", c.layers);
    c.dropout = get_or(j, "dropout", c.dropout);
    c.threshold = get_or(j, "threshold", c.threshold);
    check_threshold_dropout(c.threshold, c.dropout);
    if (c.hidden_size <= 0 || c.layers <= 0) {
      throw ConfigError("bilstm hidden_size and layers must be positive");
    }
    return c;
  });
}

nlohmann::json BiLstmConfig::to_json() const {
  return {{"type", "bilstm"}, {"encoder", encoder}, {"hidden_size", hidden_size},
          {"layers", layers}, {"dropout", dropout}, {"threshold", threshold}};
}

ModelConfig model_config_from_json(const nlohmann::json& j) {
  const std::string type = json_guard("model config", [&] { return j.at("type").get<std::string>(); });
  if (type == "concat_pair") return ConcatPairConfig::from_json(j);
  if (type == "bilstm") return BiLstmConfig::from_json(j);
  throw ConfigError(fmt::format("unknown model type '{}' (expected concat_pair or bilstm)", type));
}

nlohmann::json to_json(const ModelConfig& c) {
  return std::visit([](const auto& cfg) { return cfg.to_json(); }, c);
}

TrainConfig TrainConfig::from_json(const nlohmann::json& j) {
  return json_guard("training config", [&] {
    TrainConfig c;
    c.epochs = get_or(j, "epochs", c.epochs);
    c.batch_size = get_or(j, "batch_size", c.batch_size);
    c.learning_rate = get_or(j, "learning_rate", c.learning_rate);
    c.seed = get_or(j, "seed", c.seed);
    c.early_stop_patience = get_or(j, "early_stop_patience", c.early_stop_patience);
    c.optimizer = parse_optimizer(get_or(j, "optimizer", std::string("sgd")));
    c.gradient_clip = get_or(j, "gradient_clip", c.gradient_clip);
    c.fine_tune_encoders = get_or(j, "fine_tune_encoders", c.fine_tune_encoders);
    if (c.epochs <= 0) throw ConfigError("epochs must be positive");
    if (c.batch_size <= 0) throw ConfigError("batch_size must be positive");
    if (!(c.learning_rate > 0.0)) throw ConfigError("learning_rate must be positive");
    if (c.early_stop_patience < 0) throw ConfigError("early_stop_patience must be non-negative");
    if (c.gradient_clip < 0.0) throw ConfigError("gradient_clip must be non-negative");
    return c;
  });
}

nlohmann::json TrainConfig::to_json() const {
  return {{"epochs", epochs},
          {"batch_size", batch_size},
          {"learning_rate", learning_rate},
          {"seed", seed},
          {"early_stop_patience", early_stop_patience},
          {"optimizer", to_string(optimizer)},
          {"gradient_clip", gradient_clip},
          {"fine_tune_encoders", fine_tune_encoders}};
}

Architecture BasicModel::architecture() const {
  return std::holds_alternative<ConcatPairConfig>(config_) ? Architecture::kConcatPair
                                                           : Architecture::kBiLstm;
}

double BasicModel::threshold() const {
  return std::visit([](const auto& c) { return c.threshold; }, config_);
}

std::map<std::string, std::string> BasicModel::encoder_versions() const {
  std::map<std::string, std::string> out;
  for (const EncoderHandle& e : encoders_) out[e->spec().name] = e->version();
  return out;
}

int BasicModel::head_input_width() const {
  if (const auto* ff = std::get_if<FeedForwardNet>(&network_)) return ff->input_width();
  return std::get<BiLstmNet>(network_).classifier_input_width();
}

Features BasicModel::featurize(std::string_view text) const {
  const std::string normalized = normalize_text(text);
  if (normalized.empty()) throw DataError("text is empty after normalization");
  if (architecture() == Architecture::kConcatPair) {
    Eigen::VectorXd a = encoders_[0]->encode_sentence(normalized).values;
    Eigen::VectorXd b = encoders_[1]->encode_sentence(normalized).values;
    Eigen::VectorXd x(a.size() + b.size());
    x << a, b;
    if (!x.allFinite()) throw DataError("encoder produced a non-finite embedding");
    return x;
  }
  TokenEmbeddingSequence seq = encoders_[0]->encode_tokens(normalized);
  // Padding rows never reach the recurrent pass.
  Eigen::Index real = 0;
  while (real < seq.rows() && seq.mask[static_cast<std::size_t>(real)]) ++real;
  Eigen::MatrixXd m = seq.vectors.topRows(real);
  if (!m.allFinite()) throw DataError("encoder produced a non-finite embedding");
  return m;
}

double BasicModel::probability(const Features& features) const {
  double z = 0.0;
  if (const auto* ff = std::get_if<FeedForwardNet>(&network_)) {
    z = ff->logit(std::get<Eigen::VectorXd>(features));
  } else {
    z = std::get<BiLstmNet>(network_).logit(std::get<Eigen::MatrixXd>(features));
  }
  return sigmoid(z);
}

Parameters& BasicModel::parameters() {
  return std::visit([](auto& n) -> Parameters& { return n.parameters(); }, network_);
}

const Parameters& BasicModel::parameters() const {
  return std::visit([](const auto& n) -> const Parameters& { return n.parameters(); }, network_);
}

BasicModel build_concat_pair(const ConcatPairConfig& cfg, const EncoderRegistry& registry) {
  BasicModel m;
  m.config_ = cfg;
  for (const std::string& name : {cfg.encoder_a, cfg.encoder_b}) {
    EncoderHandle e = registry.get(name);
    if (!has_sentence(e->spec().kind)) {
      throw ConfigError(fmt::format("encoder '{}' does not produce sentence embeddings", name));
    }
    m.encoders_.push_back(std::move(e));
  }
  const int width = m.encoders_[0]->spec().dim + m.encoders_[1]->spec().dim;
  m.network_ = FeedForwardNet(width, cfg.hidden_sizes, cfg.dropout);
  return m;
}

BasicModel build_bilstm(const BiLstmConfig& cfg, const EncoderRegistry& registry) {
  BasicModel m;
  m.config_ = cfg;
  EncoderHandle e = registry.get(cfg.encoder);
  if (!has_tokens(e->spec().kind)) {
    throw ConfigError(fmt::format("encoder '{}' does not produce token embeddings", cfg.encoder));
  }
  m.network_ = BiLstmNet(e->spec().dim, cfg.hidden_size, cfg.layers, cfg.dropout);
  m.encoders_.push_back(std::move(e));
  return m;
}

BasicModel build_model(const ModelConfig& cfg, const EncoderRegistry& registry) {
  if (const auto* c = std::get_if<ConcatPairConfig>(&cfg)) return build_concat_pair(*c, registry);
  return build_bilstm(std::get<BiLstmConfig>(cfg), registry);
}

}  // namespace trivote
