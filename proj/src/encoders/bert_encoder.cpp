#include <cmath>
#include <fstream>
#include <mutex>
#include <optional>

#include <fmt/format.h>
#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "trivote/checksum.hpp"
#include "trivote/encoders.hpp"
#include "trivote/error.hpp"
#include "trivote/safetensors.hpp"
#include "trivote/wordpiece.hpp"

namespace trivote {
namespace {

using Matrix = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXf;

struct BertConfig {
  int hidden = 0;
  int layers = 0;
  int heads = 0;
  int intermediate = 0;
  int max_positions = 0;
  int vocab = 0;
  float layer_norm_eps = 1e-12f;
  std::string activation = "gelu";
};

nlohmann::json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("{}: cannot open", path.string()));
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(fmt::format("{}: {}", path.string(), e.what()));
  }
}

BertConfig parse_config(const std::filesystem::path& dir) {
  nlohmann::json j = read_json(dir / "config.json");
  BertConfig c;
  try {
    c.hidden = j.at("hidden_size").get<int>();
    c.layers = j.at("num_hidden_layers").get<int>();
    c.heads = j.at("num_attention_heads").get<int>();
    c.intermediate = j.at("intermediate_size").get<int>();
    c.max_positions = j.value("max_position_embeddings", 512);
    c.vocab = j.at("vocab_size").get<int>();
    c.layer_norm_eps = j.value("layer_norm_eps", 1e-12f);
    c.activation = j.value("hidden_act", std::string("gelu"));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(fmt::format("{}: {}", (dir / "config.json").string(), e.what()));
  }
  if (c.hidden <= 0 || c.heads <= 0 || c.hidden % c.heads != 0) {
    throw ConfigError(fmt::format("{}: hidden_size must be a positive multiple of num_attention_heads",
                                  dir.string()));
  }
  return c;
}

struct Linear {
  Matrix weight;  // [out, in]
  Vector bias;

  Matrix apply(const Matrix& x) const {
    Matrix y = x * weight.transpose();
    y.rowwise() += bias.transpose();
    return y;
  }
};

struct LayerNorm {
  Vector gamma;
  Vector beta;

  void apply(Matrix& x, float eps) const {
    for (Eigen::Index r = 0; r < x.rows(); ++r) {
      auto row = x.row(r);
      const float mean = row.mean();
      row.array() -= mean;
      const float var = row.squaredNorm() / static_cast<float>(row.size());
      row *= 1.0f / std::sqrt(var + eps);
      row.array() = row.array() * gamma.transpose().array() + beta.transpose().array();
    }
  }
};

struct Layer {
  Linear query, key, value, attention_out;
  LayerNorm attention_norm;
  Linear intermediate, output;
  LayerNorm output_norm;
};

struct Weights {
  Matrix word, position, token_type;
  LayerNorm embedding_norm;
  std::vector<Layer> layers;
  std::optional<Linear> pooler;
};

Weights load_weights(const SafetensorsFile& st, const BertConfig& cfg) {
  std::string prefix;
  if (st.contains("bert.embeddings.word_embeddings.weight")) prefix = "bert.";
  auto linear = [&](const std::string& name) {
    return Linear{st.matrix(prefix + name + ".weight"), st.vector(prefix + name + ".bias")};
  };
  auto norm = [&](const std::string& name) {
    return LayerNorm{st.vector(prefix + name + ".weight"), st.vector(prefix + name + ".bias")};
  };

  Weights w;
  w.word = st.matrix(prefix + "embeddings.word_embeddings.weight");
  w.position = st.matrix(prefix + "embeddings.position_embeddings.weight");
  w.token_type = st.matrix(prefix + "embeddings.token_type_embeddings.weight");
  w.embedding_norm = norm("embeddings.LayerNorm");
  for (int i = 0; i < cfg.layers; ++i) {
    const std::string p = fmt::format("encoder.layer.{}.", i);
    w.layers.push_back(Layer{linear(p + "attention.self.query"),
                             linear(p + "attention.self.key"),
                             linear(p + "attention.self.value"),
                             linear(p + "attention.output.dense"),
                             norm(p + "attention.output.LayerNorm"),
                             linear(p + "intermediate.dense"),
                             linear(p + "output.dense"),
                             norm(p + "output.LayerNorm")});
  }
  if (st.contains(prefix + "pooler.dense.weight")) w.pooler = linear("pooler.dense");
  if (w.word.cols() != cfg.hidden) throw ConfigError("embedding width differs from hidden_size");
  return w;
}

void activate(Matrix& x, const std::string& act) {
  if (act == "gelu") {
    x = x.unaryExpr([](float v) { return 0.5f * v * (1.0f + std::erf(v / std::sqrt(2.0f))); });
  } else if (act == "gelu_new" || act == "gelu_pytorch_tanh") {
    const float k = std::sqrt(2.0f / 3.14159265358979f);
    x = x.unaryExpr([k](float v) {
      return 0.5f * v * (1.0f + std::tanh(k * (v + 0.044715f * v * v * v)));
    });
  } else if (act == "relu") {
    x = x.cwiseMax(0.0f);
  } else {
    throw ConfigError(fmt::format("unsupported hidden_act '{}'", act));
  }
}

void softmax_rows(Matrix& m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    auto row = m.row(r);
    row.array() -= row.maxCoeff();
    row = row.array().exp();
    row /= row.sum();
  }
}

}  // namespace

class BertEncoder::Impl {
 public:
  Impl(std::filesystem::path dir, BertConfig cfg, BertPooling pooling, int max_tokens)
      : dir_(std::move(dir)), cfg_(std::move(cfg)), pooling_(pooling), max_tokens_(max_tokens) {
    bool lower = true;
    if (std::filesystem::exists(dir_ / "tokenizer_config.json")) {
      lower = read_json(dir_ / "tokenizer_config.json").value("do_lower_case", true);
    }
    tokenizer_.emplace(WordPieceTokenizer::from_file(dir_ / "vocab.txt", lower));
    lower_case_ = lower;
  }

  std::vector<int> ids(std::string_view text) const {
    std::vector<int> body = tokenizer_->encode(text);
    const std::size_t room = static_cast<std::size_t>(max_tokens_) - 2;
    if (body.size() > room) {
      spdlog::debug("bert: truncating {} word pieces to {}", body.size(), room);
      body.resize(room);
    }
    std::vector<int> out;
    out.reserve(body.size() + 2);
    out.push_back(tokenizer_->cls_id());
    out.insert(out.end(), body.begin(), body.end());
    out.push_back(tokenizer_->sep_id());
    return out;
  }

  const Weights& weights() const {
    std::call_once(load_once_, [this] {
      const auto file = dir_ / "model.safetensors";
      if (!std::filesystem::exists(file)) {
        throw ConfigError(fmt::format(
            "{}: model.safetensors not found (convert PyTorch checkpoints to safetensors)",
            dir_.string()));
      }
      weights_ = load_weights(SafetensorsFile::read(file), cfg_);
    });
    return weights_;
  }

  // Final-layer hidden states, one row per input id.
  Matrix forward(const std::vector<int>& ids) const {
    const Weights& w = weights();
    const auto T = static_cast<Eigen::Index>(ids.size());
    const int H = cfg_.hidden;
    const int heads = cfg_.heads;
    const int d = H / heads;

    Matrix x(T, H);
    for (Eigen::Index t = 0; t < T; ++t) {
      if (ids[t] < 0 || ids[t] >= w.word.rows()) throw ConfigError("token id outside embedding table");
      x.row(t) = w.word.row(ids[t]) + w.position.row(t) + w.token_type.row(0);
    }
    w.embedding_norm.apply(x, cfg_.layer_norm_eps);

    const float scale = 1.0f / std::sqrt(static_cast<float>(d));
    for (const Layer& layer : w.layers) {
      Matrix q = layer.query.apply(x);
      Matrix k = layer.key.apply(x);
      Matrix v = layer.value.apply(x);
      Matrix context(T, H);
      for (int h = 0; h < heads; ++h) {
        Matrix scores = (q.middleCols(h * d, d) * k.middleCols(h * d, d).transpose()) * scale;
        softmax_rows(scores);
        context.middleCols(h * d, d) = scores * v.middleCols(h * d, d);
      }
      Matrix attended = layer.attention_out.apply(context) + x;
      layer.attention_norm.apply(attended, cfg_.layer_norm_eps);

      Matrix inner = layer.intermediate.apply(attended);
      activate(inner, cfg_.activation);
      x = layer.output.apply(inner) + attended;
      layer.output_norm.apply(x, cfg_.layer_norm_eps);
    }
    return x;
  }

  Vector pool(const Matrix& hidden) const {
    Vector cls = hidden.row(0).transpose();
    if (pooling_ == BertPooling::kCls) return cls;
    const Weights& w = weights();
    if (!w.pooler) throw ConfigError(fmt::format("{}: checkpoint has no pooler weights", dir_.string()));
    Vector pooled = w.pooler->weight * cls + w.pooler->bias;
    return pooled.array().tanh();
  }

  std::string version() const {
    std::call_once(version_once_, [this] {
      Sha256 h;
      for (const char* f : {"config.json", "vocab.txt", "tokenizer_config.json", "model.safetensors"}) {
        if (std::filesystem::exists(dir_ / f)) {
          h.update(f);
          hash_file(h, dir_ / f);
        }
      }
      version_ = fmt::format("bert-v1;sha256={};pooling={};max_tokens={};lower_case={}",
                             h.hex_digest(), pooling_ == BertPooling::kCls ? "cls" : "pooler",
                             max_tokens_, lower_case_);
    });
    return version_;
  }

 private:
  std::filesystem::path dir_;
  BertConfig cfg_;
  BertPooling pooling_;
  int max_tokens_;
  bool lower_case_ = true;
  std::optional<WordPieceTokenizer> tokenizer_;

  mutable std::once_flag load_once_;
  mutable Weights weights_;
  mutable std::once_flag version_once_;
  mutable std::string version_;
};

BertEncoder::BertEncoder(std::string name, std::filesystem::path directory,
                         int max_tokens, BertPooling pooling) {
  if (!std::filesystem::is_directory(directory)) {
    throw ConfigError(fmt::format("encoder '{}': {} is not a directory", name, directory.string()));
  }
  BertConfig cfg = parse_config(directory);
  if (max_tokens < 3) throw ConfigError(fmt::format("encoder '{}': max_tokens must be at least 3", name));
  const int effective = std::min(max_tokens, cfg.max_positions);
  spec_ = EncoderSpec{std::move(name), EncoderKind::kBoth, cfg.hidden, effective};
  impl_ = std::make_unique<Impl>(std::move(directory), std::move(cfg), pooling, effective);
}

BertEncoder::~BertEncoder() = default;

std::string BertEncoder::version() const { return impl_->version(); }

std::vector<int> BertEncoder::token_ids(std::string_view text) const { return impl_->ids(text); }

SentenceEmbedding BertEncoder::encode_sentence(std::string_view text) const {
  if (text.empty()) throw DataError(fmt::format("encoder '{}': empty text", spec_.name));
  Matrix hidden = impl_->forward(impl_->ids(text));
  return {impl_->pool(hidden).cast<double>()};
}

TokenEmbeddingSequence BertEncoder::encode_tokens(std::string_view text) const {
  if (text.empty()) throw DataError(fmt::format("encoder '{}': empty text", spec_.name));
  Matrix hidden = impl_->forward(impl_->ids(text));
  TokenEmbeddingSequence seq;
  seq.vectors = hidden.cast<double>();
  seq.mask.assign(static_cast<std::size_t>(hidden.rows()), true);
  return seq;
}

}  // namespace trivote
