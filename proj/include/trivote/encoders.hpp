#ifndef TRIVOTE_ENCODERS_HPP
#define TRIVOTE_ENCODERS_HPP

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json.hpp>

namespace trivote {

enum class EncoderKind { kSentence, kToken, kBoth };

std::string_view to_string(EncoderKind k);
inline bool has_sentence(EncoderKind k) { return k != EncoderKind::kToken; }
inline bool has_tokens(EncoderKind k) { return k != EncoderKind::kSentence; }

struct EncoderSpec {
  std::string name;
  EncoderKind kind = EncoderKind::kBoth;
  int dim = 0;
  int max_tokens = 128;
};

struct SentenceEmbedding {
  Eigen::VectorXd values;
};

// One row per token, padding rows (mask false) only ever at the end.
struct TokenEmbeddingSequence {
  Eigen::MatrixXd vectors;
  std::vector<bool> mask;

  Eigen::Index rows() const { return vectors.rows(); }
};

// A frozen text encoder. Implementations are immutable after construction
// (lazy loading is internally synchronized), so one handle may be shared by
// concurrent callers.
class Encoder {
 public:
  virtual ~Encoder() = default;

  virtual const EncoderSpec& spec() const = 0;
  // Identifies the exact weights and settings; recorded with trained models
  // and compared on reload.
  virtual std::string version() const = 0;

  // Both throw DataError for empty text and ConfigError when the encoder's
  // kind lacks the requested representation. Over-long text is truncated to
  // spec().max_tokens.
  virtual SentenceEmbedding encode_sentence(std::string_view text) const = 0;
  virtual TokenEmbeddingSequence encode_tokens(std::string_view text) const = 0;
};

using EncoderHandle = std::shared_ptr<const Encoder>;

// Deterministic, dependency-free encoder used for desk-scale runs and tests.
//
// Tokens: the text is split on Unicode whitespace, and every punctuation code
// point (u_ispunct) becomes a token of its own.
//
// Token vector for token t:
//   key   = FNV-1a-64(utf8 bytes of t)          (offset 0xcbf29ce484222325,
//                                                prime 0x100000001b3)
//   state = key XOR seed
//   for j in [0, dim):
//     state += 0x9e3779b97f4a7c15; z = splitmix64_mix(state)
//     x[j]  = 2 * ((z >> 11) * 2^-53) - 1
//   vector = x / ||x||_2
// splitmix64_mix(z): z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9;
//                    z = (z ^ (z >> 27)) * 0x94d049bb133111eb; z ^ (z >> 31).
//
// Sentence vector: the mean of the (truncated) token vectors, L2-normalized.
class HashEncoder final : public Encoder {
 public:
  explicit HashEncoder(std::string name = "hash-test", int dim = 64,
                       std::uint64_t seed = 0, int max_tokens = 128);

  const EncoderSpec& spec() const override { return spec_; }
  std::string version() const override;
  SentenceEmbedding encode_sentence(std::string_view text) const override;
  TokenEmbeddingSequence encode_tokens(std::string_view text) const override;

  // Exposed for tests.
  static std::vector<std::string> tokenize(std::string_view text);
  Eigen::VectorXd token_vector(std::string_view token) const;

 private:
  EncoderSpec spec_;
  std::uint64_t seed_;
};

enum class BertPooling {
  // Final-layer hidden state at the [CLS] position.
  kCls,
  // tanh(dense(cls)) from the checkpoint's pooler head.
  kPooler,
};

// Inference-only BERT adapter. Loads a Hugging Face style checkpoint
// directory holding config.json, vocab.txt, model.safetensors and optionally
// tokenizer_config.json. The configuration is read at construction so that
// spec().dim is available for registration; weights load on first use.
class BertEncoder final : public Encoder {
 public:
  BertEncoder(std::string name, std::filesystem::path directory,
              int max_tokens = 128, BertPooling pooling = BertPooling::kCls);
  ~BertEncoder() override;

  const EncoderSpec& spec() const override { return spec_; }
  std::string version() const override;
  SentenceEmbedding encode_sentence(std::string_view text) const override;
  TokenEmbeddingSequence encode_tokens(std::string_view text) const override;

  // Token ids after truncation, including [CLS] and [SEP].
  std::vector<int> token_ids(std::string_view text) const;

 private:
  class Impl;
  EncoderSpec spec_;
  std::unique_ptr<Impl> impl_;
};

// How an encoder is declared in a run configuration.
struct EncoderDefinition {
  std::string name;
  std::string type;  // "hash" or "bert"
  int dim = 64;
  std::uint64_t seed = 0;
  int max_tokens = 128;
  std::filesystem::path path;
  BertPooling pooling = BertPooling::kCls;

  // Relative paths are resolved against `base_dir`.
  static EncoderDefinition from_json(const nlohmann::json& j,
                                     const std::filesystem::path& base_dir);
  nlohmann::json to_json() const;
};

class EncoderRegistry {
 public:
  // Throws ConfigError when the name is already taken.
  void add(EncoderHandle encoder);
  // Throws ConfigError listing the registered names when `name` is unknown.
  EncoderHandle get(std::string_view name) const;
  bool contains(std::string_view name) const;
  std::vector<std::string> names() const;

 private:
  std::map<std::string, EncoderHandle, std::less<>> encoders_;
};

EncoderHandle make_encoder(const EncoderDefinition& def);

// The built-in "hash-test" encoder plus every definition.
EncoderRegistry build_registry(const std::vector<EncoderDefinition>& defs);

}  // namespace trivote

#endif  // TRIVOTE_ENCODERS_HPP
