#include <cmath>

#include <fmt/format.h>
#include <spdlog/spdlog.h>
#include <unicode/uchar.h>
#include <unicode/utf8.h>

#include "trivote/encoders.hpp"
#include "trivote/error.hpp"

namespace trivote {
namespace {

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t splitmix64_mix(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

HashEncoder::HashEncoder(std::string name, int dim, std::uint64_t seed,
                         int max_tokens)
    : spec_{std::move(name), EncoderKind::kBoth, dim, max_tokens}, seed_(seed) {
  if (dim <= 0) throw ConfigError(fmt::format("encoder '{}': dim must be positive", spec_.name));
  if (max_tokens <= 0) {
    throw ConfigError(fmt::format("encoder '{}': max_tokens must be positive", spec_.name));
  }
}

std::string HashEncoder::version() const {
  return fmt::format("hash-v1;dim={};seed={};max_tokens={}", spec_.dim, seed_,
                     spec_.max_tokens);
}

std::vector<std::string> HashEncoder::tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  const auto* s = reinterpret_cast<const uint8_t*>(text.data());
  const auto n = static_cast<int32_t>(text.size());
  int32_t i = 0;
  while (i < n) {
    const int32_t start = i;
    UChar32 c;
    U8_NEXT(s, i, n, c);
    std::string_view bytes = text.substr(start, i - start);
    if (c >= 0 && u_isUWhiteSpace(c)) {
      if (!current.empty()) tokens.push_back(std::move(current));
      current.clear();
    } else if (c >= 0 && u_ispunct(c)) {
      if (!current.empty()) tokens.push_back(std::move(current));
      current.clear();
      tokens.emplace_back(bytes);
    } else {
      current.append(bytes);
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

Eigen::VectorXd HashEncoder::token_vector(std::string_view token) const {
  std::uint64_t state = fnv1a64(token) ^ seed_;
  Eigen::VectorXd v(spec_.dim);
  for (int j = 0; j < spec_.dim; ++j) {
    state += 0x9e3779b97f4a7c15ULL;
    const std::uint64_t z = splitmix64_mix(state);
    v[j] = 2.0 * (static_cast<double>(z >> 11) * 0x1.0p-53) - 1.0;
  }
  return v / v.norm();
}

TokenEmbeddingSequence HashEncoder::encode_tokens(std::string_view text) const {
  std::vector<std::string> tokens = tokenize(text);
  if (tokens.empty()) {
    throw DataError(fmt::format("encoder '{}': empty text", spec_.name));
  }
  if (tokens.size() > static_cast<std::size_t>(spec_.max_tokens)) {
    spdlog::debug("encoder '{}': truncating {} tokens to {}", spec_.name,
                  tokens.size(), spec_.max_tokens);
    tokens.resize(spec_.max_tokens);
  }
  TokenEmbeddingSequence seq;
  seq.vectors.resize(static_cast<Eigen::Index>(tokens.size()), spec_.dim);
  for (std::size_t r = 0; r < tokens.size(); ++r) {
    seq.vectors.row(static_cast<Eigen::Index>(r)) = token_vector(tokens[r]).transpose();
  }
  seq.mask.assign(tokens.size(), true);
  return seq;
}

SentenceEmbedding HashEncoder::encode_sentence(std::string_view text) const {
  TokenEmbeddingSequence seq = encode_tokens(text);
  Eigen::VectorXd mean = seq.vectors.colwise().mean().transpose();
  const double norm = mean.norm();
  if (norm > 0.0) mean /= norm;
  return {std::move(mean)};
}

}  // namespace trivote
