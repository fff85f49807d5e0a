#include "trivote/safetensors.hpp"

#include <cstring>
#include <fstream>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "trivote/error.hpp"

namespace trivote {
namespace {

float half_to_float(std::uint16_t h) {
  const std::uint32_t sign = static_cast<std::uint32_t>(h & 0x8000u) << 16;
  std::uint32_t exponent = (h >> 10) & 0x1fu;
  std::uint32_t mantissa = h & 0x3ffu;
  std::uint32_t bits;
  if (exponent == 0) {
    if (mantissa == 0) {
      bits = sign;
    } else {
      // Subnormal: renormalize.
      exponent = 127 - 15 + 1;
      while ((mantissa & 0x400u) == 0) {
        mantissa <<= 1;
        --exponent;
      }
      mantissa &= 0x3ffu;
      bits = sign | (exponent << 23) | (mantissa << 13);
    }
  } else if (exponent == 0x1f) {
    bits = sign | 0x7f800000u | (mantissa << 13);
  } else {
    bits = sign | ((exponent + 127 - 15) << 23) | (mantissa << 13);
  }
  float f;
  std::memcpy(&f, &bits, sizeof f);
  return f;
}

float bf16_to_float(std::uint16_t h) {
  const std::uint32_t bits = static_cast<std::uint32_t>(h) << 16;
  float f;
  std::memcpy(&f, &bits, sizeof f);
  return f;
}

}  // namespace

SafetensorsFile SafetensorsFile::read(const std::filesystem::path& path) {
  SafetensorsFile f;
  f.path_ = path;
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(fmt::format("{}: cannot open weights file", path.string()));

  unsigned char len_bytes[8];
  if (!in.read(reinterpret_cast<char*>(len_bytes), 8)) {
    throw ConfigError(fmt::format("{}: truncated safetensors header", path.string()));
  }
  std::uint64_t header_len = 0;
  for (int i = 7; i >= 0; --i) header_len = (header_len << 8) | len_bytes[i];
  const auto file_size = std::filesystem::file_size(path);
  if (header_len > file_size - 8) {
    throw ConfigError(fmt::format("{}: bad safetensors header length", path.string()));
  }
  std::string header(header_len, '\0');
  in.read(header.data(), static_cast<std::streamsize>(header_len));

  nlohmann::json j;
  try {
    j = nlohmann::json::parse(header);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(fmt::format("{}: bad safetensors header: {}", path.string(), e.what()));
  }

  const std::size_t data_size = file_size - 8 - header_len;
  f.data_.resize(data_size);
  in.read(reinterpret_cast<char*>(f.data_.data()), static_cast<std::streamsize>(data_size));
  if (!in) throw ConfigError(fmt::format("{}: truncated tensor data", path.string()));

  for (const auto& [name, entry] : j.items()) {
    if (name == "__metadata__") continue;
    TensorInfo info;
    info.dtype = entry.at("dtype").get<std::string>();
    info.shape = entry.at("shape").get<std::vector<std::int64_t>>();
    auto offsets = entry.at("data_offsets").get<std::vector<std::size_t>>();
    if (offsets.size() != 2 || offsets[0] > offsets[1] || offsets[1] > data_size) {
      throw ConfigError(fmt::format("{}: bad offsets for tensor '{}'", path.string(), name));
    }
    info.begin = offsets[0];
    info.end = offsets[1];
    f.tensors_.emplace(name, std::move(info));
  }
  return f;
}

bool SafetensorsFile::contains(const std::string& name) const {
  return tensors_.count(name) > 0;
}

const SafetensorsFile::TensorInfo& SafetensorsFile::info(const std::string& name) const {
  auto it = tensors_.find(name);
  if (it == tensors_.end()) {
    throw ConfigError(fmt::format("{}: missing tensor '{}'", path_.string(), name));
  }
  return it->second;
}

std::vector<std::string> SafetensorsFile::names() const {
  std::vector<std::string> out;
  for (const auto& [name, _] : tensors_) out.push_back(name);
  return out;
}

std::vector<float> SafetensorsFile::values(const std::string& name) const {
  const TensorInfo& t = info(name);
  std::size_t count = 1;
  for (auto d : t.shape) count *= static_cast<std::size_t>(d);
  const unsigned char* p = data_.data() + t.begin;
  const std::size_t bytes = t.end - t.begin;
  std::vector<float> out(count);

  auto check = [&](std::size_t width) {
    if (bytes != count * width) {
      throw ConfigError(fmt::format("{}: tensor '{}' has {} bytes, expected {}",
                                    path_.string(), name, bytes, count * width));
    }
  };
  // Tensor data is little-endian; so is every platform this builds for.
  if (t.dtype == "F32") {
    check(4);
    std::memcpy(out.data(), p, bytes);
  } else if (t.dtype == "F16" || t.dtype == "BF16") {
    check(2);
    for (std::size_t i = 0; i < count; ++i) {
      const std::uint16_t h = static_cast<std::uint16_t>(p[2 * i] | (p[2 * i + 1] << 8));
      out[i] = t.dtype == "F16" ? half_to_float(h) : bf16_to_float(h);
    }
  } else {
    throw ConfigError(fmt::format("{}: tensor '{}' has unsupported dtype {}",
                                  path_.string(), name, t.dtype));
  }
  return out;
}

Eigen::MatrixXf SafetensorsFile::matrix(const std::string& name) const {
  const TensorInfo& t = info(name);
  if (t.shape.size() != 2) {
    throw ConfigError(fmt::format("{}: tensor '{}' is not two-dimensional", path_.string(), name));
  }
  std::vector<float> v = values(name);
  using RowMajor = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  return Eigen::Map<const RowMajor>(v.data(), t.shape[0], t.shape[1]);
}

Eigen::VectorXf SafetensorsFile::vector(const std::string& name) const {
  const TensorInfo& t = info(name);
  if (t.shape.size() != 1) {
    throw ConfigError(fmt::format("{}: tensor '{}' is not one-dimensional", path_.string(), name));
  }
  std::vector<float> v = values(name);
  return Eigen::Map<const Eigen::VectorXf>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace trivote
