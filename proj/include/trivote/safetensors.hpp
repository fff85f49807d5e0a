#ifndef TRIVOTE_SAFETENSORS_HPP
#define TRIVOTE_SAFETENSORS_HPP

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace trivote {

// Reader for the safetensors container: a little-endian u64 header length, a
// JSON header mapping tensor names to dtype/shape/byte ranges, then the raw
// tensor bytes. F32, F16 and BF16 tensors are converted to float.
class SafetensorsFile {
 public:
  struct TensorInfo {
    std::string dtype;
    std::vector<std::int64_t> shape;
    std::size_t begin = 0;
    std::size_t end = 0;
  };

  // Reads the whole file. Throws ConfigError on malformed input.
  static SafetensorsFile read(const std::filesystem::path& path);

  bool contains(const std::string& name) const;
  const TensorInfo& info(const std::string& name) const;
  std::vector<std::string> names() const;

  // Row-major [rows, cols] tensor as an Eigen matrix of the same shape.
  Eigen::MatrixXf matrix(const std::string& name) const;
  // One-dimensional tensor.
  Eigen::VectorXf vector(const std::string& name) const;

 private:
  std::vector<float> values(const std::string& name) const;

  std::filesystem::path path_;
  std::map<std::string, TensorInfo> tensors_;
  std::vector<unsigned char> data_;
};

}  // namespace trivote

#endif  // TRIVOTE_SAFETENSORS_HPP
