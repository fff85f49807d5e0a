#include "trivote/parameters.hpp"

#include <fmt/format.h>

#include "trivote/error.hpp"

namespace trivote {

std::size_t Parameters::add(std::string name, Eigen::Index rows, Eigen::Index cols) {
  tensors_.push_back({std::move(name), Eigen::MatrixXd::Zero(rows, cols)});
  return tensors_.size() - 1;
}

Parameters Parameters::zeros_like() const {
  Parameters p = *this;
  p.set_zero();
  return p;
}

void Parameters::set_zero() {
  for (Tensor& t : tensors_) t.value.setZero();
}

std::size_t Parameters::scalar_count() const {
  std::size_t n = 0;
  for (const Tensor& t : tensors_) n += static_cast<std::size_t>(t.value.size());
  return n;
}

void Parameters::add_scaled(const Parameters& other, double scale) {
  for (std::size_t i = 0; i < tensors_.size(); ++i) {
    tensors_[i].value += scale * other.tensors_[i].value;
  }
}

double Parameters::squared_norm() const {
  double s = 0.0;
  for (const Tensor& t : tensors_) s += t.value.squaredNorm();
  return s;
}

bool Parameters::all_finite() const {
  for (const Tensor& t : tensors_) {
    if (!t.value.allFinite()) return false;
  }
  return true;
}

std::vector<double> Parameters::flatten() const {
  std::vector<double> flat;
  flat.reserve(scalar_count());
  for (const Tensor& t : tensors_) {
    for (Eigen::Index r = 0; r < t.value.rows(); ++r) {
      for (Eigen::Index c = 0; c < t.value.cols(); ++c) flat.push_back(t.value(r, c));
    }
  }
  return flat;
}

void Parameters::assign(const std::vector<double>& flat) {
  if (flat.size() != scalar_count()) {
    throw DataError(fmt::format("parameter blob holds {} values, expected {}", flat.size(),
                                scalar_count()));
  }
  std::size_t k = 0;
  for (Tensor& t : tensors_) {
    for (Eigen::Index r = 0; r < t.value.rows(); ++r) {
      for (Eigen::Index c = 0; c < t.value.cols(); ++c) t.value(r, c) = flat[k++];
    }
  }
}

bool Parameters::same_layout(const Parameters& other) const {
  if (tensors_.size() != other.tensors_.size()) return false;
  for (std::size_t i = 0; i < tensors_.size(); ++i) {
    const auto& a = tensors_[i];
    const auto& b = other.tensors_[i];
    if (a.name != b.name || a.value.rows() != b.value.rows() || a.value.cols() != b.value.cols()) {
      return false;
    }
  }
  return true;
}

}  // namespace trivote
