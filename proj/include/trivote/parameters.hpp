#ifndef TRIVOTE_PARAMETERS_HPP
#define TRIVOTE_PARAMETERS_HPP

#include <string>
#include <vector>

#include <Eigen/Core>

namespace trivote {

// Ordered, named parameter tensors of a network. Bias vectors are stored as
// n x 1 matrices. Gradient buffers and optimizer moments use the same layout.
class Parameters {
 public:
  // Returns the index of the new zero-filled tensor.
  std::size_t add(std::string name, Eigen::Index rows, Eigen::Index cols);

  std::size_t size() const { return tensors_.size(); }
  Eigen::MatrixXd& operator[](std::size_t i) { return tensors_[i].value; }
  const Eigen::MatrixXd& operator[](std::size_t i) const { return tensors_[i].value; }
  const std::string& name(std::size_t i) const { return tensors_[i].name; }

  // Same names and shapes, all zeros.
  Parameters zeros_like() const;
  void set_zero();
  std::size_t scalar_count() const;

  // this += scale * other; shapes must match.
  void add_scaled(const Parameters& other, double scale);
  double squared_norm() const;
  bool all_finite() const;

  // Row-major concatenation of every tensor, in order.
  std::vector<double> flatten() const;
  // Inverse of flatten(); throws DataError on a size mismatch.
  void assign(const std::vector<double>& flat);

  bool same_layout(const Parameters& other) const;

 private:
  struct Tensor {
    std::string name;
    Eigen::MatrixXd value;
  };
  std::vector<Tensor> tensors_;
};

}  // namespace trivote

#endif  // TRIVOTE_PARAMETERS_HPP
