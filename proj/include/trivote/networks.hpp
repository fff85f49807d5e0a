#ifndef TRIVOTE_NETWORKS_HPP
#define TRIVOTE_NETWORKS_HPP

#include <variant>
#include <vector>

#include <Eigen/Core>

#include "trivote/parameters.hpp"
#include "trivote/random.hpp"

namespace trivote {

// Network input: a sentence feature vector for the feed-forward head, or a
// (tokens x dim) matrix for the recurrent head.
using Features = std::variant<Eigen::VectorXd, Eigen::MatrixXd>;

double sigmoid(double z);
// Binary cross-entropy of sigmoid(logit) against label in {0, 1}, computed
// from the logit for numerical stability.
double bce_with_logit(double logit, double label);

// Fully connected stack: input -> [dense -> tanh -> dropout]* -> dense(1).
class FeedForwardNet {
 public:
  FeedForwardNet() = default;
  FeedForwardNet(int input_width, std::vector<int> hidden_sizes, double dropout);

  int input_width() const { return input_width_; }
  const std::vector<int>& hidden_sizes() const { return hidden_sizes_; }

  // Glorot-uniform weights, zero biases.
  void initialize(Rng& rng);

  // Inference-mode logit.
  double logit(const Eigen::VectorXd& x) const;

  // Training-mode forward and backward pass for one example. Dropout is drawn
  // from `dropout_rng`; pass nullptr to disable it. Adds dLoss/dParams to
  // `grads` and returns the loss.
  double accumulate_gradient(const Eigen::VectorXd& x, double label, Rng* dropout_rng,
                             Parameters& grads) const;

  Parameters& parameters() { return params_; }
  const Parameters& parameters() const { return params_; }

 private:
  int input_width_ = 0;
  std::vector<int> hidden_sizes_;
  double dropout_ = 0.0;
  Parameters params_;  // weight_0, bias_0, weight_1, bias_1, ...
};

// Stacked bidirectional LSTM over a token sequence. Each layer runs a
// forward and a backward cell; the next layer reads their concatenated
// outputs. The classifier sees [h_forward(last token), h_backward(first
// token)] of the top layer, i.e. 2 * hidden inputs.
//
// Cell, gates ordered (input, forget, candidate, output):
//   z = Wx x_t + Wh h_{t-1} + b
//   i = sigma(z_i)  f = sigma(z_f)  g = tanh(z_g)  o = sigma(z_o)
//   c_t = f * c_{t-1} + i * g       h_t = o * tanh(c_t)
class BiLstmNet {
 public:
  BiLstmNet() = default;
  BiLstmNet(int input_width, int hidden_size, int layers, double dropout);

  int input_width() const { return input_width_; }
  int hidden_size() const { return hidden_; }
  int layers() const { return layers_; }
  int classifier_input_width() const { return 2 * hidden_; }

  // Uniform(-1/sqrt(hidden), 1/sqrt(hidden)) recurrent weights, forget-gate
  // bias 1, Glorot-uniform classifier.
  void initialize(Rng& rng);

  double logit(const Eigen::MatrixXd& sequence) const;
  double accumulate_gradient(const Eigen::MatrixXd& sequence, double label, Rng* dropout_rng,
                             Parameters& grads) const;

  Parameters& parameters() { return params_; }
  const Parameters& parameters() const { return params_; }

 private:
  struct Direction {
    std::size_t wx, wh, b;
  };
  struct Trace;

  Direction direction(int layer, int dir) const;
  double forward(const Eigen::MatrixXd& sequence, Rng* dropout_rng, Trace* trace) const;

  int input_width_ = 0;
  int hidden_ = 0;
  int layers_ = 0;
  double dropout_ = 0.0;
  Parameters params_;
  std::size_t classifier_w_ = 0;
  std::size_t classifier_b_ = 0;
};

}  // namespace trivote

#endif  // TRIVOTE_NETWORKS_HPP
