#include <cmath>

#include <fmt/format.h>

#include "trivote/error.hpp"
#include "trivote/networks.hpp"

namespace trivote {

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double bce_with_logit(double logit, double label) {
  // log(1 + exp(z)) - y z
  const double softplus = std::max(logit, 0.0) + std::log1p(std::exp(-std::abs(logit)));
  return softplus - label * logit;
}

namespace {

void glorot(Eigen::MatrixXd& w, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(w.rows() + w.cols()));
  for (Eigen::Index r = 0; r < w.rows(); ++r) {
    for (Eigen::Index c = 0; c < w.cols(); ++c) w(r, c) = uniform(rng, -limit, limit);
  }
}

}  // namespace

FeedForwardNet::FeedForwardNet(int input_width, std::vector<int> hidden_sizes, double dropout)
    : input_width_(input_width), hidden_sizes_(std::move(hidden_sizes)), dropout_(dropout) {
  if (input_width <= 0) throw ConfigError("feed-forward input width must be positive");
  if (!(dropout >= 0.0 && dropout < 1.0)) throw ConfigError("dropout must be in [0, 1)");
  int in = input_width;
  for (std::size_t l = 0; l <= hidden_sizes_.size(); ++l) {
    const int out = l < hidden_sizes_.size() ? hidden_sizes_[l] : 1;
    if (out <= 0) throw ConfigError("hidden sizes must be positive");
    params_.add(fmt::format("dense{}.weight", l), out, in);
    params_.add(fmt::format("dense{}.bias", l), out, 1);
    in = out;
  }
}

void FeedForwardNet::initialize(Rng& rng) {
  for (std::size_t i = 0; i < params_.size(); i += 2) {
    glorot(params_[i], rng);
    params_[i + 1].setZero();
  }
}

double FeedForwardNet::logit(const Eigen::VectorXd& x) const {
  Eigen::VectorXd a = x;
  const std::size_t n_layers = params_.size() / 2;
  for (std::size_t l = 0; l < n_layers; ++l) {
    Eigen::VectorXd z = params_[2 * l] * a + params_[2 * l + 1].col(0);
    a = l + 1 < n_layers ? Eigen::VectorXd(z.array().tanh()) : z;
  }
  return a[0];
}

double FeedForwardNet::accumulate_gradient(const Eigen::VectorXd& x, double label,
                                           Rng* dropout_rng, Parameters& grads) const {
  const std::size_t n_layers = params_.size() / 2;
  // inputs[l] is what layer l consumed (post-dropout); masks[l] the scaled
  // dropout mask applied to the tanh output of layer l.
  std::vector<Eigen::VectorXd> inputs(n_layers), activations(n_layers), masks(n_layers);
  Eigen::VectorXd a = x;
  double z_out = 0.0;
  for (std::size_t l = 0; l < n_layers; ++l) {
    inputs[l] = a;
    Eigen::VectorXd z = params_[2 * l] * a + params_[2 * l + 1].col(0);
    if (l + 1 == n_layers) {
      z_out = z[0];
      break;
    }
    activations[l] = z.array().tanh();
    masks[l] = Eigen::VectorXd::Ones(z.size());
    if (dropout_rng && dropout_ > 0.0) {
      const double keep = 1.0 - dropout_;
      for (Eigen::Index k = 0; k < z.size(); ++k) {
        masks[l][k] = uniform01(*dropout_rng) < keep ? 1.0 / keep : 0.0;
      }
    }
    a = activations[l].cwiseProduct(masks[l]);
  }

  const double loss = bce_with_logit(z_out, label);
  Eigen::VectorXd delta(1);
  delta[0] = sigmoid(z_out) - label;
  for (std::size_t l = n_layers; l-- > 0;) {
    grads[2 * l] += delta * inputs[l].transpose();
    grads[2 * l + 1].col(0) += delta;
    if (l == 0) break;
    Eigen::VectorXd da = params_[2 * l].transpose() * delta;
    const Eigen::VectorXd& h = activations[l - 1];
    delta = da.cwiseProduct(masks[l - 1]).cwiseProduct(
        (1.0 - h.array().square()).matrix());
  }
  return loss;
}

}  // namespace trivote
