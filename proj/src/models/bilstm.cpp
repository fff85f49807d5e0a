#include <cmath>

#include <fmt/format.h>

#include "trivote/error.hpp"
#include "trivote/networks.hpp"

namespace trivote {
namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

VectorXd logistic(const VectorXd& z) { return z.unaryExpr([](double v) { return sigmoid(v); }); }

void fill_uniform(MatrixXd& m, Rng& rng, double limit) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = uniform(rng, -limit, limit);
  }
}

// Scaled inverted-dropout mask, or all ones when rng is null.
MatrixXd dropout_mask(Eigen::Index rows, Eigen::Index cols, double rate, Rng* rng) {
  MatrixXd mask = MatrixXd::Ones(rows, cols);
  if (!rng || rate <= 0.0) return mask;
  const double keep = 1.0 - rate;
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) mask(r, c) = uniform01(*rng) < keep ? 1.0 / keep : 0.0;
  }
  return mask;
}

struct Step {
  VectorXd x, h_prev, c_prev;
  VectorXd i, f, g, o, c, h;
};

}  // namespace

struct BiLstmNet::Trace {
  struct Layer {
    MatrixXd input_mask;           // applied to this layer's input
    std::vector<Step> steps[2];    // indexed by token position
  };
  std::vector<Layer> layers;
  VectorXd pooled;                 // after dropout
  VectorXd pooled_mask;
};

BiLstmNet::BiLstmNet(int input_width, int hidden_size, int layers, double dropout)
    : input_width_(input_width), hidden_(hidden_size), layers_(layers), dropout_(dropout) {
  if (input_width <= 0) throw ConfigError("BiLSTM input width must be positive");
  if (hidden_size <= 0) throw ConfigError("BiLSTM hidden size must be positive");
  if (layers <= 0) throw ConfigError("BiLSTM layer count must be positive");
  if (!(dropout >= 0.0 && dropout < 1.0)) throw ConfigError("dropout must be in [0, 1)");
  for (int l = 0; l < layers; ++l) {
    const int in = l == 0 ? input_width : 2 * hidden_size;
    for (const char* dir : {"fwd", "bwd"}) {
      params_.add(fmt::format("lstm{}.{}.wx", l, dir), 4 * hidden_size, in);
      params_.add(fmt::format("lstm{}.{}.wh", l, dir), 4 * hidden_size, hidden_size);
      params_.add(fmt::format("lstm{}.{}.bias", l, dir), 4 * hidden_size, 1);
    }
  }
  classifier_w_ = params_.add("classifier.weight", 1, 2 * hidden_size);
  classifier_b_ = params_.add("classifier.bias", 1, 1);
}

BiLstmNet::Direction BiLstmNet::direction(int layer, int dir) const {
  const std::size_t base = static_cast<std::size_t>(6 * layer + 3 * dir);
  return {base, base + 1, base + 2};
}

void BiLstmNet::initialize(Rng& rng) {
  const double limit = 1.0 / std::sqrt(static_cast<double>(hidden_));
  for (int l = 0; l < layers_; ++l) {
    for (int d = 0; d < 2; ++d) {
      Direction p = direction(l, d);
      fill_uniform(params_[p.wx], rng, limit);
      fill_uniform(params_[p.wh], rng, limit);
      params_[p.b].setZero();
      params_[p.b].block(hidden_, 0, hidden_, 1).setOnes();
    }
  }
  MatrixXd& w = params_[classifier_w_];
  fill_uniform(w, rng, std::sqrt(6.0 / static_cast<double>(w.rows() + w.cols())));
  params_[classifier_b_].setZero();
}

double BiLstmNet::forward(const MatrixXd& sequence, Rng* dropout_rng, Trace* trace) const {
  if (sequence.rows() == 0) throw DataError("BiLSTM input sequence is empty");
  if (sequence.cols() != input_width_) {
    throw DataError(fmt::format("BiLSTM expects {} input features, got {}", input_width_,
                                sequence.cols()));
  }
  const Eigen::Index T = sequence.rows();
  const int H = hidden_;
  if (trace) trace->layers.resize(static_cast<std::size_t>(layers_));

  MatrixXd input = sequence;
  for (int l = 0; l < layers_; ++l) {
    if (l > 0) {
      MatrixXd mask = dropout_mask(input.rows(), input.cols(), dropout_, dropout_rng);
      input = input.cwiseProduct(mask);
      if (trace) trace->layers[l].input_mask = std::move(mask);
    }
    MatrixXd output(T, 2 * H);
    for (int d = 0; d < 2; ++d) {
      const Direction p = direction(l, d);
      const MatrixXd& wx = params_[p.wx];
      const MatrixXd& wh = params_[p.wh];
      const auto b = params_[p.b].col(0);
      VectorXd h = VectorXd::Zero(H), c = VectorXd::Zero(H);
      if (trace) trace->layers[l].steps[d].resize(static_cast<std::size_t>(T));
      for (Eigen::Index k = 0; k < T; ++k) {
        const Eigen::Index t = d == 0 ? k : T - 1 - k;
        VectorXd x = input.row(t).transpose();
        VectorXd z = wx * x + wh * h + b;
        VectorXd i = logistic(z.segment(0, H));
        VectorXd f = logistic(z.segment(H, H));
        VectorXd g = z.segment(2 * H, H).array().tanh();
        VectorXd o = logistic(z.segment(3 * H, H));
        VectorXd c_new = f.cwiseProduct(c) + i.cwiseProduct(g);
        VectorXd h_new = o.cwiseProduct(VectorXd(c_new.array().tanh()));
        if (trace) {
          trace->layers[l].steps[d][t] = Step{std::move(x), h, c, i, f, g, o, c_new, h_new};
        }
        h = std::move(h_new);
        c = std::move(c_new);
        output.block(t, d * H, 1, H) = h.transpose();
      }
    }
    input = std::move(output);
  }

  VectorXd pooled(2 * H);
  pooled.head(H) = input.block(T - 1, 0, 1, H).transpose();
  pooled.tail(H) = input.block(0, H, 1, H).transpose();
  if (trace) {
    trace->pooled_mask = dropout_mask(2 * H, 1, dropout_, dropout_rng).col(0);
    pooled = pooled.cwiseProduct(trace->pooled_mask);
    trace->pooled = pooled;
  }
  return (params_[classifier_w_] * pooled)(0, 0) + params_[classifier_b_](0, 0);
}

double BiLstmNet::logit(const MatrixXd& sequence) const {
  return forward(sequence, nullptr, nullptr);
}

double BiLstmNet::accumulate_gradient(const MatrixXd& sequence, double label, Rng* dropout_rng,
                                      Parameters& grads) const {
  Trace trace;
  const double z = forward(sequence, dropout_rng, &trace);
  const double loss = bce_with_logit(z, label);
  const double dz = sigmoid(z) - label;
  const Eigen::Index T = sequence.rows();
  const int H = hidden_;

  grads[classifier_w_] += dz * trace.pooled.transpose();
  grads[classifier_b_](0, 0) += dz;
  VectorXd dpooled = (params_[classifier_w_].transpose() * dz).col(0).cwiseProduct(trace.pooled_mask);

  // Gradient w.r.t. the current layer's output sequence.
  MatrixXd d_out = MatrixXd::Zero(T, 2 * H);
  d_out.block(T - 1, 0, 1, H) += dpooled.head(H).transpose();
  d_out.block(0, H, 1, H) += dpooled.tail(H).transpose();

  for (int l = layers_ - 1; l >= 0; --l) {
    const int in = l == 0 ? input_width_ : 2 * H;
    MatrixXd d_in = MatrixXd::Zero(T, in);
    for (int d = 0; d < 2; ++d) {
      const Direction p = direction(l, d);
      const MatrixXd& wx = params_[p.wx];
      const MatrixXd& wh = params_[p.wh];
      VectorXd dh_next = VectorXd::Zero(H), dc_next = VectorXd::Zero(H);
      // Walk time in the reverse of the processing order.
      for (Eigen::Index k = T; k-- > 0;) {
        const Eigen::Index t = d == 0 ? k : T - 1 - k;
        const Step& s = trace.layers[l].steps[d][t];
        VectorXd dh = d_out.block(t, d * H, 1, H).transpose() + dh_next;
        VectorXd tc = s.c.array().tanh();
        VectorXd d_o = dh.cwiseProduct(tc);
        VectorXd dc = dh.cwiseProduct(s.o).cwiseProduct((1.0 - tc.array().square()).matrix()) + dc_next;
        VectorXd d_f = dc.cwiseProduct(s.c_prev);
        VectorXd d_i = dc.cwiseProduct(s.g);
        VectorXd d_g = dc.cwiseProduct(s.i);
        dc_next = dc.cwiseProduct(s.f);

        VectorXd dz_gates(4 * H);
        dz_gates.segment(0, H) = d_i.array() * s.i.array() * (1.0 - s.i.array());
        dz_gates.segment(H, H) = d_f.array() * s.f.array() * (1.0 - s.f.array());
        dz_gates.segment(2 * H, H) = d_g.array() * (1.0 - s.g.array().square());
        dz_gates.segment(3 * H, H) = d_o.array() * s.o.array() * (1.0 - s.o.array());

        grads[p.wx] += dz_gates * s.x.transpose();
        grads[p.wh] += dz_gates * s.h_prev.transpose();
        grads[p.b].col(0) += dz_gates;
        d_in.row(t) += (wx.transpose() * dz_gates).transpose();
        dh_next = wh.transpose() * dz_gates;
      }
    }
    if (l > 0) d_out = d_in.cwiseProduct(trace.layers[l].input_mask);
  }
  return loss;
}

}  // namespace trivote
