#include "trivote/optimizer.hpp"

#include <cmath>

#include <fmt/format.h>

#include "trivote/error.hpp"

namespace trivote {

std::string_view to_string(OptimizerKind k) { return k == OptimizerKind::kSgd ? "sgd" : "adam"; }

OptimizerKind parse_optimizer(std::string_view s) {
  if (s == "sgd") return OptimizerKind::kSgd;
  if (s == "adam") return OptimizerKind::kAdam;
  throw ConfigError(fmt::format("unknown optimizer '{}' (expected sgd or adam)", s));
}

Optimizer::Optimizer(OptimizerKind kind, double learning_rate, const Parameters& layout)
    : kind_(kind), lr_(learning_rate) {
  if (kind_ == OptimizerKind::kAdam) {
    m_ = layout.zeros_like();
    v_ = layout.zeros_like();
  }
}

void Optimizer::step(Parameters& params, const Parameters& grads) {
  if (kind_ == OptimizerKind::kSgd) {
    params.add_scaled(grads, -lr_);
    return;
  }
  constexpr double kBeta1 = 0.9, kBeta2 = 0.999, kEps = 1e-8;
  ++steps_;
  const double c1 = 1.0 - std::pow(kBeta1, static_cast<double>(steps_));
  const double c2 = 1.0 - std::pow(kBeta2, static_cast<double>(steps_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    m_[i] = kBeta1 * m_[i] + (1.0 - kBeta1) * grads[i];
    v_[i] = kBeta2 * v_[i] + (1.0 - kBeta2) * grads[i].cwiseProduct(grads[i]);
    params[i].array() -= lr_ * (m_[i].array() / c1) / ((v_[i].array() / c2).sqrt() + kEps);
  }
}

}  // namespace trivote
