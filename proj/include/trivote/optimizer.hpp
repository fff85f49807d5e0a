#ifndef TRIVOTE_OPTIMIZER_HPP
#define TRIVOTE_OPTIMIZER_HPP

#include <string_view>

#include "trivote/parameters.hpp"

namespace trivote {

enum class OptimizerKind { kSgd, kAdam };

std::string_view to_string(OptimizerKind k);
// Throws ConfigError for anything but "sgd" or "adam".
OptimizerKind parse_optimizer(std::string_view s);

// Plain gradient descent, or Adam (beta1 0.9, beta2 0.999, eps 1e-8).
class Optimizer {
 public:
  Optimizer(OptimizerKind kind, double learning_rate, const Parameters& layout);

  // params -= update(grads)
  void step(Parameters& params, const Parameters& grads);

 private:
  OptimizerKind kind_;
  double lr_;
  long steps_ = 0;
  Parameters m_, v_;
};

}  // namespace trivote

#endif  // TRIVOTE_OPTIMIZER_HPP
