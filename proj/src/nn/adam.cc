#include "nn/adam.h"

#include <cmath>
#include <string>

#include "common/errors.h"

namespace ivae {

AdamState::AdamState(std::size_t num_params, AdamOptions options)
    : options_(options),
      first_moment_(num_params, 0.0),
      second_moment_(num_params, 0.0) {
  if (!(options.learning_rate >= 0.0) || !(options.beta1 >= 0.0) ||
      !(options.beta1 < 1.0) || !(options.beta2 >= 0.0) ||
      !(options.beta2 < 1.0) || !(options.epsilon > 0.0)) {
    throw InvalidArgument("invalid Adam hyperparameters");
  }
}

void AdamState::Step(std::span<double> params, std::span<const double> grads) {
  if (params.size() != first_moment_.size() ||
      grads.size() != first_moment_.size()) {
    throw InvalidArgument("Adam step: expected " +
                          std::to_string(first_moment_.size()) +
                          " parameters and gradients, got " +
                          std::to_string(params.size()) + " and " +
                          std::to_string(grads.size()));
  }
  for (std::size_t i = 0; i < grads.size(); ++i) {
    if (!std::isfinite(grads[i])) {
      throw NumericError("Adam step: non-finite gradient at index " +
                         std::to_string(i) + " (value " +
                         std::to_string(grads[i]) + ")");
    }
  }
  ++step_count_;
  const double b1 = options_.beta1;
  const double b2 = options_.beta2;
  const double correction1 = 1.0 - std::pow(b1, static_cast<double>(step_count_));
  const double correction2 = 1.0 - std::pow(b2, static_cast<double>(step_count_));
  const double lr = options_.learning_rate;
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = grads[i];
    first_moment_[i] = b1 * first_moment_[i] + (1.0 - b1) * g;
    second_moment_[i] = b2 * second_moment_[i] + (1.0 - b2) * g * g;
    const double m_hat = first_moment_[i] / correction1;
    const double v_hat = second_moment_[i] / correction2;
    params[i] -= lr * m_hat / (std::sqrt(v_hat) + options_.epsilon);
  }
}

}  // namespace ivae
