#ifndef IVAE_NN_ADAM_H_
#define IVAE_NN_ADAM_H_

#include <cstdint>
#include <span>
#include <vector>

namespace ivae {

struct AdamOptions {
  double learning_rate = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// Adam with bias correction. Performs descent: params -= lr * m_hat /
// (sqrt(v_hat) + eps).
class AdamState {
 public:
  AdamState() = default;
  AdamState(std::size_t num_params, AdamOptions options);

  // Throws InvalidArgument on size mismatch and NumericError (naming the
  // first offending index) when a gradient is not finite; the state is left
  // untouched in both cases.
  void Step(std::span<double> params, std::span<const double> grads);

  std::int64_t step_count() const { return step_count_; }
  const AdamOptions& options() const { return options_; }
  const std::vector<double>& first_moment() const { return first_moment_; }
  const std::vector<double>& second_moment() const { return second_moment_; }

 private:
  AdamOptions options_;
  std::vector<double> first_moment_;
  std::vector<double> second_moment_;
  std::int64_t step_count_ = 0;
};

}  // namespace ivae

#endif  // IVAE_NN_ADAM_H_
