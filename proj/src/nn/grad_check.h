#ifndef IVAE_NN_GRAD_CHECK_H_
#define IVAE_NN_GRAD_CHECK_H_

#include <cstddef>
#include <functional>
#include <span>

#include <Eigen/Dense>

#include "nn/mlp.h"

namespace ivae {

struct GradCheckReport {
  bool passed = true;
  double worst_relative_error = 0.0;
  std::size_t worst_index = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
  std::size_t num_checked = 0;
};

// |analytic - numeric| / max(|analytic|, |numeric|, kGradCheckFloor).
inline constexpr double kGradCheckFloor = 1e-6;
double RelativeError(double analytic, double numeric);

enum class Stencil {
  kCentral,      // (f(+h) - f(-h)) / 2h
  kFourthOrder,  // five-point; truncation O(h^4), so larger steps are usable
};

// Finite differences of `objective` with respect to each entry of `params`
// (perturbed in place and restored), compared against `analytic`.
GradCheckReport CompareWithFiniteDifferences(
    std::span<double> params, std::span<const double> analytic,
    const std::function<double()>& objective, double tolerance,
    double step = 1e-5, Stencil stencil = Stencil::kCentral);

// Checks Mlp::Backward for the scalar cotangent . Forward(input). A null
// cotangent means all ones. Parameters are checked first, then inputs; the
// report's index runs over that concatenation.
GradCheckReport GradCheck(const Mlp& net, const Eigen::VectorXd& input,
                          double tolerance, double step = 1e-5,
                          const Eigen::VectorXd* cotangent = nullptr);

// Same comparison with an externally supplied parameter gradient (used to
// exercise the checker itself).
GradCheckReport GradCheckAgainst(const Mlp& net, const Eigen::VectorXd& input,
                                 const Eigen::VectorXd& analytic_param_grad,
                                 double tolerance, double step = 1e-5,
                                 const Eigen::VectorXd* cotangent = nullptr);

}  // namespace ivae

#endif  // IVAE_NN_GRAD_CHECK_H_
