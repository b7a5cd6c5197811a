#include "nn/grad_check.h"

#include <algorithm>
#include <cmath>

#include "common/errors.h"

namespace ivae {

double RelativeError(double analytic, double numeric) {
  const double scale =
      std::max({std::abs(analytic), std::abs(numeric), kGradCheckFloor});
  return std::abs(analytic - numeric) / scale;
}

GradCheckReport CompareWithFiniteDifferences(
    std::span<double> params, std::span<const double> analytic,
    const std::function<double()>& objective, double tolerance, double step,
    Stencil stencil) {
  if (params.size() != analytic.size()) {
    throw InvalidArgument("gradient check: size mismatch");
  }
  if (!(tolerance > 0.0) || !(step > 0.0)) {
    throw InvalidArgument("gradient check: tolerance and step must be > 0");
  }
  GradCheckReport report;
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double original = params[i];
    auto at = [&](double delta) {
      params[i] = original + delta;
      const double value = objective();
      params[i] = original;
      return value;
    };
    const double d1 = at(step) - at(-step);
    double numeric = d1 / (2.0 * step);
    if (stencil == Stencil::kFourthOrder) {
      const double d2 = at(2.0 * step) - at(-2.0 * step);
      numeric = (8.0 * d1 - d2) / (12.0 * step);
    }
    const double err = RelativeError(analytic[i], numeric);
    // NaN compares false, so it always becomes the worst entry.
    if (i == 0 || !(err <= report.worst_relative_error)) {
      report.worst_relative_error = err;
      report.worst_index = i;
      report.worst_analytic = analytic[i];
      report.worst_numeric = numeric;
    }
    ++report.num_checked;
  }
  report.passed = report.worst_relative_error <= tolerance;
  return report;
}

namespace {

GradCheckReport CheckNet(const Mlp& net, const Eigen::VectorXd& input,
                         const Eigen::VectorXd& param_grad,
                         const Eigen::VectorXd& input_grad, double tolerance,
                         double step, const Eigen::VectorXd& cot) {
  Mlp probe = net;
  Eigen::VectorXd x = input;
  auto objective = [&]() { return cot.dot(probe.Forward(x)); };
  GradCheckReport params_report = CompareWithFiniteDifferences(
      probe.params(),
      {param_grad.data(), static_cast<std::size_t>(param_grad.size())},
      objective, tolerance, step);
  GradCheckReport input_report = CompareWithFiniteDifferences(
      {x.data(), static_cast<std::size_t>(x.size())},
      {input_grad.data(), static_cast<std::size_t>(input_grad.size())},
      objective, tolerance, step);
  GradCheckReport report = params_report;
  report.num_checked += input_report.num_checked;
  if (input_report.worst_relative_error > report.worst_relative_error) {
    report.worst_relative_error = input_report.worst_relative_error;
    report.worst_index = net.num_params() + input_report.worst_index;
    report.worst_analytic = input_report.worst_analytic;
    report.worst_numeric = input_report.worst_numeric;
  }
  report.passed = report.worst_relative_error <= tolerance;
  return report;
}

Eigen::VectorXd ResolveCotangent(const Mlp& net, const Eigen::VectorXd* cot) {
  if (cot == nullptr) return Eigen::VectorXd::Ones(net.output_dim());
  if (cot->size() != net.output_dim()) {
    throw InvalidArgument("gradient check: cotangent size mismatch");
  }
  return *cot;
}

}  // namespace

GradCheckReport GradCheck(const Mlp& net, const Eigen::VectorXd& input,
                          double tolerance, double step,
                          const Eigen::VectorXd* cotangent) {
  const Eigen::VectorXd cot = ResolveCotangent(net, cotangent);
  const MlpGradient grad = net.Backward(input, cot);
  return CheckNet(net, input, grad.params, grad.input, tolerance, step, cot);
}

GradCheckReport GradCheckAgainst(const Mlp& net, const Eigen::VectorXd& input,
                                 const Eigen::VectorXd& analytic_param_grad,
                                 double tolerance, double step,
                                 const Eigen::VectorXd* cotangent) {
  const Eigen::VectorXd cot = ResolveCotangent(net, cotangent);
  if (analytic_param_grad.size() != static_cast<Eigen::Index>(net.num_params())) {
    throw InvalidArgument("gradient check: parameter gradient size mismatch");
  }
  const MlpGradient grad = net.Backward(input, cot);
  return CheckNet(net, input, analytic_param_grad, grad.input, tolerance, step,
                  cot);
}

}  // namespace ivae
