#include "synth/quadrature.h"

#include <cmath>
#include <map>
#include <mutex>

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "common/errors.h"

namespace ivae {

const GaussHermiteRule& GaussHermite(int order) {
  if (order < 1 || order > 256) {
    throw InvalidArgument("Gauss-Hermite order must be in [1, 256]");
  }
  static std::mutex mutex;
  static std::map<int, GaussHermiteRule> cache;
  std::lock_guard<std::mutex> lock(mutex);
  auto it = cache.find(order);
  if (it != cache.end()) return it->second;

  // Jacobi matrix of the probabilists' Hermite polynomials.
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(order, order);
  for (int k = 1; k < order; ++k) {
    jacobi(k, k - 1) = jacobi(k - 1, k) = std::sqrt(static_cast<double>(k));
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(jacobi);
  GaussHermiteRule rule;
  for (int i = 0; i < order; ++i) {
    rule.nodes.push_back(solver.eigenvalues()[i]);
    const double v = solver.eigenvectors()(0, i);
    rule.weights.push_back(v * v);
  }
  return cache.emplace(order, std::move(rule)).first->second;
}

double GaussianExpectation(const std::function<double(double)>& f, double mean,
                           double variance, int order) {
  if (!(variance >= 0.0)) throw InvalidArgument("variance must be >= 0");
  if (variance == 0.0) return f(mean);
  const GaussHermiteRule& rule = GaussHermite(order);
  const double sd = std::sqrt(variance);
  double sum = 0.0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    sum += rule.weights[i] * f(mean + sd * rule.nodes[i]);
  }
  return sum;
}

Integral AdaptiveGaussianExpectation(const std::function<double(double)>& f,
                                     double mean, double variance,
                                     double tolerance) {
  if (!(variance >= 0.0)) throw InvalidArgument("variance must be >= 0");
  if (variance == 0.0) return {f(mean), 0.0};
  const double sd = std::sqrt(variance);
  const double inv_sqrt_2pi = 0.3989422804014327;
  auto integrand = [&](double u) {
    return f(mean + sd * u) * inv_sqrt_2pi * std::exp(-0.5 * u * u);
  };
  Integral out;
  out.value = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
      integrand, -12.0, 12.0, 20, tolerance, &out.error);
  return out;
}

}  // namespace ivae
