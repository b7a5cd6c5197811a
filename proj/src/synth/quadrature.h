#ifndef IVAE_SYNTH_QUADRATURE_H_
#define IVAE_SYNTH_QUADRATURE_H_

#include <functional>
#include <vector>

namespace ivae {

// Gauss-Hermite rule for the standard normal weight: E[f(Z)], Z ~ N(0, 1),
// is approximated by sum_i weights[i] * f(nodes[i]).
struct GaussHermiteRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

// Golub-Welsch construction; results are cached per order.
const GaussHermiteRule& GaussHermite(int order);

// E[f(X)], X ~ N(mean, variance), with an `order`-point rule. A zero
// variance evaluates f(mean) directly.
double GaussianExpectation(const std::function<double(double)>& f, double mean,
                           double variance, int order);

struct Integral {
  double value = 0.0;
  double error = 0.0;  // estimated absolute error
};

// E[f(X)], X ~ N(mean, variance), by adaptive Gauss-Kronrod over mean +- 12
// standard deviations. Slower than a fixed rule but robust for integrands
// with sharp transitions, where Gauss-Hermite converges slowly.
Integral AdaptiveGaussianExpectation(const std::function<double(double)>& f,
                                     double mean, double variance,
                                     double tolerance);

}  // namespace ivae

#endif  // IVAE_SYNTH_QUADRATURE_H_
