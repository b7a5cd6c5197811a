#ifndef IVAE_HARNESS_SELFTEST_H_
#define IVAE_HARNESS_SELFTEST_H_

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "model/intact_vae.h"

namespace ivae {

struct SelfTestCheck {
  std::string name;
  bool passed = false;
  std::string detail;
};

// Numerical checks of the core: network and ELBO gradients against central
// differences (relative error 1e-4), closed-form KL against a 1e5-sample
// Monte Carlo estimate (3 standard errors), and the ELBO of a linear
// Gaussian model against its exact log marginal. `on_check` is called after
// each check.
std::vector<SelfTestCheck> RunSelfTest(
    std::uint64_t seed,
    const std::function<void(const SelfTestCheck&)>& on_check = {});

// Scalar linear Gaussian model  z ~ N(prior_mean, prior_variance),
// y | z ~ N(slope * z + offset, noise_variance), written as an IntactVae with
// affine networks; x and t are ignored. The encoder is set to the exact
// posterior of y.
struct LinearGaussianSpec {
  double prior_mean = 0.3;
  double prior_variance = 1.5;
  double slope = 1.2;
  double offset = -0.4;
  double noise_variance = 0.5;
};
IntactVae MakeLinearGaussianVae(const LinearGaussianSpec& spec);

}  // namespace ivae

#endif  // IVAE_HARNESS_SELFTEST_H_
