#ifndef IVAE_SYNTH_SYNTH_H_
#define IVAE_SYNTH_SYNTH_H_

#include <array>
#include <cstdint>
#include <memory>
#include <mutex>
#include <string_view>

#include <Eigen/Dense>

#include "common/rng.h"
#include "data/dataset.h"
#include "nn/mlp.h"

namespace ivae {

enum class CausalSetting {
  // t depends on the latent only; x is a noisy proxy of it.
  kProxyConfounded,
  // z is driven by a separate hidden source w; t depends on (x, z), so x acts
  // as an instrument.
  kInstrumental,
  // t depends on x only.
  kIgnorable,
};

enum class OutcomeKind { kLinear, kNonlinearInvertible };

std::string_view SettingName(CausalSetting setting);
CausalSetting ParseSetting(std::string_view name);
std::string_view OutcomeKindName(OutcomeKind kind);
OutcomeKind ParseOutcomeKind(std::string_view name);

struct SynthSpec {
  std::uint64_t seed = 0;
  CausalSetting setting = CausalSetting::kProxyConfounded;
  OutcomeKind outcome_kind = OutcomeKind::kNonlinearInvertible;
  double alpha = 0.2;  // outcome noise variance, in [0, 1)
  double beta = 0.2;   // latent noise scale, >= 0
  int covariate_dim = 3;
  int n_points = 1500;

  void Validate() const;
};

// Pilot sample size used to calibrate scales and normalizers.
inline constexpr int kPilotSize = 10000;

// The seeded generating law:
//   x_i ~ N(mu_i, sigma_i)                     (sigma_i is a variance)
//   z | s ~ N(h(s), beta * kappa * softplus(k(s)))   s = x, or w (instrumental)
//   t | x, z ~ Bern(sigmoid(l(.)))
//   y(t) | z ~ N(f_t(z) / C_t, alpha)
// h, k, l are affine with coefficients drawn uniformly in (-1, 1), then
// standardized on a pilot draw; f_t is affine or a monotone network.
class GeneratingModel {
 public:
  static GeneratingModel Build(const SynthSpec& spec);

  const SynthSpec& spec() const { return spec_; }

  const Eigen::VectorXd& covariate_mean() const { return cov_mean_; }
  const Eigen::VectorXd& covariate_variance() const { return cov_var_; }

  // Source feeding the latent: x itself, or the hidden w for kInstrumental.
  int source_dim() const { return static_cast<int>(h_weights_.size()); }
  double LatentMean(const Eigen::VectorXd& source) const;
  double LatentVariance(const Eigen::VectorXd& source) const;
  double PropensityLogit(const Eigen::VectorXd& x, double z) const;
  double Propensity(const Eigen::VectorXd& x, double z) const;

  // f_t(z) before normalization.
  double RawOutcome(double z, int t) const;
  // f_t(z) / C_t.
  double OutcomeMean(double z, int t) const;
  Eigen::ArrayXd OutcomeMean(const Eigen::ArrayXd& z, int t) const;
  double normalizer(int t) const { return normalizer_[t]; }

  // Linear outcome coefficients (meaningful for OutcomeKind::kLinear).
  double linear_slope(int t) const { return slope_[t]; }
  double linear_intercept(int t) const { return intercept_[t]; }
  const Mlp& outcome_net(int t) const { return outcome_nets_[t]; }

  // Hidden-source law for kInstrumental.
  double source_mean() const { return w_mean_; }
  double source_variance() const { return w_var_; }

  // Overrides used by tests to build degenerate configurations.
  void SetOutcomeNormalizers(double c0, double c1) {
    normalizer_ = {c0, c1};
    ResetCache();
  }
  // Copies the control-arm outcome function onto the treated arm.
  void MakeArmsIdentical();

 private:
  friend CausalDataset Generate(const GeneratingModel& model);
  friend double TrueCate(const GeneratingModel& model, const Eigen::VectorXd& x);
  GeneratingModel() = default;
  void ResetCache() { constant_cate_ = std::make_shared<ConstantCate>(); }
  Eigen::VectorXd DrawSource(const Eigen::VectorXd& x, Rng& rng) const;

  SynthSpec spec_;
  Eigen::VectorXd cov_mean_, cov_var_;
  double w_mean_ = 0.0, w_var_ = 0.0;
  Eigen::VectorXd h_weights_;
  double h_offset_ = 0.0;
  Eigen::VectorXd k_weights_;
  double k_offset_ = 0.0;
  double k_scale_ = 1.0;
  Eigen::VectorXd l_x_weights_;  // empty unless t depends on x
  double l_z_weight_ = 0.0;
  double l_offset_ = 0.0;
  std::array<double, 2> slope_ = {1.0, 1.0};
  std::array<double, 2> intercept_ = {0.0, 0.0};
  std::array<Mlp, 2> outcome_nets_;
  std::array<double, 2> normalizer_ = {1.0, 1.0};

  // Under kInstrumental tau(x) does not depend on x; it is integrated once.
  struct ConstantCate {
    std::once_flag once;
    double value = 0.0;
    std::exception_ptr error;
  };
  std::shared_ptr<ConstantCate> constant_cate_ = std::make_shared<ConstantCate>();
};

// Draws spec.n_points units. The first third of the units is the training
// split, the second third validation, the rest testing.
CausalDataset Generate(const SynthSpec& spec);
CausalDataset Generate(const GeneratingModel& model);

// tau(x) = E[f_1(z)/C_1 - f_0(z)/C_0 | x] under the generating law, by
// adaptive quadrature against the latent density. Throws NumericError when
// the error estimate exceeds 1e-8 (relative).
double TrueCate(const GeneratingModel& model, const Eigen::VectorXd& x);

}  // namespace ivae

#endif  // IVAE_SYNTH_SYNTH_H_
