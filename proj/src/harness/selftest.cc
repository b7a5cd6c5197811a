#include "harness/selftest.h"

#include <cmath>
#include <sstream>

#include "common/format.h"
#include "common/rng.h"
#include "nn/grad_check.h"
#include "prob/diag_gaussian.h"

namespace ivae {
namespace {

constexpr double kGradTolerance = 1e-4;

std::string Describe(const GradCheckReport& r) {
  std::ostringstream out;
  out << "worst relative error " << FormatDouble(r.worst_relative_error)
      << " (analytic " << FormatDouble(r.worst_analytic) << ", numeric "
      << FormatDouble(r.worst_numeric) << ") over " << r.num_checked
      << " entries";
  return out.str();
}

Eigen::MatrixXd Normal(int rows, int cols, Rng& rng) {
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = StandardNormal(rng);
  }
  return m;
}

SelfTestCheck MlpGradients(Activation activation, std::uint64_t seed) {
  Rng rng(seed);
  Mlp net({3, 16, 16, 2}, activation, seed);
  for (double& p : net.params()) p += 0.1 * StandardNormal(rng);
  const Eigen::VectorXd input = Normal(3, 1, rng);
  const Eigen::VectorXd cot = Normal(2, 1, rng);
  const GradCheckReport r = GradCheck(net, input, kGradTolerance, 1e-6, &cot);
  return {"gradient.mlp_" + std::string(ActivationName(activation)), r.passed,
          Describe(r)};
}

SelfTestCheck GaussianGradients(std::uint64_t seed) {
  Rng rng(seed);
  const int d = 3;
  Eigen::VectorXd params(4 * d + d);
  for (int i = 0; i < d; ++i) {
    params[i] = StandardNormal(rng);                 // q mean
    params[d + i] = 0.5 + Uniform(rng, 0.0, 1.0);    // q variance
    params[2 * d + i] = StandardNormal(rng);         // p mean
    params[3 * d + i] = 0.5 + Uniform(rng, 0.0, 1.0);  // p variance
    params[4 * d + i] = StandardNormal(rng);         // point
  }
  auto q = [&]() { return DiagGaussian(params.segment(0, d), params.segment(d, d)); };
  auto p = [&]() {
    return DiagGaussian(params.segment(2 * d, d), params.segment(3 * d, d));
  };
  auto objective = [&]() {
    return KlDivergence(q(), p()) + LogProb(q(), params.segment(4 * d, d));
  };
  const KlGradient kl = KlGrad(q(), p());
  const LogProbGradient lp = LogProbGrad(q(), params.segment(4 * d, d));
  Eigen::VectorXd analytic(params.size());
  analytic << kl.d_q_mean + lp.d_mean, kl.d_q_variance + lp.d_variance,
      kl.d_p_mean, kl.d_p_variance, lp.d_x;
  const GradCheckReport r = CompareWithFiniteDifferences(
      {params.data(), static_cast<std::size_t>(params.size())},
      {analytic.data(), static_cast<std::size_t>(analytic.size())}, objective,
      kGradTolerance, 1e-6);
  return {"gradient.gaussian_kl_logprob", r.passed, Describe(r)};
}

// Raises every variance head so no variance starts at the floor, where the
// ELBO reaches 1e4 and differences of it drown small gradient entries.
void LiftVariances(IntactVae* model) {
  auto lift = [](Mlp& net) { net.bias(net.num_layers() - 1).array() += 1.0; };
  lift(model->encoder_variance());
  lift(model->prior_variance());
  if (model->config().learn_decoder_noise) {
    lift(model->decoder_variance(0));
    if (model->config().separate_decoder_heads) lift(model->decoder_variance(1));
  }
}

SelfTestCheck ElboGradients(bool balanced, bool separate, std::uint64_t seed) {
  VaeConfig config;
  config.x_dim = 2;
  config.latent_dim = 2;
  config.hidden = {6, 6};
  config.activation = Activation::kInvertibleSmooth;
  config.balanced_prior = balanced;
  config.separate_decoder_heads = separate;
  config.seed = seed;
  IntactVae model(config);
  Rng rng(seed);
  for (Mlp* net : model.nets()) {
    for (double& p : net->params()) p += 0.05 * StandardNormal(rng);
  }
  LiftVariances(&model);
  const int n = 6;
  const int samples = 2;
  Batch batch;
  batch.x = Normal(config.x_dim, n, rng);
  batch.y = Normal(1, n, rng);
  for (int i = 0; i < n; ++i) batch.t.push_back(i % 2);
  const Eigen::MatrixXd noise = Normal(config.latent_dim, samples * n, rng);
  const ElboResult result = model.Elbo(batch, noise, samples, true);

  GradCheckReport worst;
  worst.passed = true;
  std::vector<Mlp*> nets = model.nets();
  for (std::size_t k = 0; k < nets.size(); ++k) {
    const GradCheckReport r = CompareWithFiniteDifferences(
        nets[k]->params(),
        {result.gradient[k].data(),
         static_cast<std::size_t>(result.gradient[k].size())},
        [&]() { return model.Elbo(batch, noise, samples, false).terms.elbo; },
        kGradTolerance, 1e-3, Stencil::kFourthOrder);
    if (k == 0 || r.worst_relative_error > worst.worst_relative_error) {
      const int checked = worst.num_checked;
      worst = r;
      worst.num_checked = checked;
    }
    worst.num_checked += r.num_checked;
  }
  worst.passed = worst.worst_relative_error <= kGradTolerance;
  std::string name = "gradient.elbo";
  name += balanced ? "_balanced" : "_conditional";
  name += separate ? "_separate_heads" : "_shared_heads";
  return {name, worst.passed, Describe(worst)};
}

SelfTestCheck KlMonteCarlo(std::uint64_t seed) {
  const Eigen::Vector2d qm(0.4, -1.1), qv(0.7, 1.8);
  const Eigen::Vector2d pm(-0.2, 0.5), pv(1.3, 0.6);
  const DiagGaussian q(qm, qv), p(pm, pv);
  const double closed = KlDivergence(q, p);
  Rng rng(seed);
  const int n = 100000;
  double sum = 0.0, sum_sq = 0.0;
  for (int i = 0; i < n; ++i) {
    Eigen::VectorXd z(2);
    z << qm[0] + std::sqrt(qv[0]) * StandardNormal(rng),
        qm[1] + std::sqrt(qv[1]) * StandardNormal(rng);
    const double v = LogProb(q, z) - LogProb(p, z);
    sum += v;
    sum_sq += v * v;
  }
  const double mean = sum / n;
  const double se = std::sqrt((sum_sq / n - mean * mean) / (n - 1));
  const double z_score = std::abs(mean - closed) / se;
  std::ostringstream out;
  out << "closed form " << FormatDouble(closed) << ", Monte Carlo "
      << FormatDouble(mean) << ", " << FormatDouble(z_score) << " standard errors";
  return {"kl.monte_carlo", z_score <= 3.0, out.str()};
}

double LogMarginal(const LinearGaussianSpec& s, double y) {
  const double mean = s.slope * s.prior_mean + s.offset;
  const double var = s.slope * s.slope * s.prior_variance + s.noise_variance;
  return -0.5 * (std::log(2.0 * M_PI * var) + (y - mean) * (y - mean) / var);
}

// With noise draws {+1, -1} the reconstruction term of a model whose decoder
// is affine in z equals its expectation, so the ELBO is exact.
double ExactElbo(const IntactVae& model, double y) {
  Batch batch;
  batch.x = Eigen::MatrixXd::Zero(model.config().x_dim, 1);
  batch.y = Eigen::MatrixXd::Constant(1, 1, y);
  batch.t = {0};
  Eigen::MatrixXd noise(1, 2);
  noise << 1.0, -1.0;
  return model.Elbo(batch, noise, 2, false).terms.elbo;
}

std::vector<SelfTestCheck> LinearGaussianChecks(std::uint64_t seed) {
  const LinearGaussianSpec spec;
  const IntactVae optimum = MakeLinearGaussianVae(spec);
  const std::vector<double> ys = {-2.0, -0.3, 0.0, 0.8, 2.5};
  double worst_gap = 0.0;
  for (double y : ys) {
    worst_gap = std::max(worst_gap, std::abs(ExactElbo(optimum, y) - LogMarginal(spec, y)));
  }
  std::vector<SelfTestCheck> checks;
  checks.push_back({"elbo.linear_gaussian_optimum", worst_gap <= 1e-3,
                    "max |ELBO - log p(y)| = " + FormatDouble(worst_gap)});

  Rng rng(seed);
  double worst_excess = -std::numeric_limits<double>::infinity();
  for (int trial = 0; trial < 200; ++trial) {
    IntactVae perturbed = optimum;
    const double scale = trial < 100 ? 0.05 : 1.0;
    for (Mlp* net : {&perturbed.encoder_mean(), &perturbed.encoder_variance()}) {
      for (double& p : net->params()) p += scale * StandardNormal(rng);
    }
    for (double y : ys) {
      worst_excess = std::max(worst_excess, ExactElbo(perturbed, y) - LogMarginal(spec, y));
    }
  }
  checks.push_back({"elbo.linear_gaussian_bound", worst_excess <= 1e-9,
                    "max ELBO - log p(y) over perturbed encoders = " +
                        FormatDouble(worst_excess)});
  return checks;
}

}  // namespace

IntactVae MakeLinearGaussianVae(const LinearGaussianSpec& s) {
  VaeConfig config;
  config.x_dim = 1;
  config.latent_dim = 1;
  config.hidden = {};
  config.activation = Activation::kIdentity;
  config.balanced_prior = true;
  config.separate_decoder_heads = false;
  config.learn_decoder_noise = false;
  config.decoder_noise_variance = s.noise_variance;
  IntactVae model(config);
  for (Mlp* net : model.nets()) {
    for (double& p : net->params()) p = 0.0;
  }
  model.prior_mean().bias(0)[0] = s.prior_mean;
  model.prior_variance().bias(0)[0] = RawFromVariance(s.prior_variance);
  model.decoder_mean(0).weight(0)(0, 0) = s.slope;
  model.decoder_mean(0).bias(0)[0] = s.offset;

  const double post_var =
      1.0 / (1.0 / s.prior_variance + s.slope * s.slope / s.noise_variance);
  // Encoder input is (x, y, t).
  model.encoder_mean().weight(0)(0, 1) = post_var * s.slope / s.noise_variance;
  model.encoder_mean().bias(0)[0] =
      post_var * (s.prior_mean / s.prior_variance - s.slope * s.offset / s.noise_variance);
  model.encoder_variance().bias(0)[0] = RawFromVariance(post_var);
  return model;
}

std::vector<SelfTestCheck> RunSelfTest(
    std::uint64_t seed, const std::function<void(const SelfTestCheck&)>& on_check) {
  std::vector<SelfTestCheck> checks;
  auto add = [&](SelfTestCheck check) {
    if (on_check) on_check(check);
    checks.push_back(std::move(check));
  };
  add(MlpGradients(Activation::kRelu, DeriveSeed(seed, 1, 0)));
  add(MlpGradients(Activation::kInvertibleSmooth, DeriveSeed(seed, 1, 1)));
  add(GaussianGradients(DeriveSeed(seed, 2, 0)));
  add(ElboGradients(true, false, DeriveSeed(seed, 3, 0)));
  add(ElboGradients(false, true, DeriveSeed(seed, 3, 1)));
  add(KlMonteCarlo(DeriveSeed(seed, 4, 0)));
  for (SelfTestCheck& c : LinearGaussianChecks(DeriveSeed(seed, 5, 0))) {
    add(std::move(c));
  }
  return checks;
}

}  // namespace ivae
