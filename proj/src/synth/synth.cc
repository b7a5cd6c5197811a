#include "synth/synth.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "common/errors.h"
#include "prob/diag_gaussian.h"
#include "synth/quadrature.h"

namespace ivae {
namespace {

constexpr std::uint64_t kModelStream = 0x6d6f64656c;   // "model"
constexpr std::uint64_t kPilotStream = 0x70696c6f74;   // "pilot"
constexpr std::uint64_t kDataStream = 0x64617461;      // "data"
constexpr std::uint64_t kOutcomeStream = 0x6f7574;     // "out"
constexpr double kMaxPilotLogit = 2.9444389791664403;  // logit(0.95)
constexpr int kOutcomeHidden = 16;

double PositiveUniform(Rng& rng, double hi) {
  double v = 0.0;
  while (v <= 0.0) v = Uniform(rng, 0.0, hi);
  return v;
}

Eigen::VectorXd UniformVector(Rng& rng, int n, double lo, double hi) {
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v[i] = Uniform(rng, lo, hi);
  return v;
}

struct Moments {
  double mean = 0.0;
  double sd = 0.0;
};

Moments ComputeMoments(const Eigen::ArrayXd& v) {
  Moments m;
  m.mean = v.mean();
  m.sd = std::sqrt((v - m.mean).square().sum() / std::max<Eigen::Index>(1, v.size() - 1));
  return m;
}

}  // namespace

std::string_view SettingName(CausalSetting setting) {
  switch (setting) {
    case CausalSetting::kProxyConfounded:
      return "proxy_confounded";
    case CausalSetting::kInstrumental:
      return "instrumental";
    case CausalSetting::kIgnorable:
      return "ignorable";
  }
  return "unknown";
}

CausalSetting ParseSetting(std::string_view name) {
  if (name == "proxy_confounded" || name == "conf") {
    return CausalSetting::kProxyConfounded;
  }
  if (name == "instrumental" || name == "inst") return CausalSetting::kInstrumental;
  if (name == "ignorable" || name == "ig") return CausalSetting::kIgnorable;
  throw InvalidArgument("unknown causal setting '" + std::string(name) + "'");
}

std::string_view OutcomeKindName(OutcomeKind kind) {
  return kind == OutcomeKind::kLinear ? "linear" : "nonlinear_invertible";
}

OutcomeKind ParseOutcomeKind(std::string_view name) {
  if (name == "linear") return OutcomeKind::kLinear;
  if (name == "nonlinear_invertible" || name == "nonlinear") {
    return OutcomeKind::kNonlinearInvertible;
  }
  throw InvalidArgument("unknown outcome kind '" + std::string(name) + "'");
}

void SynthSpec::Validate() const {
  if (!(alpha >= 0.0 && alpha < 1.0)) {
    throw InvalidArgument("alpha must lie in [0, 1)");
  }
  if (!(beta >= 0.0) || !std::isfinite(beta)) {
    throw InvalidArgument("beta must be finite and >= 0");
  }
  if (covariate_dim < 1) throw InvalidArgument("covariate_dim must be >= 1");
  if (n_points < 3) throw InvalidArgument("n_points must be >= 3");
}

Eigen::VectorXd GeneratingModel::DrawSource(const Eigen::VectorXd& x,
                                            Rng& rng) const {
  if (spec_.setting != CausalSetting::kInstrumental) return x;
  Eigen::VectorXd w(1);
  w[0] = w_mean_ + std::sqrt(w_var_) * StandardNormal(rng);
  return w;
}

double GeneratingModel::LatentMean(const Eigen::VectorXd& source) const {
  if (source.size() != h_weights_.size()) {
    throw InvalidArgument("latent source has the wrong dimension");
  }
  return h_weights_.dot(source) + h_offset_;
}

double GeneratingModel::LatentVariance(const Eigen::VectorXd& source) const {
  if (source.size() != k_weights_.size()) {
    throw InvalidArgument("latent source has the wrong dimension");
  }
  return spec_.beta * k_scale_ * Softplus(k_weights_.dot(source) + k_offset_);
}

double GeneratingModel::PropensityLogit(const Eigen::VectorXd& x,
                                        double z) const {
  double logit = l_offset_ + l_z_weight_ * z;
  if (l_x_weights_.size() != 0) {
    if (x.size() != l_x_weights_.size()) {
      throw InvalidArgument("covariate vector has the wrong dimension");
    }
    logit += l_x_weights_.dot(x);
  }
  return logit;
}

double GeneratingModel::Propensity(const Eigen::VectorXd& x, double z) const {
  return Sigmoid(PropensityLogit(x, z));
}

double GeneratingModel::RawOutcome(double z, int t) const {
  if (spec_.outcome_kind == OutcomeKind::kLinear) {
    return slope_[t] * z + intercept_[t];
  }
  Eigen::VectorXd in(1);
  in[0] = z;
  return outcome_nets_[t].Forward(in)[0];
}

double GeneratingModel::OutcomeMean(double z, int t) const {
  return RawOutcome(z, t) / normalizer_[t];
}

Eigen::ArrayXd GeneratingModel::OutcomeMean(const Eigen::ArrayXd& z,
                                            int t) const {
  if (spec_.outcome_kind == OutcomeKind::kLinear) {
    return (slope_[t] * z + intercept_[t]) / normalizer_[t];
  }
  const Eigen::MatrixXd in = z.matrix().transpose();
  return outcome_nets_[t].Forward(in, nullptr).row(0).transpose().array() /
         normalizer_[t];
}

void GeneratingModel::MakeArmsIdentical() {
  slope_[1] = slope_[0];
  intercept_[1] = intercept_[0];
  outcome_nets_[1] = outcome_nets_[0];
  normalizer_[1] = normalizer_[0];
  ResetCache();
}

GeneratingModel GeneratingModel::Build(const SynthSpec& spec) {
  spec.Validate();
  GeneratingModel model;
  model.spec_ = spec;
  const int m = spec.covariate_dim;
  Rng rng(DeriveSeed(spec.seed, kModelStream));

  model.cov_mean_ = UniformVector(rng, m, -0.2, 0.2);
  model.cov_var_.resize(m);
  for (int i = 0; i < m; ++i) model.cov_var_[i] = PositiveUniform(rng, 0.2);
  const bool instrumental = spec.setting == CausalSetting::kInstrumental;
  if (instrumental) {
    model.w_mean_ = Uniform(rng, -0.2, 0.2);
    model.w_var_ = PositiveUniform(rng, 0.2);
  }
  const int source_dim = instrumental ? 1 : m;
  const Eigen::VectorXd h_raw = UniformVector(rng, source_dim, -1.0, 1.0);
  const double h_offset = Uniform(rng, -1.0, 1.0);
  const Eigen::VectorXd k_raw = UniformVector(rng, source_dim, -1.0, 1.0);
  const double k_offset = Uniform(rng, -1.0, 1.0);
  const bool l_uses_x = spec.setting != CausalSetting::kProxyConfounded;
  const bool l_uses_z = spec.setting != CausalSetting::kIgnorable;
  const Eigen::VectorXd l_x_raw =
      l_uses_x ? UniformVector(rng, m, -1.0, 1.0) : Eigen::VectorXd();
  double l_z_raw = 0.0;
  if (l_uses_z) {
    while (std::abs(l_z_raw) < 0.1) l_z_raw = Uniform(rng, -1.0, 1.0);
  }
  for (int t = 0; t < 2; ++t) {
    if (spec.outcome_kind == OutcomeKind::kLinear) {
      double a = 0.0;
      while (std::abs(a) < 1e-3) a = Uniform(rng, -1.0, 1.0);
      model.slope_[t] = a;
      model.intercept_[t] = Uniform(rng, -1.0, 1.0);
    } else {
      Mlp net({1, kOutcomeHidden, kOutcomeHidden, 1}, Activation::kInvertibleSmooth,
              DeriveSeed(spec.seed, kOutcomeStream, t));
      net.MakeWeightsPositive();
      for (int l = 0; l < net.num_layers(); ++l) {
        auto b = net.bias(l);
        for (Eigen::Index i = 0; i < b.size(); ++i) b[i] = Uniform(rng, -1.0, 1.0);
      }
      model.outcome_nets_[t] = std::move(net);
    }
  }

  // Pilot draw: standardize h and k, scale the variance map to mean beta,
  // bound the pilot logits, and compute the outcome normalizers.
  Rng pilot(DeriveSeed(spec.seed, kPilotStream));
  Eigen::MatrixXd px(kPilotSize, m);
  Eigen::MatrixXd ps(kPilotSize, source_dim);
  for (int i = 0; i < kPilotSize; ++i) {
    for (int j = 0; j < m; ++j) {
      px(i, j) = model.cov_mean_[j] +
                 std::sqrt(model.cov_var_[j]) * StandardNormal(pilot);
    }
    ps.row(i) = model.DrawSource(px.row(i).transpose(), pilot).transpose();
  }
  const Moments hm = ComputeMoments((ps * h_raw).array());
  model.h_weights_ = h_raw / hm.sd;
  model.h_offset_ = h_offset - hm.mean / hm.sd;
  const Moments km = ComputeMoments((ps * k_raw).array());
  model.k_weights_ = k_raw / km.sd;
  model.k_offset_ = k_offset - km.mean / km.sd;
  double softplus_mean = 0.0;
  for (int i = 0; i < kPilotSize; ++i) {
    softplus_mean += Softplus(model.k_weights_.dot(ps.row(i).transpose()) +
                              model.k_offset_);
  }
  model.k_scale_ = kPilotSize / softplus_mean;

  Eigen::ArrayXd pz(kPilotSize);
  for (int i = 0; i < kPilotSize; ++i) {
    const Eigen::VectorXd s = ps.row(i).transpose();
    pz[i] = model.LatentMean(s) +
            std::sqrt(model.LatentVariance(s)) * StandardNormal(pilot);
  }
  Eigen::ArrayXd raw_logit = l_z_raw * pz;
  if (l_uses_x) raw_logit += (px * l_x_raw).array();
  const Moments lm = ComputeMoments(raw_logit);
  const double max_std = ((raw_logit - lm.mean) / lm.sd).abs().maxCoeff();
  const double c = kMaxPilotLogit / max_std;
  model.l_z_weight_ = c * l_z_raw / lm.sd;
  if (l_uses_x) model.l_x_weights_ = c * l_x_raw / lm.sd;
  model.l_offset_ = -c * lm.mean / lm.sd;

  std::array<std::vector<double>, 2> arm_z;
  for (int i = 0; i < kPilotSize; ++i) {
    const double p = model.Propensity(px.row(i).transpose(), pz[i]);
    const int t = Uniform(pilot, 0.0, 1.0) < p ? 1 : 0;
    arm_z[t].push_back(pz[i]);
  }
  for (int t = 0; t < 2; ++t) {
    const std::vector<double>& zs = arm_z[t].size() >= 2 ? arm_z[t] : arm_z[1 - t];
    Eigen::ArrayXd raw(static_cast<Eigen::Index>(zs.size()));
    for (std::size_t i = 0; i < zs.size(); ++i) raw[i] = model.RawOutcome(zs[i], t);
    const double sd = ComputeMoments(raw).sd;
    model.normalizer_[t] = sd > 0.0 ? sd : 1.0;
  }
  return model;
}

CausalDataset Generate(const SynthSpec& spec) {
  return Generate(GeneratingModel::Build(spec));
}

CausalDataset Generate(const GeneratingModel& model) {
  const SynthSpec& spec = model.spec();
  const int n = spec.n_points;
  const int m = spec.covariate_dim;
  Rng rng(DeriveSeed(spec.seed, kDataStream));
  CausalDataset data;
  data.x.resize(n, m);
  data.t.resize(n);
  data.y.resize(n);
  data.y0.resize(n);
  data.y1.resize(n);
  data.z_true.resize(n, 1);
  data.propensity.resize(n);
  data.split.resize(n);
  const double noise_sd = std::sqrt(spec.alpha);
  const int third = n / 3;
  for (int i = 0; i < n; ++i) {
    Eigen::VectorXd x(m);
    for (int j = 0; j < m; ++j) {
      x[j] = model.covariate_mean()[j] +
             std::sqrt(model.covariate_variance()[j]) * StandardNormal(rng);
    }
    const Eigen::VectorXd s = model.DrawSource(x, rng);
    const double z = model.LatentMean(s) +
                     std::sqrt(model.LatentVariance(s)) * StandardNormal(rng);
    const double p = model.Propensity(x, z);
    const int t = Uniform(rng, 0.0, 1.0) < p ? 1 : 0;
    const double e0 = StandardNormal(rng);
    const double e1 = StandardNormal(rng);
    data.x.row(i) = x.transpose();
    data.z_true(i, 0) = z;
    data.propensity[i] = p;
    data.t[i] = t;
    data.y0[i] = model.OutcomeMean(z, 0) + noise_sd * e0;
    data.y1[i] = model.OutcomeMean(z, 1) + noise_sd * e1;
    data.y[i] = t == 1 ? data.y1[i] : data.y0[i];
    data.split[i] = i < third ? Split::kTrain
                    : i < 2 * third ? Split::kValid
                                    : Split::kTest;
  }
  data.Validate();
  return data;
}

namespace {

constexpr double kCateTolerance = 1e-12;
constexpr double kCateMaxError = 1e-8;

struct CateEstimate {
  double value = 0.0;
  double error = 0.0;
};

CateEstimate LatentExpectation(const GeneratingModel& model,
                               const Eigen::VectorXd& source) {
  const Integral r = AdaptiveGaussianExpectation(
      [&](double z) { return model.OutcomeMean(z, 1) - model.OutcomeMean(z, 0); },
      model.LatentMean(source), model.LatentVariance(source), kCateTolerance);
  return {r.value, r.error};
}

double CheckedCate(const CateEstimate& cate) {
  if (!(cate.error <= kCateMaxError * std::max(1.0, std::abs(cate.value)))) {
    throw NumericError("TrueCate: quadrature did not converge (value " +
                       std::to_string(cate.value) + ", error estimate " +
                       std::to_string(cate.error) + ")");
  }
  return cate.value;
}

}  // namespace

double TrueCate(const GeneratingModel& model, const Eigen::VectorXd& x) {
  if (x.size() != model.spec().covariate_dim) {
    throw InvalidArgument("TrueCate: covariate vector has the wrong dimension");
  }
  if (model.spec().setting != CausalSetting::kInstrumental) {
    return CheckedCate(LatentExpectation(model, x));
  }
  GeneratingModel::ConstantCate& cache = *model.constant_cate_;
  std::call_once(cache.once, [&]() {
    try {
      // z depends on the hidden source only, so tau(x) averages over w.
      double inner_error = 0.0;
      const Integral outer = AdaptiveGaussianExpectation(
          [&](double w) {
            const CateEstimate c =
                LatentExpectation(model, Eigen::VectorXd::Constant(1, w));
            inner_error = std::max(inner_error, c.error);
            return c.value;
          },
          model.source_mean(), model.source_variance(), kCateTolerance);
      cache.value = CheckedCate({outer.value, outer.error + inner_error});
    } catch (...) {
      cache.error = std::current_exception();
    }
  });
  if (cache.error) std::rethrow_exception(cache.error);
  return cache.value;
}

}  // namespace ivae
