#include "prob/diag_gaussian.h"

#include <cmath>
#include <numbers>

#include "common/errors.h"

namespace ivae {
namespace {

void CheckDims(const DiagGaussian& d, const Eigen::VectorXd& x,
               const char* what) {
  if (x.size() != d.dim()) {
    throw InvalidArgument(std::string(what) + ": dimension " +
                          std::to_string(x.size()) + " does not match " +
                          std::to_string(d.dim()));
  }
}

}  // namespace

Eigen::ArrayXXd VarianceFromRaw(const Eigen::ArrayXXd& raw) {
  return raw.unaryExpr([](double r) { return Softplus(r); }) + kVarianceFloor;
}

Eigen::ArrayXXd VarianceFromRawGrad(const Eigen::ArrayXXd& raw) {
  return raw.unaryExpr([](double r) { return Sigmoid(r); });
}

double RawFromVariance(double variance) {
  if (!(variance > kVarianceFloor)) {
    throw InvalidArgument("variance must exceed the variance floor");
  }
  return InverseSoftplus(variance - kVarianceFloor);
}

DiagGaussian::DiagGaussian(Eigen::VectorXd mean, Eigen::VectorXd variance)
    : mean_(std::move(mean)), variance_(std::move(variance)) {
  if (mean_.size() != variance_.size()) {
    throw InvalidArgument("DiagGaussian: mean and variance lengths differ");
  }
  for (Eigen::Index i = 0; i < variance_.size(); ++i) {
    if (!(variance_[i] > 0.0) || !std::isfinite(variance_[i]) ||
        !std::isfinite(mean_[i])) {
      throw InvalidArgument("DiagGaussian: entry " + std::to_string(i) +
                            " has non-finite mean or non-positive variance");
    }
  }
}

DiagGaussian DiagGaussian::FromRaw(Eigen::VectorXd mean,
                                   const Eigen::VectorXd& raw) {
  Eigen::VectorXd variance = VarianceFromRaw(raw.array()).matrix();
  return DiagGaussian(std::move(mean), std::move(variance));
}

double LogProb(const DiagGaussian& d, const Eigen::VectorXd& x) {
  CheckDims(d, x, "LogProb");
  const Eigen::ArrayXd v = d.variance().array();
  const Eigen::ArrayXd diff = x.array() - d.mean().array();
  return -0.5 * ((2.0 * std::numbers::pi * v).log() + diff.square() / v).sum();
}

double KlDivergence(const DiagGaussian& q, const DiagGaussian& p) {
  CheckDims(q, p.mean(), "KlDivergence");
  const Eigen::ArrayXd vq = q.variance().array();
  const Eigen::ArrayXd vp = p.variance().array();
  const Eigen::ArrayXd diff = q.mean().array() - p.mean().array();
  return 0.5 * ((vp / vq).log() + (vq + diff.square()) / vp - 1.0).sum();
}

Eigen::VectorXd Reparameterize(const DiagGaussian& d,
                               const Eigen::VectorXd& noise) {
  CheckDims(d, noise, "Reparameterize");
  return d.mean() + (d.variance().array().sqrt() * noise.array()).matrix();
}

LogProbGradient LogProbGrad(const DiagGaussian& d, const Eigen::VectorXd& x) {
  CheckDims(d, x, "LogProbGrad");
  const Eigen::ArrayXd v = d.variance().array();
  const Eigen::ArrayXd diff = x.array() - d.mean().array();
  LogProbGradient g;
  g.d_mean = (diff / v).matrix();
  g.d_variance = (0.5 * (diff.square() / v.square() - 1.0 / v)).matrix();
  g.d_x = -g.d_mean;
  return g;
}

KlGradient KlGrad(const DiagGaussian& q, const DiagGaussian& p) {
  CheckDims(q, p.mean(), "KlGrad");
  const Eigen::ArrayXd vq = q.variance().array();
  const Eigen::ArrayXd vp = p.variance().array();
  const Eigen::ArrayXd diff = q.mean().array() - p.mean().array();
  KlGradient g;
  g.d_q_mean = (diff / vp).matrix();
  g.d_p_mean = -g.d_q_mean;
  g.d_q_variance = (0.5 * (1.0 / vp - 1.0 / vq)).matrix();
  g.d_p_variance = (0.5 * (1.0 / vp - (vq + diff.square()) / vp.square())).matrix();
  return g;
}

ReparameterizeGradient ReparameterizeGrad(const DiagGaussian& d,
                                          const Eigen::VectorXd& noise) {
  CheckDims(d, noise, "ReparameterizeGrad");
  ReparameterizeGradient g;
  g.d_mean = Eigen::VectorXd::Ones(d.dim());
  g.d_variance = (noise.array() / (2.0 * d.variance().array().sqrt())).matrix();
  return g;
}

}  // namespace ivae
