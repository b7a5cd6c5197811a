#ifndef IVAE_PROB_DIAG_GAUSSIAN_H_
#define IVAE_PROB_DIAG_GAUSSIAN_H_

#include <cmath>

#include <Eigen/Dense>

namespace ivae {

// Lower bound added to every network-produced variance.
inline constexpr double kVarianceFloor = 1e-4;

inline double Softplus(double x) {
  return x > 30.0 ? x : std::log1p(std::exp(x));
}
inline double Sigmoid(double x) {
  return x >= 0.0 ? 1.0 / (1.0 + std::exp(-x))
                  : std::exp(x) / (1.0 + std::exp(x));
}
// Inverse of Softplus for y > 0.
inline double InverseSoftplus(double y) {
  return y > 30.0 ? y : std::log(std::expm1(y));
}

// Positivity map from a raw network output to a variance:
// softplus(raw) + kVarianceFloor.
Eigen::ArrayXXd VarianceFromRaw(const Eigen::ArrayXXd& raw);
// d variance / d raw.
Eigen::ArrayXXd VarianceFromRawGrad(const Eigen::ArrayXXd& raw);
// Raw value whose variance is `variance` (which must exceed the floor).
double RawFromVariance(double variance);

// Product of independent 1-d Gaussians.
class DiagGaussian {
 public:
  // Variances must be finite and strictly positive; lengths must agree.
  DiagGaussian(Eigen::VectorXd mean, Eigen::VectorXd variance);
  // mean, softplus(raw) + kVarianceFloor.
  static DiagGaussian FromRaw(Eigen::VectorXd mean, const Eigen::VectorXd& raw);

  int dim() const { return static_cast<int>(mean_.size()); }
  const Eigen::VectorXd& mean() const { return mean_; }
  const Eigen::VectorXd& variance() const { return variance_; }

  friend bool operator==(const DiagGaussian& a, const DiagGaussian& b) {
    return a.mean_ == b.mean_ && a.variance_ == b.variance_;
  }

 private:
  Eigen::VectorXd mean_;
  Eigen::VectorXd variance_;
};

double LogProb(const DiagGaussian& d, const Eigen::VectorXd& x);

// KL(q || p), closed form.
double KlDivergence(const DiagGaussian& q, const DiagGaussian& p);

// mean + sqrt(variance) .* noise.
Eigen::VectorXd Reparameterize(const DiagGaussian& d,
                               const Eigen::VectorXd& noise);

struct LogProbGradient {
  Eigen::VectorXd d_mean;
  Eigen::VectorXd d_variance;
  Eigen::VectorXd d_x;
};
LogProbGradient LogProbGrad(const DiagGaussian& d, const Eigen::VectorXd& x);

struct KlGradient {
  Eigen::VectorXd d_q_mean;
  Eigen::VectorXd d_q_variance;
  Eigen::VectorXd d_p_mean;
  Eigen::VectorXd d_p_variance;
};
KlGradient KlGrad(const DiagGaussian& q, const DiagGaussian& p);

struct ReparameterizeGradient {
  Eigen::VectorXd d_mean;      // Jacobian diagonal, all ones
  Eigen::VectorXd d_variance;  // noise / (2 sqrt(variance))
};
ReparameterizeGradient ReparameterizeGrad(const DiagGaussian& d,
                                          const Eigen::VectorXd& noise);

}  // namespace ivae

#endif  // IVAE_PROB_DIAG_GAUSSIAN_H_
