#ifndef IVAE_MODEL_INTACT_VAE_H_
#define IVAE_MODEL_INTACT_VAE_H_

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "nn/mlp.h"
#include "prob/diag_gaussian.h"

namespace ivae {

struct VaeConfig {
  int x_dim = 3;
  int y_dim = 1;
  int latent_dim = 1;
  std::vector<int> hidden = {200, 200, 200};
  Activation activation = Activation::kRelu;
  // Prior p(z|x) shared by both treatment groups instead of p(z|x,t).
  bool balanced_prior = true;
  // One decoder network pair per treatment arm instead of t as an input.
  bool separate_decoder_heads = false;
  bool learn_decoder_noise = true;
  // Outcome variance used when learn_decoder_noise is false.
  double decoder_noise_variance = 0.04;
  std::uint64_t seed = 0;

  // Throws InvalidArgument when a field is out of range.
  void Validate() const;
};

// One unit per column.
struct Batch {
  Eigen::MatrixXd x;   // x_dim x n
  Eigen::MatrixXd y;   // y_dim x n
  std::vector<int> t;  // n entries in {0, 1}

  int size() const { return static_cast<int>(t.size()); }
};

// Per-column diagonal Gaussians.
struct GaussianBatch {
  Eigen::MatrixXd mean;
  Eigen::MatrixXd variance;

  DiagGaussian column(Eigen::Index i) const {
    return DiagGaussian(mean.col(i), variance.col(i));
  }
};

struct ElboTerms {
  double reconstruction = 0.0;
  double kl = 0.0;
  double elbo = 0.0;  // reconstruction - kl
};

// ELBO gradient, one buffer per network in IntactVae::nets() order.
using ModelGradient = std::vector<Eigen::VectorXd>;

struct ElboResult {
  ElboTerms terms;            // batch means
  Eigen::VectorXd per_unit;   // per-unit ELBO
  ModelGradient gradient;     // d(batch-mean ELBO)/d params; empty if not requested
};

// Decoder p(y|z,t), conditional prior p(z|x) or p(z|x,t), and encoder
// q(z|x,y,t), each a pair of networks (mean, raw variance). All public calls
// work in the model's external latent coordinates z = scale .* z_net + shift;
// the affine map starts at the identity and only changes through
// ApplyAffineEquivalence.
class IntactVae {
 public:
  explicit IntactVae(VaeConfig config);

  const VaeConfig& config() const { return config_; }
  int latent_dim() const { return config_.latent_dim; }

  DiagGaussian Encode(const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                      int t) const;
  DiagGaussian Prior(const Eigen::VectorXd& x, int t) const;
  DiagGaussian Decode(const Eigen::VectorXd& z, int t) const;

  GaussianBatch EncodeBatch(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y,
                            std::span<const int> t) const;
  // With a balanced prior `t` is never read and may be empty.
  GaussianBatch PriorBatch(const Eigen::MatrixXd& x,
                           std::span<const int> t) const;
  GaussianBatch DecodeBatch(const Eigen::MatrixXd& z,
                            std::span<const int> t) const;

  // Batch-mean ELBO with `mc_samples` reparameterized draws per unit. `noise`
  // is latent_dim x (mc_samples * n), column s * n + i holding draw s of unit
  // i. `unit_ids` (optional, length n) names units in error messages.
  ElboResult Elbo(const Batch& batch, const Eigen::MatrixXd& noise,
                  int mc_samples, bool compute_gradient,
                  std::span<const int> unit_ids = {}) const;

  // The same model reparameterized by z -> scale .* z + shift: prior and
  // encoder are pushed forward, the decoder composed with the inverse map, so
  // every observable quantity is unchanged.
  IntactVae ApplyAffineEquivalence(const Eigen::VectorXd& scale,
                                   const Eigen::VectorXd& shift) const;

  std::vector<Mlp*> nets();
  std::vector<const Mlp*> nets() const;
  ModelGradient ZeroGradient() const;

  Mlp& encoder_mean() { return nets_[kEncoderMean]; }
  Mlp& encoder_variance() { return nets_[kEncoderVariance]; }
  Mlp& prior_mean() { return nets_[kPriorMean]; }
  Mlp& prior_variance() { return nets_[kPriorVariance]; }
  // Shared decoders ignore `t`.
  Mlp& decoder_mean(int t);
  Mlp& decoder_variance(int t);

  const Eigen::VectorXd& latent_scale() const { return latent_scale_; }
  const Eigen::VectorXd& latent_shift() const { return latent_shift_; }

  void Save(std::ostream& out) const;
  static IntactVae Load(std::istream& in);

 private:
  enum NetIndex {
    kEncoderMean = 0,
    kEncoderVariance,
    kPriorMean,
    kPriorVariance,
    kFirstDecoder,
  };
  IntactVae() = default;
  void BuildNets();
  int DecoderMeanIndex(int t) const;
  int DecoderVarianceIndex(int t) const;  // -1 when the noise is fixed

  Eigen::MatrixXd EncoderInput(const Eigen::MatrixXd& x,
                               const Eigen::MatrixXd& y,
                               std::span<const int> t) const;
  Eigen::MatrixXd PriorInput(const Eigen::MatrixXd& x,
                             std::span<const int> t) const;
  Eigen::MatrixXd ToExternal(const Eigen::MatrixXd& z_net) const;
  Eigen::MatrixXd ToNet(const Eigen::MatrixXd& z_external) const;

  VaeConfig config_;
  std::vector<Mlp> nets_;
  Eigen::VectorXd latent_scale_;
  Eigen::VectorXd latent_shift_;
};

}  // namespace ivae

#endif  // IVAE_MODEL_INTACT_VAE_H_
