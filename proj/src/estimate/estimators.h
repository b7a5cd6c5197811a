#ifndef IVAE_ESTIMATE_ESTIMATORS_H_
#define IVAE_ESTIMATE_ESTIMATORS_H_

#include <array>
#include <cstdint>
#include <span>

#include <Eigen/Dense>

#include "common/rng.h"
#include "data/dataset.h"
#include "model/intact_vae.h"

namespace ivae {

// Predicted potential outcomes, one entry per evaluated unit.
struct OutcomePredictions {
  Eigen::VectorXd y0;
  Eigen::VectorXd y1;

  Eigen::VectorXd Cate() const { return y1 - y0; }
  double Ate() const { return Cate().mean(); }
};

struct PredictOptions {
  int mc_draws = 100;
  std::uint64_t seed = 0;
};

// latent_dim x (draws * n) standard-normal draws, draw-major. Draws come in
// antithetic pairs (draw 2k+1 is the negation of draw 2k), so the averaged
// prediction does not depend on the sign convention of the latent.
Eigen::MatrixXd AntitheticNoise(int latent_dim, int n, int draws, Rng& rng);

// Post-treatment: z ~ q(z|x, y, t_factual), decoder mean under t = 0 and
// t = 1 on the same draws, averaged over draws. `x` holds one unit per row.
OutcomePredictions PredictOutcomesPost(const IntactVae& model,
                                       const Eigen::MatrixXd& x,
                                       const Eigen::VectorXd& y,
                                       std::span<const int> t_factual,
                                       const PredictOptions& options);

// Pre-treatment: z drawn from the conditional prior instead. With a
// t-dependent prior arm t uses p(z|x, t).
OutcomePredictions PredictOutcomesPre(const IntactVae& model,
                                      const Eigen::MatrixXd& x,
                                      const PredictOptions& options);

// |mean true effect - mean predicted effect| over `indices`; predictions are
// aligned with `indices`.
double AteError(const OutcomePredictions& predictions,
                const CausalDataset& data, std::span<const int> indices);
// Root mean squared error of per-unit effects (sqrt of PEHE).
double RootPehe(const OutcomePredictions& predictions,
                const CausalDataset& data, std::span<const int> indices);

struct AffineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};

// Least squares of recovered on true latent within each treatment group.
// Throws InvalidArgument for empty groups or a constant true latent.
std::array<AffineFit, 2> AffineRecoveryFit(std::span<const double> recovered,
                                           std::span<const double> truth,
                                           std::span<const int> t);

// Rows of `data` selected by `indices`.
Eigen::MatrixXd SelectRows(const Eigen::MatrixXd& m, std::span<const int> indices);
Eigen::VectorXd SelectEntries(const Eigen::VectorXd& v, std::span<const int> indices);
std::vector<int> SelectEntries(const std::vector<int>& v, std::span<const int> indices);

}  // namespace ivae

#endif  // IVAE_ESTIMATE_ESTIMATORS_H_
