#ifndef IVAE_HARNESS_EVALUATE_H_
#define IVAE_HARNESS_EVALUATE_H_

#include <array>
#include <cstdint>
#include <string>

#include "data/dataset.h"
#include "estimate/estimators.h"
#include "estimate/naive_regression.h"
#include "harness/config.h"
#include "model/intact_vae.h"

namespace ivae {

struct RunMetadata {
  std::string setting;
  std::string outcome_kind;
  double alpha = 0.0;
  double beta = 0.0;
  int latent_dim = 1;
  std::uint64_t seed = 0;
  int model_index = 0;
};

// Metrics of one trained model. Post-treatment metrics are computed on the
// training and validation units, pre-treatment metrics on the test units.
// Fields that were not computed hold NaN.
struct EvalReport {
  RunMetadata meta;
  std::string status = "ok";
  std::string message;  // failure detail; not part of the CSV row
  double eps_ate_pre = 0.0;
  double eps_ate_post = 0.0;
  double pehe_pre = 0.0;
  double pehe_post = 0.0;
  std::array<AffineFit, 2> fit;
  double naive_eps_ate_pre = 0.0;
  double naive_pehe_pre = 0.0;
  int best_epoch = 0;
  double valid_elbo = 0.0;
};

// Recovered latent used for the affine fit: the first coordinate of the
// encoder mean on each unit of `indices`.
Eigen::VectorXd RecoveredLatent(const IntactVae& model,
                                const CausalDataset& data,
                                std::span<const int> indices);

// Fills the metric fields. The affine fit is computed when both the model
// latent and the stored true latent are 1-d. `baseline` may be null.
EvalReport EvaluateModel(const IntactVae& model, const CausalDataset& data,
                         const EvalConfig& config, const Mlp* baseline);

// A report marked as failed with every metric NaN.
EvalReport FailedReport(const RunMetadata& meta, std::string status,
                        std::string message);

std::string EvalCsvHeader();
std::string EvalCsvRow(const EvalReport& report);

}  // namespace ivae

#endif  // IVAE_HARNESS_EVALUATE_H_
