#ifndef IVAE_ESTIMATE_NAIVE_REGRESSION_H_
#define IVAE_ESTIMATE_NAIVE_REGRESSION_H_

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "data/dataset.h"
#include "estimate/estimators.h"
#include "nn/mlp.h"

namespace ivae {

// Regression of y on (x, t) by an MLP, the contrast estimator that treats
// E[y | x, t] as the potential-outcome mean.
struct NaiveRegressionConfig {
  std::vector<int> hidden = {200, 200, 200};
  double learning_rate = 1e-4;
  int batch_size = 100;
  int max_epochs = 500;
  int patience = 20;
  std::uint64_t seed = 0;
};

struct NaiveRegressionFit {
  Mlp net;  // input (x, t), output y
  int best_epoch = 0;
  double best_valid_mse = 0.0;
  int epochs_run = 0;
};

// Adam on mean squared error over the training split with early stopping on
// validation MSE. Throws NumericError if the loss diverges.
NaiveRegressionFit FitNaiveRegression(const CausalDataset& data,
                                      const NaiveRegressionConfig& config);

// Both arms for each row of `x`.
OutcomePredictions PredictNaive(const Mlp& net, const Eigen::MatrixXd& x);

}  // namespace ivae

#endif  // IVAE_ESTIMATE_NAIVE_REGRESSION_H_
