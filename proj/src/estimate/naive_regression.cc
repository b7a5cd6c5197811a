#include "estimate/naive_regression.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "common/errors.h"
#include "common/rng.h"
#include "nn/adam.h"

namespace ivae {
namespace {

constexpr std::uint64_t kNetStream = 0x6e616976;      // "naiv"
constexpr std::uint64_t kShuffleStream = 0x73687566;  // "shuf"

Eigen::MatrixXd Inputs(const CausalDataset& data, std::span<const int> idx) {
  Eigen::MatrixXd in(data.covariate_dim() + 1, static_cast<Eigen::Index>(idx.size()));
  for (std::size_t k = 0; k < idx.size(); ++k) {
    in.col(k).head(data.covariate_dim()) = data.x.row(idx[k]).transpose();
    in(data.covariate_dim(), k) = data.t[idx[k]];
  }
  return in;
}

double Mse(const Mlp& net, const CausalDataset& data, std::span<const int> idx) {
  const Eigen::MatrixXd pred = net.Forward(Inputs(data, idx), nullptr);
  double sum = 0.0;
  for (std::size_t k = 0; k < idx.size(); ++k) {
    const double r = data.y[idx[k]] - pred(0, k);
    sum += r * r;
  }
  return sum / static_cast<double>(idx.size());
}

}  // namespace

NaiveRegressionFit FitNaiveRegression(const CausalDataset& data,
                                      const NaiveRegressionConfig& config) {
  if (config.batch_size < 1 || config.max_epochs < 1 || config.patience < 1 ||
      !(config.learning_rate >= 0.0)) {
    throw InvalidArgument("invalid naive regression configuration");
  }
  std::vector<int> train = data.Indices({Split::kTrain});
  const std::vector<int> valid = data.Indices({Split::kValid});
  if (train.empty() || valid.empty()) {
    throw InvalidArgument("naive regression needs train and validation units");
  }
  std::vector<int> sizes = {data.covariate_dim() + 1};
  sizes.insert(sizes.end(), config.hidden.begin(), config.hidden.end());
  sizes.push_back(1);
  NaiveRegressionFit fit;
  fit.net = Mlp(sizes, Activation::kRelu, DeriveSeed(config.seed, kNetStream));
  Mlp& net = fit.net;
  AdamState adam(net.num_params(), {.learning_rate = config.learning_rate});
  Rng shuffle(DeriveSeed(config.seed, kShuffleStream));
  Eigen::VectorXd grad(static_cast<Eigen::Index>(net.num_params()));

  Mlp best = net;
  fit.best_valid_mse = std::numeric_limits<double>::infinity();
  int since_best = 0;
  for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
    std::shuffle(train.begin(), train.end(), shuffle);
    for (std::size_t start = 0; start < train.size(); start += config.batch_size) {
      const std::size_t end = std::min(train.size(), start + config.batch_size);
      const std::span<const int> batch(train.data() + start, end - start);
      ForwardCache cache;
      const Eigen::MatrixXd pred = net.Forward(Inputs(data, batch), &cache);
      Eigen::MatrixXd cot(1, pred.cols());
      for (Eigen::Index k = 0; k < pred.cols(); ++k) {
        cot(0, k) = 2.0 * (pred(0, k) - data.y[batch[k]]) / pred.cols();
      }
      grad.setZero();
      net.Backward(cache, cot, {grad.data(), static_cast<std::size_t>(grad.size())});
      try {
        adam.Step(net.params(), {grad.data(), static_cast<std::size_t>(grad.size())});
      } catch (const NumericError& e) {
        throw NumericError("naive regression diverged at epoch " +
                           std::to_string(epoch) + ": " + e.what());
      }
    }
    const double mse = Mse(net, data, valid);
    if (!std::isfinite(mse)) {
      throw NumericError("naive regression diverged at epoch " +
                         std::to_string(epoch));
    }
    fit.epochs_run = epoch;
    if (mse < fit.best_valid_mse) {
      fit.best_valid_mse = mse;
      fit.best_epoch = epoch;
      best = net;
      since_best = 0;
    } else if (++since_best >= config.patience) {
      break;
    }
  }
  fit.net = std::move(best);
  return fit;
}

OutcomePredictions PredictNaive(const Mlp& net, const Eigen::MatrixXd& x) {
  if (net.input_dim() != x.cols() + 1) {
    throw InvalidArgument("naive regression: covariate dimension mismatch");
  }
  Eigen::MatrixXd in(x.cols() + 1, x.rows());
  in.topRows(x.cols()) = x.transpose();
  OutcomePredictions out;
  in.row(x.cols()).setZero();
  out.y0 = net.Forward(in, nullptr).row(0).transpose();
  in.row(x.cols()).setOnes();
  out.y1 = net.Forward(in, nullptr).row(0).transpose();
  return out;
}

}  // namespace ivae
