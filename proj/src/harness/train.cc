#include "harness/train.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>

#include "common/errors.h"
#include "common/format.h"
#include "common/rng.h"
#include "nn/adam.h"

namespace ivae {
namespace {

constexpr std::uint64_t kShuffleStream = 0x5348;
constexpr std::uint64_t kTrainNoiseStream = 0x4e4f;
constexpr std::uint64_t kValidNoiseStream = 0x5641;

Eigen::MatrixXd NormalMatrix(int rows, int cols, Rng& rng) {
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) m(i, j) = StandardNormal(rng);
  }
  return m;
}

}  // namespace

EarlyStopping::EarlyStopping(int patience)
    : patience_(patience), best_score_(-std::numeric_limits<double>::infinity()) {
  if (patience < 1) throw InvalidArgument("patience must be >= 1");
}

bool EarlyStopping::Update(int epoch, double score) {
  improved_ = std::isfinite(score) && (best_epoch_ < 0 || score > best_score_);
  if (improved_) {
    best_score_ = score;
    best_epoch_ = epoch;
    return false;
  }
  if (best_epoch_ < 0) return false;
  return epoch - best_epoch_ >= patience_;
}

Batch MakeBatch(const CausalDataset& data, std::span<const int> indices) {
  Batch batch;
  const int n = static_cast<int>(indices.size());
  batch.x.resize(data.covariate_dim(), n);
  batch.y.resize(1, n);
  batch.t.resize(n);
  for (int k = 0; k < n; ++k) {
    const int i = indices[k];
    batch.x.col(k) = data.x.row(i).transpose();
    batch.y(0, k) = data.y[i];
    batch.t[k] = data.t[i];
  }
  return batch;
}

double ValidationElbo(const IntactVae& model, const Batch& batch,
                      const Eigen::MatrixXd& noise, int mc_samples) {
  return model.Elbo(batch, noise, mc_samples, false).terms.elbo;
}

TrainResult TrainModel(IntactVae* model, const CausalDataset& data,
                       const TrainConfig& config) {
  config.Validate();
  data.Validate();
  if (data.covariate_dim() != model->config().x_dim) {
    throw InvalidArgument("model expects " +
                          std::to_string(model->config().x_dim) +
                          " covariates, dataset has " +
                          std::to_string(data.covariate_dim()));
  }
  std::vector<int> train = data.Indices({Split::kTrain});
  std::vector<int> valid = data.Indices({Split::kValid});
  if (train.empty()) throw InvalidArgument("dataset has no training units");
  if (valid.empty()) valid = train;

  const int d = model->latent_dim();
  const int samples = config.mc_samples;
  const Batch valid_batch = MakeBatch(data, valid);
  Rng valid_rng(DeriveSeed(config.seed, kValidNoiseStream, 0));
  const Eigen::MatrixXd valid_noise =
      NormalMatrix(d, samples * valid_batch.size(), valid_rng);

  Rng shuffle_rng(DeriveSeed(config.seed, kShuffleStream, 0));
  Rng noise_rng(DeriveSeed(config.seed, kTrainNoiseStream, 0));
  AdamOptions adam_options;
  adam_options.learning_rate = config.learning_rate;
  std::vector<Mlp*> nets = model->nets();
  std::vector<AdamState> optimizers;
  optimizers.reserve(nets.size());
  for (Mlp* net : nets) optimizers.emplace_back(net->num_params(), adam_options);

  EarlyStopping stopping(config.patience);
  IntactVae best = *model;
  TrainResult result;
  std::vector<int> order = train;
  Eigen::VectorXd negated;
  for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    double elbo_sum = 0.0;
    int batches = 0;
    for (std::size_t start = 0; start < order.size();
         start += static_cast<std::size_t>(config.batch_size)) {
      const std::size_t end =
          std::min(order.size(), start + static_cast<std::size_t>(config.batch_size));
      const std::span<const int> ids(order.data() + start, end - start);
      const Batch batch = MakeBatch(data, ids);
      const Eigen::MatrixXd noise = NormalMatrix(d, samples * batch.size(), noise_rng);
      const ElboResult elbo = model->Elbo(batch, noise, samples, true, ids);
      for (std::size_t k = 0; k < nets.size(); ++k) {
        negated = -elbo.gradient[k];
        optimizers[k].Step(nets[k]->params(),
                           {negated.data(), static_cast<std::size_t>(negated.size())});
      }
      elbo_sum += elbo.terms.elbo;
      ++batches;
    }
    EpochRecord record;
    record.epoch = epoch;
    record.train_elbo = elbo_sum / batches;
    record.valid_elbo = std::numeric_limits<double>::quiet_NaN();
    result.epochs_run = epoch;
    const bool evaluate =
        epoch % config.eval_every == 0 || epoch == config.max_epochs;
    if (evaluate) {
      record.valid_elbo =
          ValidationElbo(*model, valid_batch, valid_noise, samples);
      if (!std::isfinite(record.valid_elbo)) {
        throw NumericError("validation ELBO is not finite at epoch " +
                           std::to_string(epoch));
      }
      const bool stop = stopping.Update(epoch, record.valid_elbo);
      if (stopping.improved()) best = *model;
      result.trace.push_back(record);
      if (stop) {
        result.stopped_early = true;
        break;
      }
    } else {
      result.trace.push_back(record);
    }
  }
  *model = std::move(best);
  result.best_epoch = stopping.best_epoch();
  result.best_valid_elbo = stopping.best_score();
  return result;
}

void WriteTrace(const TrainResult& result, std::ostream& out) {
  out << "epoch,train_elbo,valid_elbo\n";
  for (const EpochRecord& r : result.trace) {
    out << r.epoch << ',' << FormatDouble(r.train_elbo) << ','
        << FormatDouble(r.valid_elbo) << '\n';
  }
}

}  // namespace ivae
