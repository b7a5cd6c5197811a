#ifndef IVAE_HARNESS_TRAIN_H_
#define IVAE_HARNESS_TRAIN_H_

#include <iosfwd>
#include <span>
#include <vector>

#include "data/dataset.h"
#include "harness/config.h"
#include "model/intact_vae.h"

namespace ivae {

// Patience-based stopping on a score where higher is better.
class EarlyStopping {
 public:
  explicit EarlyStopping(int patience);

  // Records the score of `epoch`; returns true once `patience` epochs have
  // passed without improving on the best score. Non-finite scores never
  // improve.
  bool Update(int epoch, double score);

  int best_epoch() const { return best_epoch_; }
  double best_score() const { return best_score_; }
  bool improved() const { return improved_; }

 private:
  int patience_;
  int best_epoch_ = -1;
  double best_score_;
  bool improved_ = false;
};

struct EpochRecord {
  int epoch = 0;
  double train_elbo = 0.0;  // mean over minibatches
  double valid_elbo = 0.0;  // NaN when not evaluated this epoch
};

struct TrainResult {
  std::vector<EpochRecord> trace;
  int best_epoch = 0;
  double best_valid_elbo = 0.0;
  int epochs_run = 0;
  bool stopped_early = false;
};

// Units of `data` selected by `indices`, one unit per column.
Batch MakeBatch(const CausalDataset& data, std::span<const int> indices);

// Adam ascent on the ELBO over the training split. After every
// `eval_every` epochs the validation ELBO is computed with noise fixed for
// the whole run; the parameters of the best validation epoch are restored
// at the end. Throws NumericError on a non-finite loss or gradient.
TrainResult TrainModel(IntactVae* model, const CausalDataset& data,
                       const TrainConfig& config);

// Validation ELBO with fixed noise drawn from `seed`.
double ValidationElbo(const IntactVae& model, const Batch& batch,
                      const Eigen::MatrixXd& noise, int mc_samples);

// CSV: epoch,train_elbo,valid_elbo
void WriteTrace(const TrainResult& result, std::ostream& out);

}  // namespace ivae

#endif  // IVAE_HARNESS_TRAIN_H_
