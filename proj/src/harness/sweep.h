#ifndef IVAE_HARNESS_SWEEP_H_
#define IVAE_HARNESS_SWEEP_H_

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "data/dataset.h"
#include "harness/config.h"
#include "harness/evaluate.h"
#include "harness/train.h"
#include "model/intact_vae.h"
#include "synth/synth.h"

namespace ivae {

// Per-purpose seeds of one run, all derived from a single run seed.
struct RunSeeds {
  std::uint64_t model = 0;
  std::uint64_t train = 0;
  std::uint64_t eval = 0;
  std::uint64_t baseline = 0;

  static RunSeeds From(std::uint64_t run_seed);
};

struct RunOutput {
  IntactVae model;
  TrainResult train;
  EvalReport report;
};

// Builds a model for `data` from `config.model` (x_dim taken from the data),
// trains it, optionally fits the baseline and evaluates.
RunOutput TrainAndEvaluate(const CausalDataset& data, const RunConfig& config,
                           const RunSeeds& seeds, const RunMetadata& meta);

// Status name recorded for a failed run, from the exception type.
std::string FailureStatus(const std::exception& e);

struct SweepProgress {
  int done = 0;
  int total = 0;
  const EvalReport* report = nullptr;
  double seconds = 0.0;
};
using ProgressCallback = std::function<void(const SweepProgress&)>;

struct SummaryRow {
  std::string setting;
  std::string outcome_kind;
  double alpha = 0.0;
  double beta = 0.0;
  std::string metric;
  int n = 0;
  double mean = 0.0;
  double median = 0.0;
  double stddev = 0.0;
  double stderr_mean = 0.0;
};

struct SweepResult {
  std::vector<EvalReport> rows;  // cell-major, model index minor
  std::vector<SummaryRow> summary;
};

// Data seed of model `index`; shared by every grid cell so that cells are
// paired model by model.
std::uint64_t SweepDataSeed(std::uint64_t base_seed, int index);
std::uint64_t SweepRunSeed(std::uint64_t base_seed, int index);

// Generating models and datasets of one grid cell, after the optional ATE
// normalization.
std::vector<CausalDataset> SweepCellData(const RunConfig& config,
                                         CausalSetting setting, double alpha,
                                         double beta);

// Cartesian grid settings x alpha x beta, sweep.n_models models per cell,
// run on sweep.jobs threads. Failed runs are kept as rows with a non-ok
// status. Output order does not depend on the thread count.
SweepResult RunSweep(const RunConfig& config,
                     const ProgressCallback& progress = {});

std::vector<SummaryRow> SummarizeReports(const std::vector<EvalReport>& rows);

// Both files start with the resolved configuration as '#' comment lines.
void WriteSweepRows(const SweepResult& result, const RunConfig& config,
                    std::ostream& out);
void WriteSweepSummary(const SweepResult& result, const RunConfig& config,
                       std::ostream& out);

}  // namespace ivae

#endif  // IVAE_HARNESS_SWEEP_H_
