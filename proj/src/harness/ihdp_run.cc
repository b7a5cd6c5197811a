#include "harness/ihdp_run.h"

#include <chrono>
#include <limits>

#include "common/rng.h"

namespace ivae {
namespace {

constexpr std::uint64_t kReplicationStream = 0x49484450;

}  // namespace

CovariateTable LoadIhdpTable(const RunConfig& config) {
  const std::string path = config.ihdp.covariates.empty()
                               ? DefaultIhdpCovariatePath()
                               : config.ihdp.covariates;
  return LoadCovariates(path, CovariateFormat::ByName(config.ihdp.format));
}

std::uint64_t IhdpReplicationSeed(std::uint64_t base_seed, int replication) {
  return DeriveSeed(base_seed, kReplicationStream,
                    static_cast<std::uint64_t>(replication));
}

std::vector<EvalReport> RunIhdp(const RunConfig& config,
                                const CovariateTable& table,
                                const ProgressCallback& progress) {
  config.Validate();
  IhdpOptions options;
  options.treated_mean_cate = config.ihdp.treated_mean_cate;
  const int first = config.ihdp.first_replication;
  const int last = config.ihdp.last_replication;
  std::vector<EvalReport> reports;
  for (int r = first; r <= last; ++r) {
    const auto start = std::chrono::steady_clock::now();
    const std::uint64_t seed = IhdpReplicationSeed(config.sweep.base_seed, r);
    RunMetadata meta;
    meta.setting = "ihdp";
    meta.outcome_kind = "ihdp";
    meta.alpha = meta.beta = std::numeric_limits<double>::quiet_NaN();
    meta.latent_dim = config.model.latent_dim;
    meta.seed = seed;
    meta.model_index = r;
    try {
      const IhdpReplication rep = SynthesizeIhdp(table, seed, options);
      reports.push_back(
          TrainAndEvaluate(rep.data, config, RunSeeds::From(seed), meta).report);
    } catch (const std::exception& e) {
      reports.push_back(FailedReport(meta, FailureStatus(e), e.what()));
    }
    if (progress) {
      const double seconds = std::chrono::duration<double>(
                                 std::chrono::steady_clock::now() - start)
                                 .count();
      progress({r - first + 1, last - first + 1, &reports.back(), seconds});
    }
  }
  return reports;
}

}  // namespace ivae
