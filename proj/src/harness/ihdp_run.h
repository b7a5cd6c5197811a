#ifndef IVAE_HARNESS_IHDP_RUN_H_
#define IVAE_HARNESS_IHDP_RUN_H_

#include <vector>

#include "harness/config.h"
#include "harness/evaluate.h"
#include "harness/sweep.h"
#include "semisynth/ihdp.h"

namespace ivae {

// Covariates named by config.ihdp (or the default location).
CovariateTable LoadIhdpTable(const RunConfig& config);

std::uint64_t IhdpReplicationSeed(std::uint64_t base_seed, int replication);

// One report per replication in [first_replication, last_replication], the
// seed of replication r derived from sweep.base_seed. Failed replications
// are kept with a non-ok status.
std::vector<EvalReport> RunIhdp(const RunConfig& config,
                                const CovariateTable& table,
                                const ProgressCallback& progress = {});

}  // namespace ivae

#endif  // IVAE_HARNESS_IHDP_RUN_H_
