#ifndef IVAE_HARNESS_CONFIG_H_
#define IVAE_HARNESS_CONFIG_H_

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "model/intact_vae.h"
#include "synth/synth.h"

namespace ivae {

struct TrainConfig {
  double learning_rate = 1e-4;
  int batch_size = 100;
  int max_epochs = 500;
  // Epochs without a validation-ELBO improvement before stopping;
  // kNoEarlyStopping disables the rule.
  int patience = 20;
  int eval_every = 1;
  std::uint64_t seed = 0;
  int mc_samples = 1;

  static constexpr int kNoEarlyStopping = 1 << 30;
  void Validate() const;
};

struct EvalConfig {
  int mc_draws = 100;
  // Also fit the naive regression baseline.
  bool baseline = false;
  std::vector<int> baseline_hidden = {200, 200, 200};
  double baseline_learning_rate = 1e-4;
  int baseline_max_epochs = 500;
  int baseline_patience = 20;
  std::uint64_t seed = 0;
};

struct SweepConfig {
  int n_models = 20;
  std::vector<CausalSetting> settings = {CausalSetting::kProxyConfounded};
  OutcomeKind outcome_kind = OutcomeKind::kNonlinearInvertible;
  std::vector<double> alphas = {0.2};
  std::vector<double> betas = {0.2};
  std::uint64_t base_seed = 0;
  int jobs = 1;
  // Divide each cell's outcomes by the across-model sd of true ATEs.
  bool normalize_ate = true;
  std::string output;
};

struct IhdpConfig {
  std::string covariates;  // empty: $IVAE_DATA_DIR/ihdp/ihdp_npci_1.csv
  std::string format = "npci";
  int first_replication = 0;
  int last_replication = 49;
  double treated_mean_cate = 4.0;
};

// Every tunable of a run. Serialized as INI text:
//   [section]
//   key = value
// with sections synth, model, train, eval, sweep, ihdp. Lists are comma
// separated; booleans are true/false; patience accepts "inf".
struct RunConfig {
  SynthSpec synth;
  VaeConfig model;
  TrainConfig train;
  EvalConfig eval;
  SweepConfig sweep;
  IhdpConfig ihdp;

  // Throws InvalidArgument for an unknown "section.key" or a bad value.
  void Set(std::string_view key, std::string_view value);
  std::string Get(std::string_view key) const;
  std::vector<std::string> Keys() const;
  void Validate() const;
};

RunConfig LoadRunConfig(const std::string& path);
void MergeIniText(std::string_view text, RunConfig* config);
// Resolved configuration as INI text; MergeIniText of the result reproduces
// the configuration.
std::string DumpRunConfig(const RunConfig& config);
// Same text with every line prefixed by "# ", for output-file headers.
std::string ConfigHeaderComment(const RunConfig& config);

// Directory for external datasets: $IVAE_DATA_DIR, else "data".
std::string DataDirectory();
std::string DefaultIhdpCovariatePath();

}  // namespace ivae

#endif  // IVAE_HARNESS_CONFIG_H_
