#include "harness/sweep.h"

#include <atomic>
#include <chrono>
#include <cmath>
#include <map>
#include <mutex>
#include <ostream>
#include <thread>
#include <tuple>

#include "common/errors.h"
#include "common/format.h"
#include "common/rng.h"
#include "estimate/naive_regression.h"
#include "harness/stats.h"

namespace ivae {
namespace {

constexpr std::uint64_t kDataSeedStream = 0x44415441;
constexpr std::uint64_t kRunSeedStream = 0x52554e;

double TrueAte(const GeneratingModel& model, const CausalDataset& data) {
  double sum = 0.0;
  for (int i = 0; i < data.size(); ++i) {
    const double z = data.z_true(i, 0);
    sum += model.OutcomeMean(z, 1) - model.OutcomeMean(z, 0);
  }
  return sum / data.size();
}

void ScaleOutcomes(CausalDataset* data, double factor) {
  data->y *= factor;
  data->y0 *= factor;
  data->y1 *= factor;
}

}  // namespace

RunSeeds RunSeeds::From(std::uint64_t run_seed) {
  RunSeeds s;
  s.model = DeriveSeed(run_seed, 1, 0);
  s.train = DeriveSeed(run_seed, 2, 0);
  s.eval = DeriveSeed(run_seed, 3, 0);
  s.baseline = DeriveSeed(run_seed, 4, 0);
  return s;
}

std::string FailureStatus(const std::exception& e) {
  if (dynamic_cast<const NumericError*>(&e)) return "numeric_error";
  if (dynamic_cast<const InvalidArgument*>(&e)) return "invalid_argument";
  return "error";
}

RunOutput TrainAndEvaluate(const CausalDataset& data, const RunConfig& config,
                           const RunSeeds& seeds, const RunMetadata& meta) {
  VaeConfig model_config = config.model;
  model_config.x_dim = data.covariate_dim();
  model_config.seed = seeds.model;
  TrainConfig train_config = config.train;
  train_config.seed = seeds.train;
  IntactVae model(model_config);
  TrainResult train = TrainModel(&model, data, train_config);

  std::optional<NaiveRegressionFit> baseline;
  if (config.eval.baseline) {
    NaiveRegressionConfig nc;
    nc.hidden = config.eval.baseline_hidden;
    nc.learning_rate = config.eval.baseline_learning_rate;
    nc.batch_size = config.train.batch_size;
    nc.max_epochs = config.eval.baseline_max_epochs;
    nc.patience = config.eval.baseline_patience;
    nc.seed = seeds.baseline;
    baseline = FitNaiveRegression(data, nc);
  }
  EvalConfig eval_config = config.eval;
  eval_config.seed = seeds.eval;
  EvalReport report = EvaluateModel(model, data, eval_config,
                                    baseline ? &baseline->net : nullptr);
  report.meta = meta;
  report.meta.latent_dim = model_config.latent_dim;
  report.best_epoch = train.best_epoch;
  report.valid_elbo = train.best_valid_elbo;
  return RunOutput{std::move(model), std::move(train), std::move(report)};
}

std::uint64_t SweepDataSeed(std::uint64_t base_seed, int index) {
  return DeriveSeed(base_seed, kDataSeedStream, static_cast<std::uint64_t>(index));
}

std::uint64_t SweepRunSeed(std::uint64_t base_seed, int index) {
  return DeriveSeed(base_seed, kRunSeedStream, static_cast<std::uint64_t>(index));
}

std::vector<CausalDataset> SweepCellData(const RunConfig& config,
                                         CausalSetting setting, double alpha,
                                         double beta) {
  const int n_models = config.sweep.n_models;
  std::vector<CausalDataset> datasets;
  std::vector<double> ates;
  for (int i = 0; i < n_models; ++i) {
    SynthSpec spec = config.synth;
    spec.seed = SweepDataSeed(config.sweep.base_seed, i);
    spec.setting = setting;
    spec.outcome_kind = config.sweep.outcome_kind;
    spec.alpha = alpha;
    spec.beta = beta;
    const GeneratingModel model = GeneratingModel::Build(spec);
    datasets.push_back(Generate(model));
    ates.push_back(TrueAte(model, datasets.back()));
  }
  if (config.sweep.normalize_ate && n_models >= 2) {
    const double sd = Summarize(ates).stddev;
    if (sd > 0.0 && std::isfinite(sd)) {
      for (CausalDataset& d : datasets) ScaleOutcomes(&d, 1.0 / sd);
    }
  }
  return datasets;
}

SweepResult RunSweep(const RunConfig& config, const ProgressCallback& progress) {
  config.Validate();
  struct Job {
    const CausalDataset* data;
    RunMetadata meta;
    RunSeeds seeds;
  };
  std::vector<std::vector<CausalDataset>> cells;
  std::vector<Job> jobs;
  for (CausalSetting setting : config.sweep.settings) {
    for (double alpha : config.sweep.alphas) {
      for (double beta : config.sweep.betas) {
        cells.push_back(SweepCellData(config, setting, alpha, beta));
      }
    }
  }
  std::size_t cell = 0;
  for (CausalSetting setting : config.sweep.settings) {
    for (double alpha : config.sweep.alphas) {
      for (double beta : config.sweep.betas) {
        for (int i = 0; i < config.sweep.n_models; ++i) {
          RunMetadata meta;
          meta.setting = std::string(SettingName(setting));
          meta.outcome_kind = std::string(OutcomeKindName(config.sweep.outcome_kind));
          meta.alpha = alpha;
          meta.beta = beta;
          meta.latent_dim = config.model.latent_dim;
          meta.seed = SweepDataSeed(config.sweep.base_seed, i);
          meta.model_index = i;
          jobs.push_back({&cells[cell][i], meta,
                          RunSeeds::From(SweepRunSeed(config.sweep.base_seed, i))});
        }
        ++cell;
      }
    }
  }

  SweepResult result;
  result.rows.resize(jobs.size());
  std::atomic<std::size_t> next{0};
  std::mutex mu;
  int done = 0;
  auto worker = [&]() {
    for (std::size_t j = next++; j < jobs.size(); j = next++) {
      const auto start = std::chrono::steady_clock::now();
      EvalReport report;
      try {
        report = TrainAndEvaluate(*jobs[j].data, config, jobs[j].seeds,
                                  jobs[j].meta).report;
      } catch (const std::exception& e) {
        report = FailedReport(jobs[j].meta, FailureStatus(e), e.what());
      }
      const double seconds = std::chrono::duration<double>(
                                 std::chrono::steady_clock::now() - start)
                                 .count();
      std::lock_guard<std::mutex> lock(mu);
      result.rows[j] = std::move(report);
      ++done;
      if (progress) {
        progress({done, static_cast<int>(jobs.size()), &result.rows[j], seconds});
      }
    }
  };
  const int threads =
      std::max(1, std::min<int>(config.sweep.jobs, static_cast<int>(jobs.size())));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int k = 0; k < threads; ++k) pool.emplace_back(worker);
    for (std::thread& th : pool) th.join();
  }
  result.summary = SummarizeReports(result.rows);
  return result;
}

std::vector<SummaryRow> SummarizeReports(const std::vector<EvalReport>& rows) {
  using Key = std::tuple<std::string, std::string, double, double>;
  std::vector<Key> order;
  std::map<Key, std::vector<const EvalReport*>> groups;
  for (const EvalReport& r : rows) {
    const Key key{r.meta.setting, r.meta.outcome_kind, r.meta.alpha, r.meta.beta};
    if (!groups.count(key)) order.push_back(key);
    groups[key].push_back(&r);
  }
  const std::vector<std::pair<std::string, double EvalReport::*>> metrics = {
      {"eps_ate_pre", &EvalReport::eps_ate_pre},
      {"eps_ate_post", &EvalReport::eps_ate_post},
      {"pehe_pre", &EvalReport::pehe_pre},
      {"pehe_post", &EvalReport::pehe_post},
      {"naive_eps_ate_pre", &EvalReport::naive_eps_ate_pre},
      {"naive_pehe_pre", &EvalReport::naive_pehe_pre},
  };
  std::vector<SummaryRow> out;
  for (const Key& key : order) {
    for (const auto& [name, member] : metrics) {
      std::vector<double> values;
      for (const EvalReport* r : groups[key]) {
        if (r->status == "ok") values.push_back(r->*member);
      }
      const Summary s = Summarize(values);
      SummaryRow row;
      std::tie(row.setting, row.outcome_kind, row.alpha, row.beta) = key;
      row.metric = name;
      row.n = s.count;
      row.mean = s.mean;
      row.median = s.median;
      row.stddev = s.stddev;
      row.stderr_mean = s.stderr_mean;
      out.push_back(row);
    }
  }
  return out;
}

void WriteSweepRows(const SweepResult& result, const RunConfig& config,
                    std::ostream& out) {
  out << ConfigHeaderComment(config) << EvalCsvHeader() << '\n';
  for (const EvalReport& r : result.rows) out << EvalCsvRow(r) << '\n';
}

void WriteSweepSummary(const SweepResult& result, const RunConfig& config,
                       std::ostream& out) {
  out << ConfigHeaderComment(config)
      << "setting,outcome_kind,alpha,beta,metric,n,mean,median,std,stderr\n";
  for (const SummaryRow& s : result.summary) {
    out << s.setting << ',' << s.outcome_kind << ',' << FormatDouble(s.alpha)
        << ',' << FormatDouble(s.beta) << ',' << s.metric << ',' << s.n << ','
        << FormatDouble(s.mean) << ',' << FormatDouble(s.median) << ','
        << FormatDouble(s.stddev) << ',' << FormatDouble(s.stderr_mean) << '\n';
  }
}

}  // namespace ivae
