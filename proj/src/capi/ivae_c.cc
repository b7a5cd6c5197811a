#include "ivae/ivae.h"

#include <cstring>
#include <fstream>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <string>

#include "common/errors.h"
#include "harness/config.h"
#include "harness/evaluate.h"
#include "harness/ihdp_run.h"
#include "harness/selftest.h"
#include "harness/sweep.h"
#include "harness/train.h"
#include "semisynth/ihdp.h"
#include "synth/synth.h"

struct ivae_config {
  ivae::RunConfig config;
};

struct ivae_dataset {
  ivae::CausalDataset data;
  ivae::RunMetadata meta;
};

struct ivae_model {
  std::optional<ivae::IntactVae> model;
  int best_epoch = 0;
  double valid_elbo = std::numeric_limits<double>::quiet_NaN();
};

struct ivae_report {
  ivae::EvalReport report;
};

namespace {

thread_local std::string last_error;

ivae_status Fail(ivae_status status, const std::string& message) {
  last_error = message;
  return status;
}

// Runs `body`, translating exceptions into status codes.
template <typename F>
ivae_status Guard(F&& body) {
  try {
    last_error.clear();
    body();
    return IVAE_OK;
  } catch (const ivae::InvalidArgument& e) {
    return Fail(IVAE_INVALID_ARGUMENT, e.what());
  } catch (const ivae::IoError& e) {
    return Fail(IVAE_IO, e.what());
  } catch (const ivae::ParseError& e) {
    return Fail(IVAE_PARSE, e.what());
  } catch (const ivae::NumericError& e) {
    return Fail(IVAE_NUMERIC, e.what());
  } catch (const ivae::NotFound& e) {
    return Fail(IVAE_NOT_FOUND, e.what());
  } catch (const std::bad_alloc&) {
    return Fail(IVAE_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return Fail(IVAE_INTERNAL, e.what());
  } catch (...) {
    return Fail(IVAE_INTERNAL, "unknown error");
  }
}

void Require(const void* p, const char* what) {
  if (p == nullptr) {
    throw ivae::InvalidArgument(std::string(what) + " must not be null");
  }
}

void CopyOut(const std::string& s, char* buf, size_t cap, size_t* needed) {
  if (needed != nullptr) *needed = s.size() + 1;
  if (buf == nullptr && cap == 0) return;
  Require(buf, "buffer");
  if (cap < s.size() + 1) {
    throw ivae::InvalidArgument("buffer too small: need " +
                                std::to_string(s.size() + 1) + " bytes");
  }
  std::memcpy(buf, s.c_str(), s.size() + 1);
}

std::ofstream OpenOutput(const char* path) {
  std::ofstream out(path);
  if (!out) throw ivae::IoError(std::string("cannot write '") + path + "'");
  return out;
}

void CheckWritten(std::ofstream& out, const char* path) {
  out.flush();
  if (!out) throw ivae::IoError(std::string("failed writing '") + path + "'");
}

ivae::RunMetadata SynthMetadata(const ivae::SynthSpec& spec, int latent_dim) {
  ivae::RunMetadata meta;
  meta.setting = std::string(ivae::SettingName(spec.setting));
  meta.outcome_kind = std::string(ivae::OutcomeKindName(spec.outcome_kind));
  meta.alpha = spec.alpha;
  meta.beta = spec.beta;
  meta.latent_dim = latent_dim;
  meta.seed = spec.seed;
  return meta;
}

ivae::ProgressCallback Progress(ivae_progress_fn fn, void* user) {
  if (fn == nullptr) return {};
  return [fn, user](const ivae::SweepProgress& p) {
    const std::string row = ivae::EvalCsvRow(*p.report);
    fn(p.done, p.total, row.c_str(), p.seconds, user);
  };
}

const std::map<std::string, double ivae::EvalReport::*, std::less<>>& Metrics() {
  static const std::map<std::string, double ivae::EvalReport::*, std::less<>> m = {
      {"eps_ate_pre", &ivae::EvalReport::eps_ate_pre},
      {"eps_ate_post", &ivae::EvalReport::eps_ate_post},
      {"pehe_pre", &ivae::EvalReport::pehe_pre},
      {"pehe_post", &ivae::EvalReport::pehe_post},
      {"naive_eps_ate_pre", &ivae::EvalReport::naive_eps_ate_pre},
      {"naive_pehe_pre", &ivae::EvalReport::naive_pehe_pre},
      {"valid_elbo", &ivae::EvalReport::valid_elbo},
  };
  return m;
}

}  // namespace

extern "C" {

const char* ivae_version(void) { return "0.1.0"; }

const char* ivae_status_name(ivae_status status) {
  switch (status) {
    case IVAE_OK: return "ok";
    case IVAE_INVALID_ARGUMENT: return "invalid_argument";
    case IVAE_IO: return "io_error";
    case IVAE_PARSE: return "parse_error";
    case IVAE_NUMERIC: return "numeric_error";
    case IVAE_NOT_FOUND: return "not_found";
    case IVAE_INTERNAL: return "internal_error";
  }
  return "unknown";
}

const char* ivae_last_error(void) { return last_error.c_str(); }

ivae_status ivae_config_create(ivae_config** out) {
  return Guard([&] {
    Require(out, "out");
    *out = new ivae_config();
  });
}

ivae_status ivae_config_load(const char* path, ivae_config** out) {
  return Guard([&] {
    Require(path, "path");
    Require(out, "out");
    auto config = std::make_unique<ivae_config>();
    config->config = ivae::LoadRunConfig(path);
    *out = config.release();
  });
}

ivae_status ivae_config_set(ivae_config* config, const char* key,
                            const char* value) {
  return Guard([&] {
    Require(config, "config");
    Require(key, "key");
    Require(value, "value");
    config->config.Set(key, value);
  });
}

ivae_status ivae_config_get(const ivae_config* config, const char* key,
                            char* buf, size_t cap, size_t* needed) {
  return Guard([&] {
    Require(config, "config");
    Require(key, "key");
    CopyOut(config->config.Get(key), buf, cap, needed);
  });
}

ivae_status ivae_config_dump(const ivae_config* config, char* buf, size_t cap,
                             size_t* needed) {
  return Guard([&] {
    Require(config, "config");
    CopyOut(ivae::DumpRunConfig(config->config), buf, cap, needed);
  });
}

void ivae_config_destroy(ivae_config* config) { delete config; }

ivae_status ivae_dataset_generate(const ivae_config* config,
                                  ivae_dataset** out) {
  return Guard([&] {
    Require(config, "config");
    Require(out, "out");
    auto data = std::make_unique<ivae_dataset>();
    data->data = ivae::Generate(config->config.synth);
    data->meta = SynthMetadata(config->config.synth, config->config.model.latent_dim);
    *out = data.release();
  });
}

ivae_status ivae_dataset_ihdp(const ivae_config* config, int replication,
                              ivae_dataset** out) {
  return Guard([&] {
    Require(config, "config");
    Require(out, "out");
    if (replication < 0) throw ivae::InvalidArgument("replication must be >= 0");
    const ivae::CovariateTable table = ivae::LoadIhdpTable(config->config);
    ivae::IhdpOptions options;
    options.treated_mean_cate = config->config.ihdp.treated_mean_cate;
    const std::uint64_t seed =
        ivae::IhdpReplicationSeed(config->config.sweep.base_seed, replication);
    auto data = std::make_unique<ivae_dataset>();
    data->data = ivae::SynthesizeIhdp(table, seed, options).data;
    data->meta.setting = "ihdp";
    data->meta.outcome_kind = "ihdp";
    data->meta.alpha = data->meta.beta = std::numeric_limits<double>::quiet_NaN();
    data->meta.seed = seed;
    data->meta.model_index = replication;
    *out = data.release();
  });
}

ivae_status ivae_dataset_load(const char* path, ivae_dataset** out) {
  return Guard([&] {
    Require(path, "path");
    Require(out, "out");
    auto data = std::make_unique<ivae_dataset>();
    data->data = ivae::LoadDataset(path);
    data->meta.setting = "file";
    data->meta.outcome_kind = "unknown";
    data->meta.alpha = data->meta.beta = std::numeric_limits<double>::quiet_NaN();
    *out = data.release();
  });
}

ivae_status ivae_dataset_save(const ivae_dataset* data, const char* path) {
  return Guard([&] {
    Require(data, "dataset");
    Require(path, "path");
    ivae::SaveDataset(data->data, path);
  });
}

ivae_status ivae_dataset_info(const ivae_dataset* data, int* n_units,
                              int* covariate_dim, int* n_treated) {
  return Guard([&] {
    Require(data, "dataset");
    if (n_units) *n_units = data->data.size();
    if (covariate_dim) *covariate_dim = data->data.covariate_dim();
    if (n_treated) {
      int count = 0;
      for (int t : data->data.t) count += t;
      *n_treated = count;
    }
  });
}

void ivae_dataset_destroy(ivae_dataset* data) { delete data; }

ivae_status ivae_model_create(const ivae_config* config,
                              const ivae_dataset* data, ivae_model** out) {
  return Guard([&] {
    Require(config, "config");
    Require(data, "dataset");
    Require(out, "out");
    ivae::VaeConfig vae = config->config.model;
    vae.x_dim = data->data.covariate_dim();
    auto model = std::make_unique<ivae_model>();
    model->model.emplace(vae);
    *out = model.release();
  });
}

ivae_status ivae_model_train(ivae_model* model, const ivae_config* config,
                             const ivae_dataset* data, const char* trace_path) {
  return Guard([&] {
    Require(model, "model");
    Require(config, "config");
    Require(data, "dataset");
    std::ofstream trace;
    if (trace_path != nullptr) trace = OpenOutput(trace_path);
    const ivae::TrainResult result =
        ivae::TrainModel(&*model->model, data->data, config->config.train);
    model->best_epoch = result.best_epoch;
    model->valid_elbo = result.best_valid_elbo;
    if (trace_path != nullptr) {
      ivae::WriteTrace(result, trace);
      CheckWritten(trace, trace_path);
    }
  });
}

ivae_status ivae_model_load(const char* path, ivae_model** out) {
  return Guard([&] {
    Require(path, "path");
    Require(out, "out");
    std::ifstream in(path);
    if (!in) throw ivae::NotFound(std::string("cannot open '") + path + "'");
    auto model = std::make_unique<ivae_model>();
    model->model.emplace(ivae::IntactVae::Load(in));
    *out = model.release();
  });
}

ivae_status ivae_model_save(const ivae_model* model, const char* path) {
  return Guard([&] {
    Require(model, "model");
    Require(path, "path");
    std::ofstream out = OpenOutput(path);
    model->model->Save(out);
    CheckWritten(out, path);
  });
}

void ivae_model_destroy(ivae_model* model) { delete model; }

ivae_status ivae_evaluate(const ivae_model* model, const ivae_config* config,
                          const ivae_dataset* data, ivae_report** out) {
  return Guard([&] {
    Require(model, "model");
    Require(config, "config");
    Require(data, "dataset");
    Require(out, "out");
    const ivae::RunConfig& c = config->config;
    std::optional<ivae::NaiveRegressionFit> baseline;
    if (c.eval.baseline) {
      ivae::NaiveRegressionConfig nc;
      nc.hidden = c.eval.baseline_hidden;
      nc.learning_rate = c.eval.baseline_learning_rate;
      nc.batch_size = c.train.batch_size;
      nc.max_epochs = c.eval.baseline_max_epochs;
      nc.patience = c.eval.baseline_patience;
      nc.seed = ivae::RunSeeds::From(c.eval.seed).baseline;
      baseline = ivae::FitNaiveRegression(data->data, nc);
    }
    auto report = std::make_unique<ivae_report>();
    report->report = ivae::EvaluateModel(*model->model, data->data, c.eval,
                                         baseline ? &baseline->net : nullptr);
    report->report.meta = data->meta;
    report->report.meta.latent_dim = model->model->latent_dim();
    report->report.best_epoch = model->best_epoch;
    report->report.valid_elbo = model->valid_elbo;
    *out = report.release();
  });
}

ivae_status ivae_report_get(const ivae_report* report, const char* name,
                            double* value) {
  return Guard([&] {
    Require(report, "report");
    Require(name, "name");
    Require(value, "value");
    const ivae::EvalReport& r = report->report;
    const std::string_view key(name);
    if (auto it = Metrics().find(key); it != Metrics().end()) {
      *value = r.*(it->second);
      return;
    }
    for (int t = 0; t < 2; ++t) {
      const std::string prefix = "fit" + std::to_string(t) + "_";
      if (key == prefix + "slope") { *value = r.fit[t].slope; return; }
      if (key == prefix + "intercept") { *value = r.fit[t].intercept; return; }
      if (key == prefix + "r2") { *value = r.fit[t].r_squared; return; }
    }
    if (key == "best_epoch") { *value = r.best_epoch; return; }
    throw ivae::InvalidArgument("unknown metric '" + std::string(key) + "'");
  });
}

ivae_status ivae_report_csv(const ivae_report* report, int with_header,
                            char* buf, size_t cap, size_t* needed) {
  return Guard([&] {
    Require(report, "report");
    std::string text;
    if (with_header) text = ivae::EvalCsvHeader() + "\n";
    text += ivae::EvalCsvRow(report->report);
    CopyOut(text, buf, cap, needed);
  });
}

void ivae_report_destroy(ivae_report* report) { delete report; }

ivae_status ivae_sweep_run(const ivae_config* config, const char* rows_path,
                           const char* summary_path, ivae_progress_fn progress,
                           void* user) {
  return Guard([&] {
    Require(config, "config");
    std::ofstream rows, summary;
    if (rows_path) rows = OpenOutput(rows_path);
    if (summary_path) summary = OpenOutput(summary_path);
    const ivae::SweepResult result =
        ivae::RunSweep(config->config, Progress(progress, user));
    if (rows_path) {
      ivae::WriteSweepRows(result, config->config, rows);
      CheckWritten(rows, rows_path);
    }
    if (summary_path) {
      ivae::WriteSweepSummary(result, config->config, summary);
      CheckWritten(summary, summary_path);
    }
  });
}

ivae_status ivae_ihdp_run(const ivae_config* config, const char* rows_path,
                          ivae_progress_fn progress, void* user) {
  return Guard([&] {
    Require(config, "config");
    const ivae::CovariateTable table = ivae::LoadIhdpTable(config->config);
    std::ofstream rows;
    if (rows_path) rows = OpenOutput(rows_path);
    const std::vector<ivae::EvalReport> reports =
        ivae::RunIhdp(config->config, table, Progress(progress, user));
    if (rows_path) {
      rows << ivae::ConfigHeaderComment(config->config) << ivae::EvalCsvHeader()
           << '\n';
      for (const ivae::EvalReport& r : reports) rows << ivae::EvalCsvRow(r) << '\n';
      CheckWritten(rows, rows_path);
    }
  });
}

ivae_status ivae_selftest(uint64_t seed, ivae_check_fn on_check, void* user,
                          int* failures) {
  return Guard([&] {
    int failed = 0;
    ivae::RunSelfTest(seed, [&](const ivae::SelfTestCheck& c) {
      if (!c.passed) ++failed;
      if (on_check) on_check(c.name.c_str(), c.passed ? 1 : 0, c.detail.c_str(), user);
    });
    if (failures) *failures = failed;
  });
}

}  // extern "C"
