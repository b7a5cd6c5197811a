// Command-line front end over the C API.

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ivae/ivae.h"

namespace {

// Thrown to unwind with a library status.
struct StatusError {
  ivae_status status;
};

void Check(ivae_status status) {
  if (status != IVAE_OK) throw StatusError{status};
}

struct Common {
  std::string config_path;
  std::vector<std::string> overrides;
  std::int64_t seed = -1;
  bool timing = false;
};

// Commands whose output depends on randomness take a mandatory --seed.
void AddCommon(CLI::App* cmd, Common* common, bool seeded) {
  cmd->add_option("-c,--config", common->config_path, "INI configuration file");
  cmd->add_option("--set", common->overrides,
                  "Override one setting, section.key=value (repeatable)");
  CLI::Option* seed = cmd->add_option("--seed", common->seed, "Seed for this command")
                          ->check(CLI::NonNegativeNumber);
  if (seeded) seed->required();
  cmd->add_flag("--timing", common->timing, "Report wall-clock times on stderr");
}

class Config {
 public:
  explicit Config(const Common& common) {
    if (common.config_path.empty()) {
      Check(ivae_config_create(&config_));
    } else {
      Check(ivae_config_load(common.config_path.c_str(), &config_));
    }
    for (const std::string& item : common.overrides) {
      const std::size_t eq = item.find('=');
      if (eq == std::string::npos) {
        std::fprintf(stderr, "error: invalid_argument: --set expects key=value, got '%s'\n",
                     item.c_str());
        throw StatusError{IVAE_INVALID_ARGUMENT};
      }
      Set(item.substr(0, eq), item.substr(eq + 1));
    }
  }
  ~Config() { ivae_config_destroy(config_); }
  Config(const Config&) = delete;
  Config& operator=(const Config&) = delete;

  void Set(const std::string& key, const std::string& value) {
    Check(ivae_config_set(config_, key.c_str(), value.c_str()));
  }
  void SetSeed(const Common& common, std::initializer_list<const char*> keys) {
    if (common.seed < 0) return;
    for (const char* key : keys) Set(key, std::to_string(common.seed));
  }
  std::string Dump() const {
    std::size_t needed = 0;
    Check(ivae_config_dump(config_, nullptr, 0, &needed));
    std::string text(needed, '\0');
    Check(ivae_config_dump(config_, text.data(), text.size(), &needed));
    text.resize(needed - 1);
    return text;
  }
  const ivae_config* get() const { return config_; }

 private:
  ivae_config* config_ = nullptr;
};

template <typename T, void (*Destroy)(T*)>
class Handle {
 public:
  Handle() = default;
  ~Handle() { Destroy(ptr_); }
  Handle(const Handle&) = delete;
  Handle& operator=(const Handle&) = delete;
  T** out() { return &ptr_; }
  T* get() const { return ptr_; }

 private:
  T* ptr_ = nullptr;
};

using Dataset = Handle<ivae_dataset, ivae_dataset_destroy>;
using Model = Handle<ivae_model, ivae_model_destroy>;
using Report = Handle<ivae_report, ivae_report_destroy>;

struct ProgressState {
  bool timing = false;
};

void OnProgress(int done, int total, const char* row, double seconds, void* user) {
  const auto* state = static_cast<const ProgressState*>(user);
  if (state->timing) {
    std::fprintf(stderr, "[%d/%d] %.1fs %s\n", done, total, seconds, row);
  } else {
    std::fprintf(stderr, "[%d/%d] %s\n", done, total, row);
  }
}

void OnCheck(const char* name, int passed, const char* detail, void*) {
  std::printf("%s %s: %s\n", passed ? "PASS" : "FAIL", name, detail);
}

std::string ReportCsv(const Report& report) {
  std::size_t needed = 0;
  Check(ivae_report_csv(report.get(), 1, nullptr, 0, &needed));
  std::string text(needed, '\0');
  Check(ivae_report_csv(report.get(), 1, text.data(), text.size(), &needed));
  text.resize(needed - 1);
  return text;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Intact-VAE treatment-effect estimation"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(ivae_version()));

  Common gen_opts, train_opts, eval_opts, sweep_opts, ihdp_opts, config_opts;
  std::string gen_out, data_path, model_path, trace_path, eval_out, rows_out,
      summary_out;
  int ihdp_replication = -1;
  std::uint64_t selftest_seed = 0;
  bool selftest_timing = false;

  CLI::App* gen = app.add_subcommand("gen", "Generate a dataset");
  AddCommon(gen, &gen_opts, true);
  gen->add_option("-o,--out", gen_out, "Output CSV")->required();
  gen->add_option("--ihdp-replication", ihdp_replication,
                  "Build IHDP replication R instead of a synthetic dataset")
      ->check(CLI::NonNegativeNumber);

  CLI::App* train = app.add_subcommand("train", "Train a model on a dataset");
  AddCommon(train, &train_opts, true);
  train->add_option("-d,--data", data_path, "Dataset CSV")->required();
  train->add_option("-m,--model", model_path, "Output checkpoint")->required();
  train->add_option("--trace", trace_path, "Per-epoch trace CSV");

  CLI::App* eval = app.add_subcommand("eval", "Evaluate a trained model");
  AddCommon(eval, &eval_opts, true);
  eval->add_option("-d,--data", data_path, "Dataset CSV")->required();
  eval->add_option("-m,--model", model_path, "Checkpoint")->required();
  eval->add_option("-o,--out", eval_out, "Report CSV (default: stdout)");

  CLI::App* sweep = app.add_subcommand("sweep", "Run a synthetic sweep");
  AddCommon(sweep, &sweep_opts, true);
  sweep->add_option("-o,--out", rows_out, "Per-model rows CSV")->required();
  sweep->add_option("--summary", summary_out, "Per-cell summary CSV");

  CLI::App* ihdp = app.add_subcommand("ihdp", "Run IHDP replications");
  AddCommon(ihdp, &ihdp_opts, true);
  ihdp->add_option("-o,--out", rows_out, "Per-replication rows CSV")->required();
  std::string covariates_path;
  int first_replication = -1, last_replication = -1;
  ihdp->add_option("--covariates", covariates_path, "IHDP covariate file");
  ihdp->add_option("--first", first_replication, "First replication")
      ->check(CLI::NonNegativeNumber);
  ihdp->add_option("--last", last_replication, "Last replication")
      ->check(CLI::NonNegativeNumber);

  CLI::App* selftest = app.add_subcommand("selftest", "Numerical self-test");
  selftest->add_option("--seed", selftest_seed, "Seed");
  selftest->add_flag("--timing", selftest_timing, "Report the elapsed time");

  CLI::App* config = app.add_subcommand("config", "Print the resolved configuration");
  AddCommon(config, &config_opts, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // Help and version requests exit 0; usage errors share invalid_argument.
    const int code = app.exit(e);
    return code == 0 ? 0 : IVAE_INVALID_ARGUMENT;
  }

  try {
    if (*gen) {
      Config c(gen_opts);
      Dataset data;
      if (ihdp_replication >= 0) {
        c.SetSeed(gen_opts, {"sweep.base_seed"});
        Check(ivae_dataset_ihdp(c.get(), ihdp_replication, data.out()));
      } else {
        c.SetSeed(gen_opts, {"synth.seed"});
        Check(ivae_dataset_generate(c.get(), data.out()));
      }
      Check(ivae_dataset_save(data.get(), gen_out.c_str()));
      int n = 0, m = 0, treated = 0;
      Check(ivae_dataset_info(data.get(), &n, &m, &treated));
      std::printf("wrote %s: %d units, %d covariates, %d treated\n",
                  gen_out.c_str(), n, m, treated);
    } else if (*train) {
      Config c(train_opts);
      c.SetSeed(train_opts, {"model.seed", "train.seed"});
      Dataset data;
      Check(ivae_dataset_load(data_path.c_str(), data.out()));
      Model model;
      Check(ivae_model_create(c.get(), data.get(), model.out()));
      const auto start = std::chrono::steady_clock::now();
      Check(ivae_model_train(model.get(), c.get(), data.get(),
                             trace_path.empty() ? nullptr : trace_path.c_str()));
      Check(ivae_model_save(model.get(), model_path.c_str()));
      std::printf("wrote %s\n", model_path.c_str());
      if (train_opts.timing) {
        std::fprintf(stderr, "trained in %.2fs\n",
                     std::chrono::duration<double>(
                         std::chrono::steady_clock::now() - start).count());
      }
    } else if (*eval) {
      Config c(eval_opts);
      c.SetSeed(eval_opts, {"eval.seed"});
      Dataset data;
      Check(ivae_dataset_load(data_path.c_str(), data.out()));
      Model model;
      Check(ivae_model_load(model_path.c_str(), model.out()));
      Report report;
      Check(ivae_evaluate(model.get(), c.get(), data.get(), report.out()));
      const std::string csv = ReportCsv(report) + "\n";
      if (eval_out.empty()) {
        std::fputs(csv.c_str(), stdout);
      } else {
        std::FILE* f = std::fopen(eval_out.c_str(), "w");
        if (f == nullptr || std::fputs(csv.c_str(), f) < 0 || std::fclose(f) != 0) {
          std::fprintf(stderr, "error: io_error: cannot write '%s'\n", eval_out.c_str());
          return IVAE_IO;
        }
      }
    } else if (*sweep) {
      Config c(sweep_opts);
      c.SetSeed(sweep_opts, {"sweep.base_seed"});
      ProgressState state{sweep_opts.timing};
      Check(ivae_sweep_run(c.get(), rows_out.c_str(),
                           summary_out.empty() ? nullptr : summary_out.c_str(),
                           OnProgress, &state));
      std::printf("wrote %s\n", rows_out.c_str());
      if (!summary_out.empty()) std::printf("wrote %s\n", summary_out.c_str());
    } else if (*ihdp) {
      Config c(ihdp_opts);
      c.SetSeed(ihdp_opts, {"sweep.base_seed"});
      if (!covariates_path.empty()) c.Set("ihdp.covariates", covariates_path);
      if (first_replication >= 0) {
        c.Set("ihdp.first_replication", std::to_string(first_replication));
      }
      if (last_replication >= 0) {
        c.Set("ihdp.last_replication", std::to_string(last_replication));
      }
      ProgressState state{ihdp_opts.timing};
      Check(ivae_ihdp_run(c.get(), rows_out.c_str(), OnProgress, &state));
      std::printf("wrote %s\n", rows_out.c_str());
    } else if (*selftest) {
      const auto start = std::chrono::steady_clock::now();
      int failures = 0;
      Check(ivae_selftest(selftest_seed, OnCheck, nullptr, &failures));
      std::printf("%s: %d check(s) failed\n", failures == 0 ? "ok" : "failed",
                  failures);
      if (selftest_timing) {
        std::fprintf(stderr, "selftest took %.2fs\n",
                     std::chrono::duration<double>(
                         std::chrono::steady_clock::now() - start).count());
      }
      return failures == 0 ? 0 : 1;
    } else if (*config) {
      Config c(config_opts);
      std::fputs(c.Dump().c_str(), stdout);
    }
  } catch (const StatusError& e) {
    const char* message = ivae_last_error();
    if (*message != '\0') {
      std::fprintf(stderr, "error: %s: %s\n", ivae_status_name(e.status), message);
    }
    return static_cast<int>(e.status);
  }
  return 0;
}
