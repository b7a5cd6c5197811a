#include "harness/evaluate.h"

#include <limits>

#include "common/errors.h"
#include "common/format.h"
#include "common/rng.h"

namespace ivae {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr std::uint64_t kPostStream = 0x504f;
constexpr std::uint64_t kPreStream = 0x5052;

AffineFit NanFit() { return {kNaN, kNaN, kNaN}; }

}  // namespace

Eigen::VectorXd RecoveredLatent(const IntactVae& model,
                                const CausalDataset& data,
                                std::span<const int> indices) {
  Eigen::MatrixXd x(data.covariate_dim(), indices.size());
  Eigen::MatrixXd y(1, indices.size());
  std::vector<int> t(indices.size());
  for (std::size_t k = 0; k < indices.size(); ++k) {
    const auto col = static_cast<Eigen::Index>(k);
    x.col(col) = data.x.row(indices[k]).transpose();
    y(0, col) = data.y[indices[k]];
    t[k] = data.t[indices[k]];
  }
  return model.EncodeBatch(x, y, t).mean.row(0).transpose();
}

EvalReport EvaluateModel(const IntactVae& model, const CausalDataset& data,
                         const EvalConfig& config, const Mlp* baseline) {
  EvalReport report;
  report.meta.latent_dim = model.latent_dim();
  const std::vector<int> seen = data.Indices({Split::kTrain, Split::kValid});
  const std::vector<int> test = data.Indices({Split::kTest});

  PredictOptions post_options{config.mc_draws,
                              DeriveSeed(config.seed, kPostStream, 0)};
  PredictOptions pre_options{config.mc_draws,
                             DeriveSeed(config.seed, kPreStream, 0)};
  if (!seen.empty()) {
    const std::vector<int> t = SelectEntries(data.t, seen);
    const OutcomePredictions post =
        PredictOutcomesPost(model, SelectRows(data.x, seen),
                            SelectEntries(data.y, seen), t, post_options);
    report.eps_ate_post = AteError(post, data, seen);
    report.pehe_post = RootPehe(post, data, seen);
  } else {
    report.eps_ate_post = report.pehe_post = kNaN;
  }
  if (!test.empty()) {
    const OutcomePredictions pre =
        PredictOutcomesPre(model, SelectRows(data.x, test), pre_options);
    report.eps_ate_pre = AteError(pre, data, test);
    report.pehe_pre = RootPehe(pre, data, test);
  } else {
    report.eps_ate_pre = report.pehe_pre = kNaN;
  }

  report.fit = {NanFit(), NanFit()};
  if (model.latent_dim() == 1 && data.z_true.cols() == 1 && !seen.empty()) {
    const Eigen::VectorXd recovered = RecoveredLatent(model, data, seen);
    const Eigen::VectorXd truth = SelectEntries(Eigen::VectorXd(data.z_true.col(0)), seen);
    const std::vector<int> t = SelectEntries(data.t, seen);
    try {
      report.fit = AffineRecoveryFit(
          {recovered.data(), static_cast<std::size_t>(recovered.size())},
          {truth.data(), static_cast<std::size_t>(truth.size())}, t);
    } catch (const InvalidArgument&) {
      // Degenerate group: leave the fit undefined.
    }
  }

  report.naive_eps_ate_pre = report.naive_pehe_pre = kNaN;
  if (baseline != nullptr && !test.empty()) {
    const OutcomePredictions naive = PredictNaive(*baseline, SelectRows(data.x, test));
    report.naive_eps_ate_pre = AteError(naive, data, test);
    report.naive_pehe_pre = RootPehe(naive, data, test);
  }
  return report;
}

EvalReport FailedReport(const RunMetadata& meta, std::string status,
                        std::string message) {
  EvalReport report;
  report.meta = meta;
  report.status = std::move(status);
  report.message = std::move(message);
  report.eps_ate_pre = report.eps_ate_post = kNaN;
  report.pehe_pre = report.pehe_post = kNaN;
  report.fit = {NanFit(), NanFit()};
  report.naive_eps_ate_pre = report.naive_pehe_pre = kNaN;
  report.best_epoch = 0;
  report.valid_elbo = kNaN;
  return report;
}

std::string EvalCsvHeader() {
  return "setting,outcome_kind,alpha,beta,latent_dim,seed,model_index,status,"
         "eps_ate_pre,eps_ate_post,pehe_pre,pehe_post,"
         "fit0_slope,fit0_intercept,fit0_r2,fit1_slope,fit1_intercept,fit1_r2,"
         "naive_eps_ate_pre,naive_pehe_pre,best_epoch,valid_elbo";
}

std::string EvalCsvRow(const EvalReport& r) {
  std::string row;
  auto add = [&row](const std::string& field) {
    if (!row.empty()) row += ',';
    row += field;
  };
  add(r.meta.setting);
  add(r.meta.outcome_kind);
  add(FormatDouble(r.meta.alpha));
  add(FormatDouble(r.meta.beta));
  add(std::to_string(r.meta.latent_dim));
  add(std::to_string(r.meta.seed));
  add(std::to_string(r.meta.model_index));
  add(r.status);
  for (double v : {r.eps_ate_pre, r.eps_ate_post, r.pehe_pre, r.pehe_post}) {
    add(FormatDouble(v));
  }
  for (const AffineFit& f : r.fit) {
    add(FormatDouble(f.slope));
    add(FormatDouble(f.intercept));
    add(FormatDouble(f.r_squared));
  }
  add(FormatDouble(r.naive_eps_ate_pre));
  add(FormatDouble(r.naive_pehe_pre));
  add(std::to_string(r.best_epoch));
  add(FormatDouble(r.valid_elbo));
  return row;
}

}  // namespace ivae
