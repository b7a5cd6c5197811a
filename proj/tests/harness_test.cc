#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "common/errors.h"
#include "common/format.h"
#include "harness/config.h"
#include "harness/evaluate.h"
#include "harness/stats.h"
#include "harness/sweep.h"
#include "harness/train.h"
#include "model/intact_vae.h"
#include "synth/synth.h"

namespace ivae {
namespace {

std::vector<double> Flatten(IntactVae& model) {
  std::vector<double> out;
  for (Mlp* net : model.nets()) {
    for (double p : net->params()) out.push_back(p);
  }
  return out;
}

IntactVae SmallModel(int x_dim, std::uint64_t seed) {
  VaeConfig c;
  c.x_dim = x_dim;
  c.latent_dim = 1;
  c.hidden = {16, 16};
  c.seed = seed;
  return IntactVae(c);
}

CausalDataset SmallData(int n, std::uint64_t seed) {
  SynthSpec spec;
  spec.n_points = n;
  spec.seed = seed;
  spec.covariate_dim = 2;
  return Generate(spec);
}

RunConfig TinySweepConfig() {
  RunConfig c;
  c.synth.n_points = 120;
  c.synth.covariate_dim = 2;
  c.model.hidden = {8};
  c.train.max_epochs = 4;
  c.train.batch_size = 40;
  c.eval.mc_draws = 4;
  c.sweep.n_models = 2;
  c.sweep.settings = {CausalSetting::kProxyConfounded, CausalSetting::kIgnorable,
                      CausalSetting::kInstrumental};
  c.sweep.base_seed = 11;
  return c;
}

std::string RowsText(const SweepResult& r, const RunConfig& c) {
  std::ostringstream out;
  WriteSweepRows(r, c, out);
  return out.str();
}

int CountFields(const std::string& line) {
  return 1 + static_cast<int>(std::count(line.begin(), line.end(), ','));
}

TEST(Config, SetThenGetRoundTripsEveryKey) {
  RunConfig c;
  for (const std::string& key : c.Keys()) {
    const std::string v = c.Get(key);
    RunConfig d;
    d.Set(key, v);
    EXPECT_EQ(d.Get(key), v) << key;
  }
  c.Set("synth.alpha", "0.35");
  EXPECT_EQ(c.synth.alpha, 0.35);
  c.Set("model.hidden", "7, 9");
  EXPECT_EQ(c.model.hidden, (std::vector<int>{7, 9}));
  c.Set("sweep.settings", "ignorable,instrumental");
  ASSERT_EQ(c.sweep.settings.size(), 2u);
  EXPECT_EQ(c.sweep.settings[1], CausalSetting::kInstrumental);
}

TEST(Config, DumpThenMergeReproducesTheConfig) {
  RunConfig c;
  c.Set("synth.beta", "1.5");
  c.Set("model.latent_dim", "3");
  c.Set("train.patience", "inf");
  c.Set("sweep.alpha", "0,0.2,0.4");
  c.Set("eval.baseline", "true");
  c.Set("ihdp.covariates", "some/path.csv");
  const std::string text = DumpRunConfig(c);
  RunConfig d;
  MergeIniText(text, &d);
  EXPECT_EQ(DumpRunConfig(d), text);
  EXPECT_EQ(d.train.patience, TrainConfig::kNoEarlyStopping);
  EXPECT_EQ(d.sweep.alphas, (std::vector<double>{0.0, 0.2, 0.4}));
}

TEST(Config, HeaderCommentPrefixesEveryLine) {
  const std::string text = ConfigHeaderComment(RunConfig{});
  std::istringstream in(text);
  std::string line;
  int lines = 0;
  while (std::getline(in, line)) {
    ++lines;
    EXPECT_EQ(line.rfind("# ", 0), 0u) << line;
  }
  EXPECT_GT(lines, 10);
}

TEST(Config, RejectsUnknownKeysAndBadValues) {
  RunConfig c;
  EXPECT_THROW(c.Set("train.learningrate", "1"), InvalidArgument);
  EXPECT_THROW(c.Set("nosection", "1"), InvalidArgument);
  EXPECT_THROW(c.Set("train.max_epochs", "ten"), InvalidArgument);
  EXPECT_THROW(c.Set("synth.setting", "confused"), InvalidArgument);
  EXPECT_THROW(c.Set("eval.baseline", "maybe"), InvalidArgument);
  EXPECT_THROW(c.Get("model.depth"), InvalidArgument);
  EXPECT_THROW(MergeIniText("[train]\nbogus = 1\n", &c), InvalidArgument);
  EXPECT_THROW(LoadRunConfig("/nonexistent/run.ini"), NotFound);
  c.sweep.jobs = 0;
  EXPECT_THROW(c.Validate(), InvalidArgument);
}

TEST(Config, PatienceAcceptsInf) {
  RunConfig c;
  c.Set("train.patience", "inf");
  EXPECT_EQ(c.train.patience, TrainConfig::kNoEarlyStopping);
  EXPECT_EQ(c.Get("train.patience"), "inf");
  c.Set("train.patience", "5");
  EXPECT_EQ(c.train.patience, 5);
}

TEST(EarlyStopping, NeverStopsOnAStrictlyIncreasingSequence) {
  EarlyStopping s(1);
  for (int e = 1; e <= 1000; ++e) {
    ASSERT_FALSE(s.Update(e, 0.001 * e));
    EXPECT_TRUE(s.improved());
  }
  EXPECT_EQ(s.best_epoch(), 1000);
}

TEST(EarlyStopping, StopsAfterPatienceEpochsWithoutImprovement) {
  EarlyStopping s(3);
  EXPECT_FALSE(s.Update(1, 5.0));
  EXPECT_FALSE(s.Update(2, 4.0));
  EXPECT_FALSE(s.Update(3, 5.0));  // ties do not improve
  EXPECT_TRUE(s.Update(4, std::numeric_limits<double>::quiet_NaN()));
  EXPECT_EQ(s.best_epoch(), 1);
  EXPECT_EQ(s.best_score(), 5.0);
  EXPECT_THROW(EarlyStopping(0), InvalidArgument);
}

TEST(Train, ZeroLearningRateLeavesTheModelUnchanged) {
  const CausalDataset data = SmallData(200, 3);
  IntactVae model = SmallModel(2, 4);
  const std::vector<double> before = Flatten(model);
  TrainConfig tc;
  tc.learning_rate = 0.0;
  tc.max_epochs = 15;
  tc.patience = TrainConfig::kNoEarlyStopping;
  const TrainResult r = TrainModel(&model, data, tc);
  EXPECT_EQ(Flatten(model), before);
  ASSERT_EQ(r.trace.size(), 15u);
  for (const EpochRecord& e : r.trace) {
    EXPECT_EQ(e.valid_elbo, r.trace.front().valid_elbo);
  }
  EXPECT_FALSE(r.stopped_early);
  EXPECT_EQ(r.best_epoch, 1);
}

TEST(Train, ValidationElboImprovesOnASmallProblem) {
  const CausalDataset data = SmallData(300, 5);
  IntactVae model = SmallModel(2, 6);
  TrainConfig tc;
  tc.learning_rate = 1e-3;
  tc.max_epochs = 200;
  tc.patience = TrainConfig::kNoEarlyStopping;
  const TrainResult r = TrainModel(&model, data, tc);
  ASSERT_EQ(r.epochs_run, 200);
  EXPECT_GT(r.best_valid_elbo, r.trace.front().valid_elbo + 0.5);
  EXPECT_GT(r.trace.back().train_elbo, r.trace.front().train_elbo);
}

TEST(Train, RestoresTheBestValidationSnapshot) {
  const CausalDataset data = SmallData(300, 7);
  TrainConfig tc;
  tc.learning_rate = 5e-3;
  tc.max_epochs = 60;
  tc.patience = 5;
  tc.seed = 8;
  IntactVae model = SmallModel(2, 9);
  const TrainResult r = TrainModel(&model, data, tc);

  double best = -std::numeric_limits<double>::infinity();
  int best_epoch = 0;
  for (const EpochRecord& e : r.trace) {
    if (e.valid_elbo > best) {
      best = e.valid_elbo;
      best_epoch = e.epoch;
    }
  }
  EXPECT_EQ(r.best_valid_elbo, best);
  EXPECT_EQ(r.best_epoch, best_epoch);
  if (r.stopped_early) EXPECT_EQ(r.epochs_run, r.best_epoch + tc.patience);

  // Rerunning up to the best epoch reproduces the restored parameters.
  IntactVae replay = SmallModel(2, 9);
  tc.max_epochs = r.best_epoch;
  tc.patience = TrainConfig::kNoEarlyStopping;
  const TrainResult rr = TrainModel(&replay, data, tc);
  EXPECT_EQ(rr.best_valid_elbo, r.best_valid_elbo);
  EXPECT_EQ(Flatten(replay), Flatten(model));
}

TEST(Train, EvaluatesOnlyEveryKEpochs) {
  const CausalDataset data = SmallData(150, 1);
  IntactVae model = SmallModel(2, 2);
  TrainConfig tc;
  tc.max_epochs = 7;
  tc.eval_every = 3;
  const TrainResult r = TrainModel(&model, data, tc);
  ASSERT_EQ(r.trace.size(), 7u);
  for (const EpochRecord& e : r.trace) {
    const bool evaluated = e.epoch % 3 == 0 || e.epoch == 7;
    EXPECT_EQ(std::isfinite(e.valid_elbo), evaluated) << e.epoch;
  }
  std::ostringstream out;
  WriteTrace(r, out);
  EXPECT_EQ(out.str().rfind("epoch,train_elbo,valid_elbo\n", 0), 0u);
}

TEST(Train, RejectsMismatchedData) {
  const CausalDataset data = SmallData(100, 1);
  IntactVae model = SmallModel(3, 2);
  EXPECT_THROW(TrainModel(&model, data, TrainConfig{}), InvalidArgument);
}

TEST(Stats, SummarizeSkipsNonFiniteEntries) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  const std::vector<double> v = {1.0, nan, 2.0, 4.0, 3.0};
  const Summary s = Summarize(v);
  EXPECT_EQ(s.count, 4);
  EXPECT_DOUBLE_EQ(s.mean, 2.5);
  EXPECT_DOUBLE_EQ(s.median, 2.5);
  EXPECT_DOUBLE_EQ(s.stddev, std::sqrt(5.0 / 3.0));
  EXPECT_DOUBLE_EQ(s.stderr_mean, std::sqrt(5.0 / 3.0) / 2.0);
  EXPECT_EQ(Median(std::vector<double>{3.0, 1.0, 2.0}), 2.0);
  EXPECT_TRUE(std::isnan(Median(std::vector<double>{nan})));
  EXPECT_TRUE(std::isnan(Summarize(std::vector<double>{}).mean));
}

TEST(Stats, SignTestMatchesTheExactBinomial) {
  std::vector<double> a, b;
  for (int i = 0; i < 20; ++i) {
    a.push_back(i < 15 ? 0.0 : 1.0);
    b.push_back(0.5);
  }
  a.push_back(0.5);  // a tie
  b.push_back(0.5);
  const SignTestResult r = PairedSignTest(a, b);
  EXPECT_EQ(r.wins, 15);
  EXPECT_EQ(r.losses, 5);
  EXPECT_EQ(r.ties, 1);
  // 2 * sum_{k>=15} C(20,k) / 2^20
  EXPECT_NEAR(r.p_value, 2.0 * 21700.0 / 1048576.0, 1e-12);

  const SignTestResult all_win = PairedSignTest(std::vector<double>(20, 0.0),
                                                std::vector<double>(20, 1.0));
  EXPECT_NEAR(all_win.p_value, 2.0 / 1048576.0, 1e-15);
  const SignTestResult ties = PairedSignTest(std::vector<double>(5, 1.0),
                                             std::vector<double>(5, 1.0));
  EXPECT_EQ(ties.p_value, 1.0);
  const SignTestResult even = PairedSignTest(std::vector<double>{0, 1},
                                             std::vector<double>{1, 0});
  EXPECT_EQ(even.p_value, 1.0);
  EXPECT_THROW(PairedSignTest(std::vector<double>(2), std::vector<double>(3)),
               InvalidArgument);
}

TEST(Evaluate, CsvRowMatchesTheHeader) {
  const std::string header = EvalCsvHeader();
  EXPECT_EQ(CountFields(header), 22);
  RunMetadata meta;
  meta.setting = "ignorable";
  meta.outcome_kind = "linear";
  const EvalReport failed = FailedReport(meta, "numeric_error", "detail");
  const std::string row = EvalCsvRow(failed);
  EXPECT_EQ(CountFields(row), 22);
  EXPECT_NE(row.find("numeric_error"), std::string::npos);
  EXPECT_EQ(row.find("detail"), std::string::npos);
  EXPECT_TRUE(std::isnan(failed.pehe_pre));
}

TEST(Evaluate, TrainAndEvaluateFillsTheMetrics) {
  RunConfig c = TinySweepConfig();
  c.eval.baseline = true;
  c.eval.baseline_hidden = {8};
  c.eval.baseline_max_epochs = 3;
  const CausalDataset data = Generate(c.synth);
  const RunOutput out = TrainAndEvaluate(data, c, RunSeeds::From(5), {});
  const EvalReport& r = out.report;
  EXPECT_EQ(r.status, "ok");
  for (double v : {r.eps_ate_pre, r.eps_ate_post, r.pehe_pre, r.pehe_post,
                   r.fit[0].r_squared, r.fit[1].r_squared, r.naive_eps_ate_pre,
                   r.naive_pehe_pre, r.valid_elbo}) {
    EXPECT_TRUE(std::isfinite(v));
  }
  EXPECT_GE(r.pehe_pre, 0.0);
  EXPECT_EQ(r.best_epoch, out.train.best_epoch);
}

TEST(Sweep, GridHasOneRowPerModelAndCell) {
  RunConfig c = TinySweepConfig();
  c.sweep.alphas = {0.0, 0.2};
  const SweepResult r = RunSweep(c);
  ASSERT_EQ(r.rows.size(), 3u * 2u * 2u);
  EXPECT_EQ(r.rows[0].meta.setting, "proxy_confounded");
  EXPECT_EQ(r.rows[0].meta.model_index, 0);
  EXPECT_EQ(r.rows[1].meta.model_index, 1);
  EXPECT_EQ(r.rows[2].meta.alpha, 0.2);
  EXPECT_EQ(r.rows.back().meta.setting, "instrumental");
  for (const EvalReport& row : r.rows) EXPECT_EQ(row.status, "ok") << row.message;
  EXPECT_FALSE(r.summary.empty());
}

TEST(Sweep, ThreadCountDoesNotChangeTheOutput) {
  RunConfig c = TinySweepConfig();
  const std::string serial = RowsText(RunSweep(c), c);
  c.sweep.jobs = 3;
  const SweepResult parallel = RunSweep(c);
  c.sweep.jobs = 1;  // same header text
  EXPECT_EQ(RowsText(parallel, c), serial);
}

TEST(Sweep, CellsArePairedByModelIndex) {
  RunConfig c = TinySweepConfig();
  const auto a = SweepCellData(c, CausalSetting::kProxyConfounded, 0.2, 0.2);
  const auto b = SweepCellData(c, CausalSetting::kIgnorable, 0.2, 0.2);
  ASSERT_EQ(a.size(), 2u);
  EXPECT_EQ(a[0].split, b[0].split);
  EXPECT_NE(a[0].y, a[1].y);
  EXPECT_EQ(SweepDataSeed(3, 1), SweepDataSeed(3, 1));
  EXPECT_NE(SweepDataSeed(3, 1), SweepDataSeed(3, 2));
  EXPECT_NE(SweepDataSeed(3, 1), SweepRunSeed(3, 1));
}

TEST(Sweep, OutputsStartWithTheConfiguration) {
  RunConfig c = TinySweepConfig();
  c.sweep.n_models = 1;
  c.sweep.settings = {CausalSetting::kIgnorable};
  const SweepResult r = RunSweep(c);
  std::ostringstream rows, summary;
  WriteSweepRows(r, c, rows);
  WriteSweepSummary(r, c, summary);
  const std::string header = ConfigHeaderComment(c);
  EXPECT_EQ(rows.str().rfind(header, 0), 0u);
  EXPECT_EQ(summary.str().rfind(header, 0), 0u);
  EXPECT_NE(rows.str().find(EvalCsvHeader()), std::string::npos);
}

}  // namespace
}  // namespace ivae
