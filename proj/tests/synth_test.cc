#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <vector>

#include <gtest/gtest.h>

#include "common/errors.h"
#include "data/dataset.h"
#include "synth/quadrature.h"
#include "synth/synth.h"

namespace ivae {
namespace {

constexpr CausalSetting kSettings[] = {CausalSetting::kProxyConfounded,
                                       CausalSetting::kInstrumental,
                                       CausalSetting::kIgnorable};
constexpr OutcomeKind kKinds[] = {OutcomeKind::kLinear,
                                  OutcomeKind::kNonlinearInvertible};

SynthSpec Spec(std::uint64_t seed, CausalSetting setting, OutcomeKind kind,
               int n = 1500) {
  SynthSpec s;
  s.seed = seed;
  s.setting = setting;
  s.outcome_kind = kind;
  s.n_points = n;
  return s;
}

double SampleVariance(const std::vector<double>& v) {
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= v.size();
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return ss / (v.size() - 1);
}

TEST(Quadrature, ExactOnPolynomials) {
  // E[X^2] = 1, E[X^4] = 3, E[X^6] = 15 for X ~ N(0, 1).
  const GaussHermiteRule& rule = GaussHermite(10);
  double m2 = 0.0, m4 = 0.0, m6 = 0.0, total = 0.0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    const double x = rule.nodes[i];
    total += rule.weights[i];
    m2 += rule.weights[i] * x * x;
    m4 += rule.weights[i] * std::pow(x, 4);
    m6 += rule.weights[i] * std::pow(x, 6);
  }
  EXPECT_NEAR(total, 1.0, 1e-13);
  EXPECT_NEAR(m2, 1.0, 1e-12);
  EXPECT_NEAR(m4, 3.0, 1e-12);
  EXPECT_NEAR(m6, 15.0, 1e-11);
}

TEST(Quadrature, LognormalMean) {
  const double mean = 0.3, var = 0.5;
  const double got = GaussianExpectation([](double x) { return std::exp(x); },
                                         mean, var, 40);
  EXPECT_NEAR(got, std::exp(mean + var / 2.0), 1e-12);
  EXPECT_EQ(GaussianExpectation([](double x) { return x * x; }, 2.0, 0.0, 5),
            4.0);
}

TEST(SynthSpec, RejectsOutOfRangeFields) {
  SynthSpec s;
  s.alpha = 1.0;
  EXPECT_THROW(s.Validate(), InvalidArgument);
  s.alpha = -0.1;
  EXPECT_THROW(s.Validate(), InvalidArgument);
  s = SynthSpec();
  s.beta = -1.0;
  EXPECT_THROW(s.Validate(), InvalidArgument);
  s = SynthSpec();
  s.n_points = 2;
  EXPECT_THROW(s.Validate(), InvalidArgument);
  EXPECT_THROW(ParseSetting("observational"), InvalidArgument);
  EXPECT_EQ(ParseSetting(SettingName(CausalSetting::kInstrumental)),
            CausalSetting::kInstrumental);
  EXPECT_EQ(ParseOutcomeKind("linear"), OutcomeKind::kLinear);
}

TEST(BuildGeneratingModel, CovariateParametersInRange) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const GeneratingModel m = GeneratingModel::Build(
        Spec(seed, CausalSetting::kProxyConfounded, OutcomeKind::kLinear));
    ASSERT_EQ(m.covariate_mean().size(), 3);
    for (int i = 0; i < 3; ++i) {
      EXPECT_GT(m.covariate_mean()[i], -0.2);
      EXPECT_LT(m.covariate_mean()[i], 0.2);
      EXPECT_GT(m.covariate_variance()[i], 0.0);
      EXPECT_LT(m.covariate_variance()[i], 0.2);
    }
  }
}

TEST(BuildGeneratingModel, LinearSlopesBoundedAwayFromZero) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const GeneratingModel m = GeneratingModel::Build(
        Spec(seed, CausalSetting::kIgnorable, OutcomeKind::kLinear));
    EXPECT_GE(std::abs(m.linear_slope(0)), 1e-3);
    EXPECT_GE(std::abs(m.linear_slope(1)), 1e-3);
  }
}

TEST(BuildGeneratingModel, EqualSeedsGiveIdenticalCoefficients) {
  for (OutcomeKind kind : kKinds) {
    const SynthSpec s = Spec(77, CausalSetting::kInstrumental, kind);
    const GeneratingModel a = GeneratingModel::Build(s);
    const GeneratingModel b = GeneratingModel::Build(s);
    EXPECT_EQ(a.covariate_mean(), b.covariate_mean());
    EXPECT_EQ(a.covariate_variance(), b.covariate_variance());
    EXPECT_EQ(a.normalizer(0), b.normalizer(0));
    EXPECT_EQ(a.normalizer(1), b.normalizer(1));
    EXPECT_EQ(a.linear_slope(1), b.linear_slope(1));
    for (int t = 0; t < 2; ++t) {
      const auto pa = a.outcome_net(t).params();
      const auto pb = b.outcome_net(t).params();
      EXPECT_TRUE(std::equal(pa.begin(), pa.end(), pb.begin(), pb.end()));
    }
    const Eigen::Vector3d x(0.1, -0.05, 0.2);
    EXPECT_EQ(a.LatentMean(a.source_dim() == 1 ? Eigen::VectorXd::Constant(1, 0.1)
                                               : Eigen::VectorXd(x)),
              b.LatentMean(b.source_dim() == 1 ? Eigen::VectorXd::Constant(1, 0.1)
                                               : Eigen::VectorXd(x)));
    EXPECT_EQ(a.Propensity(x, 0.4), b.Propensity(x, 0.4));
  }
}

TEST(BuildGeneratingModel, NonlinearOutcomesAreStrictlyIncreasing) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const GeneratingModel m = GeneratingModel::Build(
        Spec(seed, CausalSetting::kProxyConfounded,
             OutcomeKind::kNonlinearInvertible));
    for (int t = 0; t < 2; ++t) {
      double prev = m.RawOutcome(-6.0, t);
      for (double z = -5.95; z <= 6.0; z += 0.05) {
        const double cur = m.RawOutcome(z, t);
        EXPECT_GT(cur, prev) << "seed " << seed << " arm " << t << " z " << z;
        prev = cur;
      }
    }
  }
}

// Group-wise variance of the normalized outcome mean on fresh data.
TEST(BuildGeneratingModel, NormalizedOutcomeVarianceNearOne) {
  for (CausalSetting setting : kSettings) {
    for (OutcomeKind kind : kKinds) {
      for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const SynthSpec s = Spec(seed, setting, kind, 30000);
        const GeneratingModel m = GeneratingModel::Build(s);
        const CausalDataset d = Generate(m);
        std::vector<double> arm[2];
        for (int i = 0; i < d.size(); ++i) {
          arm[d.t[i]].push_back(m.OutcomeMean(d.z_true(i, 0), d.t[i]));
        }
        for (int t = 0; t < 2; ++t) {
          ASSERT_GT(arm[t].size(), 100u);
          const double v = SampleVariance(arm[t]);
          EXPECT_GE(v, 0.8) << SettingName(setting) << " seed " << seed;
          EXPECT_LE(v, 1.25) << SettingName(setting) << " seed " << seed;
        }
      }
    }
  }
}

TEST(BuildGeneratingModel, LatentVarianceAveragesToBeta) {
  for (double beta : {0.2, 1.0, 3.0}) {
    SynthSpec s = Spec(5, CausalSetting::kProxyConfounded, OutcomeKind::kLinear,
                       30000);
    s.beta = beta;
    const GeneratingModel m = GeneratingModel::Build(s);
    const CausalDataset d = Generate(m);
    double mean = 0.0;
    for (int i = 0; i < d.size(); ++i) {
      mean += m.LatentVariance(d.x.row(i).transpose());
    }
    mean /= d.size();
    EXPECT_NEAR(mean / beta, 1.0, 0.05);
  }
}

TEST(BuildGeneratingModel, PropensitiesMostlyWithinOverlapBand) {
  for (CausalSetting setting : kSettings) {
    const CausalDataset d = Generate(
        Spec(9, setting, OutcomeKind::kNonlinearInvertible, 20000));
    int inside = 0;
    for (int i = 0; i < d.size(); ++i) {
      if (d.propensity[i] >= 0.05 && d.propensity[i] <= 0.95) ++inside;
    }
    EXPECT_GE(inside, 0.99 * d.size()) << SettingName(setting);
  }
}

TEST(Generate, ConsistencyPositivityAndSplitsOnEveryDataset) {
  for (CausalSetting setting : kSettings) {
    for (OutcomeKind kind : kKinds) {
      for (std::uint64_t seed = 100; seed < 104; ++seed) {
        SynthSpec s = Spec(seed, setting, kind, 301);
        s.alpha = 0.1 * (seed - 100);
        s.beta = 0.5 * (seed - 100);
        const CausalDataset d = Generate(s);
        ASSERT_EQ(d.size(), 301);
        ASSERT_EQ(d.covariate_dim(), 3);
        int counts[3] = {0, 0, 0};
        for (int i = 0; i < d.size(); ++i) {
          EXPECT_EQ(d.y[i], d.t[i] == 1 ? d.y1[i] : d.y0[i]);
          EXPECT_GT(d.propensity[i], 0.0);
          EXPECT_LT(d.propensity[i], 1.0);
          ++counts[static_cast<int>(d.split[i])];
        }
        EXPECT_EQ(counts[0], 100);
        EXPECT_EQ(counts[1], 100);
        EXPECT_EQ(counts[2], 101);
        std::set<int> all;
        for (Split sp : {Split::kTrain, Split::kValid, Split::kTest}) {
          for (int i : d.Indices({sp})) EXPECT_TRUE(all.insert(i).second);
        }
        EXPECT_EQ(static_cast<int>(all.size()), d.size());
      }
    }
  }
}

TEST(Generate, ZeroOutcomeNoiseGivesNoiselessOutcomes) {
  for (OutcomeKind kind : kKinds) {
    SynthSpec s = Spec(3, CausalSetting::kProxyConfounded, kind, 300);
    s.alpha = 0.0;
    const GeneratingModel m = GeneratingModel::Build(s);
    const CausalDataset d = Generate(m);
    for (int i = 0; i < d.size(); ++i) {
      const double z = d.z_true(i, 0);
      EXPECT_EQ(d.y0[i], m.OutcomeMean(z, 0));
      EXPECT_EQ(d.y1[i], m.OutcomeMean(z, 1));
      EXPECT_EQ(d.y[i], m.OutcomeMean(z, d.t[i]));
    }
  }
}

TEST(Generate, IgnorablePropensityIgnoresTheLatent) {
  const GeneratingModel m = GeneratingModel::Build(
      Spec(12, CausalSetting::kIgnorable, OutcomeKind::kNonlinearInvertible));
  const CausalDataset d = Generate(m);
  for (int i = 0; i < 50; ++i) {
    const Eigen::VectorXd x = d.x.row(i).transpose();
    const double p = m.Propensity(x, d.z_true(i, 0));
    EXPECT_EQ(d.propensity[i], p);
    for (double z : {-3.0, 0.0, 0.7, 5.0}) EXPECT_EQ(m.Propensity(x, z), p);
  }
}

TEST(Generate, ProxyConfoundedPropensityIgnoresCovariates) {
  const GeneratingModel m = GeneratingModel::Build(
      Spec(12, CausalSetting::kProxyConfounded, OutcomeKind::kLinear));
  const double p = m.Propensity(Eigen::Vector3d(0.1, 0.2, 0.3), 0.5);
  EXPECT_EQ(m.Propensity(Eigen::Vector3d(-1.0, 4.0, 0.0), 0.5), p);
  EXPECT_NE(m.Propensity(Eigen::Vector3d(0.1, 0.2, 0.3), -0.5), p);
}

TEST(Generate, InstrumentalLatentIgnoresCovariates) {
  // z is drawn from the hidden source, so it is uncorrelated with x while t
  // depends on x.
  const CausalDataset d = Generate(
      Spec(4, CausalSetting::kInstrumental, OutcomeKind::kLinear, 40000));
  const Eigen::VectorXd z = d.z_true.col(0);
  const double zc = z.mean();
  for (int j = 0; j < d.covariate_dim(); ++j) {
    const Eigen::VectorXd xj = d.x.col(j);
    const double xc = xj.mean();
    const double cov = ((xj.array() - xc) * (z.array() - zc)).mean();
    const double corr =
        cov / std::sqrt((xj.array() - xc).square().mean() *
                        (z.array() - zc).square().mean());
    EXPECT_LT(std::abs(corr), 4.0 / std::sqrt(d.size())) << "covariate " << j;
  }
}

TEST(Generate, EqualSpecsGiveBitIdenticalDatasets) {
  const SynthSpec s =
      Spec(2024, CausalSetting::kInstrumental, OutcomeKind::kNonlinearInvertible);
  const CausalDataset a = Generate(s);
  const CausalDataset b = Generate(s);
  EXPECT_EQ(a.x, b.x);
  EXPECT_EQ(a.t, b.t);
  EXPECT_EQ(a.y, b.y);
  EXPECT_EQ(a.y0, b.y0);
  EXPECT_EQ(a.y1, b.y1);
  EXPECT_EQ(a.z_true, b.z_true);
  EXPECT_EQ(a.propensity, b.propensity);
  EXPECT_EQ(a.split, b.split);
  SynthSpec other = s;
  other.seed = 2025;
  EXPECT_NE(Generate(other).y, a.y);
}

// Population ATE by tensor Gauss-Hermite over the independent covariates.
double QuadratureAte(const GeneratingModel& m, int order) {
  const GaussHermiteRule& rule = GaussHermite(order);
  const int dim = m.spec().covariate_dim;
  std::vector<int> idx(dim, 0);
  double total = 0.0;
  while (true) {
    Eigen::VectorXd x(dim);
    double w = 1.0;
    for (int j = 0; j < dim; ++j) {
      x[j] = m.covariate_mean()[j] +
             std::sqrt(m.covariate_variance()[j]) * rule.nodes[idx[j]];
      w *= rule.weights[idx[j]];
    }
    total += w * TrueCate(m, x);
    int j = 0;
    while (j < dim && ++idx[j] == order) idx[j++] = 0;
    if (j == dim) break;
  }
  return total;
}

TEST(Generate, MonteCarloAteMatchesQuadrature) {
  for (CausalSetting setting : kSettings) {
    for (OutcomeKind kind : kKinds) {
      const SynthSpec s = Spec(31, setting, kind, 100000);
      const GeneratingModel m = GeneratingModel::Build(s);
      const CausalDataset d = Generate(m);
      const Eigen::ArrayXd diff = (d.y1 - d.y0).array();
      const double mc = diff.mean();
      const double se =
          std::sqrt((diff - mc).square().sum() / (diff.size() - 1) / diff.size());
      const double quad = QuadratureAte(m, 12);
      EXPECT_LE(std::abs(mc - quad), 3.0 * se)
          << SettingName(setting) << " " << OutcomeKindName(kind) << ": mc " << mc
          << " quadrature " << quad << " se " << se;
    }
  }
}

TEST(TrueCate, LinearClosedForm) {
  for (CausalSetting setting :
       {CausalSetting::kProxyConfounded, CausalSetting::kIgnorable}) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const GeneratingModel m =
          GeneratingModel::Build(Spec(seed, setting, OutcomeKind::kLinear));
      for (const Eigen::Vector3d x :
           {Eigen::Vector3d(0.0, 0.0, 0.0), Eigen::Vector3d(0.3, -0.2, 0.1),
            Eigen::Vector3d(-0.5, 0.4, 0.6)}) {
        const double h = m.LatentMean(x);
        const double expected =
            (m.linear_slope(1) * h + m.linear_intercept(1)) / m.normalizer(1) -
            (m.linear_slope(0) * h + m.linear_intercept(0)) / m.normalizer(0);
        EXPECT_NEAR(TrueCate(m, x), expected, 1e-6);
      }
    }
  }
}

TEST(TrueCate, DegenerateLatentEvaluatesAtTheMean) {
  SynthSpec s = Spec(8, CausalSetting::kProxyConfounded,
                     OutcomeKind::kNonlinearInvertible);
  s.beta = 0.0;
  const GeneratingModel m = GeneratingModel::Build(s);
  const Eigen::Vector3d x(0.1, -0.1, 0.05);
  const double h = m.LatentMean(x);
  EXPECT_EQ(m.LatentVariance(x), 0.0);
  EXPECT_EQ(TrueCate(m, x), m.OutcomeMean(h, 1) - m.OutcomeMean(h, 0));
}

TEST(TrueCate, IdenticalArmsHaveNoEffect) {
  for (CausalSetting setting : kSettings) {
    GeneratingModel m = GeneratingModel::Build(
        Spec(6, setting, OutcomeKind::kNonlinearInvertible));
    m.MakeArmsIdentical();
    for (double v : {-0.4, 0.0, 0.25}) {
      EXPECT_EQ(TrueCate(m, Eigen::Vector3d(v, -v, 0.5 * v)), 0.0);
    }
  }
}

TEST(TrueCate, InstrumentalEffectIsConstantAndTracksEdits) {
  GeneratingModel m = GeneratingModel::Build(
      Spec(6, CausalSetting::kInstrumental, OutcomeKind::kNonlinearInvertible));
  const double tau = TrueCate(m, Eigen::Vector3d(0.1, 0.2, 0.3));
  EXPECT_NE(tau, 0.0);
  EXPECT_EQ(TrueCate(m, Eigen::Vector3d(-0.4, 0.0, 0.9)), tau);
  const GeneratingModel copy = m;
  m.MakeArmsIdentical();
  EXPECT_EQ(TrueCate(m, Eigen::Vector3d(0.1, 0.2, 0.3)), 0.0);
  EXPECT_EQ(TrueCate(copy, Eigen::Vector3d(0.1, 0.2, 0.3)), tau);
}

TEST(TrueCate, RejectsWrongDimension) {
  const GeneratingModel m = GeneratingModel::Build(SynthSpec());
  EXPECT_THROW(TrueCate(m, Eigen::Vector2d(0.0, 0.0)), InvalidArgument);
}

struct ArmFit {
  Eigen::VectorXd coef;  // intercept, then covariates
  double residual_variance = 0.0;
  int n = 0;
};

ArmFit FitArm(const CausalDataset& d, int t) {
  std::vector<int> rows;
  for (int i = 0; i < d.size(); ++i) {
    if (d.t[i] == t) rows.push_back(i);
  }
  Eigen::MatrixXd a(rows.size(), d.covariate_dim() + 1);
  Eigen::VectorXd b(rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    a(r, 0) = 1.0;
    a.row(r).tail(d.covariate_dim()) = d.x.row(rows[r]);
    b[r] = d.y[rows[r]];
  }
  ArmFit fit;
  fit.coef = a.colPivHouseholderQr().solve(b);
  fit.n = static_cast<int>(rows.size());
  fit.residual_variance = (a * fit.coef - b).squaredNorm() / (fit.n - a.cols());
  return fit;
}

// Confounding is real under the proxy setting, and regression on x removes it
// under ignorability.
TEST(Generate, NaiveContrastIsBiasedOnlyUnderConfounding) {
  for (std::uint64_t seed : {1, 2, 3}) {
    const GeneratingModel m = GeneratingModel::Build(
        Spec(seed, CausalSetting::kProxyConfounded, OutcomeKind::kLinear, 400000));
    const CausalDataset d = Generate(m);
    std::vector<double> arm[2];
    for (int i = 0; i < d.size(); ++i) arm[d.t[i]].push_back(d.y[i]);
    auto mean = [](const std::vector<double>& v) {
      double s = 0.0;
      for (double x : v) s += x;
      return s / v.size();
    };
    const double naive = mean(arm[1]) - mean(arm[0]);
    const double ate = (d.y1 - d.y0).mean();
    const double se = std::sqrt(SampleVariance(arm[1]) / arm[1].size() +
                                SampleVariance(arm[0]) / arm[0].size());
    EXPECT_GT(std::abs(naive - ate), 3.0 * se) << "seed " << seed;
  }
  for (std::uint64_t seed : {1, 2, 3}) {
    const GeneratingModel m = GeneratingModel::Build(
        Spec(seed, CausalSetting::kIgnorable, OutcomeKind::kLinear, 100000));
    const CausalDataset d = Generate(m);
    const ArmFit f0 = FitArm(d, 0);
    const ArmFit f1 = FitArm(d, 1);
    double estimate = 0.0, truth = 0.0;
    for (int i = 0; i < d.size(); ++i) {
      Eigen::VectorXd row(d.covariate_dim() + 1);
      row << 1.0, d.x.row(i).transpose();
      estimate += row.dot(f1.coef) - row.dot(f0.coef);
      truth += TrueCate(m, d.x.row(i).transpose());
    }
    estimate /= d.size();
    truth /= d.size();
    const double se = std::sqrt(f1.residual_variance / f1.n +
                                f0.residual_variance / f0.n);
    EXPECT_LE(std::abs(estimate - truth), 3.0 * se) << "seed " << seed;
  }
}

TEST(DatasetCsv, HeaderAndBitExactRoundTrip) {
  SynthSpec s = Spec(15, CausalSetting::kInstrumental,
                     OutcomeKind::kNonlinearInvertible, 90);
  s.covariate_dim = 2;
  const CausalDataset d = Generate(s);
  std::stringstream buf;
  WriteDatasetCsv(d, buf);
  std::string header;
  std::getline(std::istringstream(buf.str()), header);
  EXPECT_EQ(header, "x1,x2,t,y,y0,y1,z1,prop,split");
  const CausalDataset r = ReadDatasetCsv(buf);
  EXPECT_EQ(r.x, d.x);
  EXPECT_EQ(r.t, d.t);
  EXPECT_EQ(r.y, d.y);
  EXPECT_EQ(r.y0, d.y0);
  EXPECT_EQ(r.y1, d.y1);
  EXPECT_EQ(r.z_true, d.z_true);
  EXPECT_EQ(r.propensity, d.propensity);
  EXPECT_EQ(r.split, d.split);
  std::stringstream again;
  WriteDatasetCsv(r, again);
  EXPECT_EQ(again.str(), buf.str());
}

TEST(DatasetCsv, RejectsMalformedInput) {
  std::istringstream inconsistent(
      "x1,t,y,y0,y1,z1,prop,split\n0.1,1,2,3,5,0,0.5,train\n");
  EXPECT_THROW(ReadDatasetCsv(inconsistent), InvalidArgument);
  std::istringstream bad_split(
      "x1,t,y,y0,y1,z1,prop,split\n0.1,1,2,3,2,0,0.5,holdout\n");
  EXPECT_THROW(ReadDatasetCsv(bad_split), ParseError);
  std::istringstream bad_cell("x1,t,y,y0,y1,z1,prop,split\n0.1,1,abc,3,2,0,0.5,train\n");
  EXPECT_THROW(ReadDatasetCsv(bad_cell), ParseError);
  EXPECT_THROW(LoadDataset("/nonexistent/dir/data.csv"), NotFound);
}

TEST(Dataset, ValidateNamesTheFirstViolation) {
  CausalDataset d = Generate(Spec(1, CausalSetting::kIgnorable,
                                  OutcomeKind::kLinear, 30));
  d.y[7] += 1.0;
  try {
    d.Validate();
    FAIL() << "expected InvalidArgument";
  } catch (const InvalidArgument& e) {
    EXPECT_NE(std::string(e.what()).find("unit 7"), std::string::npos) << e.what();
  }
}

}  // namespace
}  // namespace ivae
