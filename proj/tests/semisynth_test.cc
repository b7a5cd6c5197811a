#include <cmath>
#include <functional>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "common/errors.h"
#include "common/rng.h"
#include "semisynth/ihdp.h"

namespace ivae {
namespace {

std::string Header() {
  std::string h;
  for (int j = 1; j <= kIhdpCovariates; ++j) h += "x" + std::to_string(j) + ",";
  return h + "t\n";
}

// Continuous covariates 1..6, binary 7..25.
std::string Row(int seed, int t) {
  std::string r;
  for (int j = 0; j < kIhdpCovariates; ++j) {
    if (j < 6) {
      r += std::to_string(0.25 * (seed + j) - 1.0);
    } else {
      r += ((seed + j) % 3 == 0) ? "1" : "0";
    }
    r += ",";
  }
  return r + std::to_string(t) + "\n";
}

// n seeded units; every third unit is treated.
CovariateTable ToyTable(int n, std::uint64_t seed = 0) {
  Rng rng(seed);
  CovariateTable table;
  table.x.resize(n, kIhdpCovariates);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < kIhdpCovariates; ++j) {
      table.x(i, j) = j < 6 ? StandardNormal(rng) : (Uniform(rng, 0, 1) < 0.3);
    }
    table.t.push_back(i % 3 == 0);
  }
  return table;
}

std::string Message(const std::function<void()>& f) {
  try {
    f();
  } catch (const std::exception& e) {
    return e.what();
  }
  return "";
}

TEST(LoadCovariates, ThreeRowFile) {
  std::istringstream in(Header() + Row(0, 1) + Row(1, 0) + Row(2, 1));
  const CovariateTable table = ReadCovariates(in, CovariateFormat::Plain());
  EXPECT_EQ(table.x.rows(), 3);
  EXPECT_EQ(table.x.cols(), 25);
  EXPECT_EQ(table.t, (std::vector<int>{1, 0, 1}));
  EXPECT_EQ(table.x(1, 0), -0.75);
  EXPECT_EQ(table.x(2, 6), 0.0);
  EXPECT_EQ(table.x(0, 6), 1.0);
}

TEST(LoadCovariates, NonNumericCellNamesLineAndColumn) {
  std::string bad = Row(1, 0);
  bad.replace(bad.find(','), 0, "x");  // first cell becomes "-0.750000x"
  std::istringstream in(Header() + Row(0, 1) + bad);
  const std::string msg =
      Message([&]() { ReadCovariates(in, CovariateFormat::Plain()); });
  EXPECT_NE(msg.find("line 3"), std::string::npos) << msg;
  EXPECT_NE(msg.find("column 1"), std::string::npos) << msg;
  std::istringstream parse_again(Header() + bad);
  EXPECT_THROW(ReadCovariates(parse_again, CovariateFormat::Plain()), ParseError);
}

TEST(LoadCovariates, RejectsNonBinaryAndMissingValues) {
  std::string row = Row(0, 1);
  // Column 7 is the first binary covariate.
  std::size_t pos = 0;
  for (int k = 0; k < 6; ++k) pos = row.find(',', pos) + 1;
  std::string nonbinary = row;
  nonbinary.replace(pos, 1, "2");
  std::istringstream a(Header() + nonbinary);
  const std::string msg =
      Message([&]() { ReadCovariates(a, CovariateFormat::Plain()); });
  EXPECT_NE(msg.find("column 7"), std::string::npos) << msg;
  std::string missing = row;
  missing.replace(pos, 1, "nan");
  std::istringstream b(Header() + missing);
  EXPECT_THROW(ReadCovariates(b, CovariateFormat::Plain()), ParseError);
  std::istringstream c(Header() + "1,2,3\n");
  EXPECT_THROW(ReadCovariates(c, CovariateFormat::Plain()), ParseError);
  std::istringstream d(Header());
  EXPECT_THROW(ReadCovariates(d, CovariateFormat::Plain()), ParseError);
}

TEST(LoadCovariates, MissingFileIsNotInstalled) {
  try {
    LoadCovariates("/nonexistent/ihdp.csv", CovariateFormat::Plain());
    FAIL();
  } catch (const NotFound& e) {
    EXPECT_NE(std::string(e.what()).find("not installed"), std::string::npos);
  }
}

TEST(LoadCovariates, NpciLayoutRecodesColumnFourteen) {
  // treatment, y_factual, y_cfactual, mu0, mu1, then 25 covariates with the
  // fourteenth stored as 1/2.
  std::string line = "1,3.2,1.1,0.9,4.0";
  for (int j = 0; j < kIhdpCovariates; ++j) {
    line += ",";
    line += j < 6 ? "0.5" : (j == 13 ? "2" : "0");
  }
  std::istringstream in(line + "\n");
  const CovariateTable table = ReadCovariates(in, CovariateFormat::Npci());
  ASSERT_EQ(table.size(), 1);
  EXPECT_EQ(table.t[0], 1);
  EXPECT_EQ(table.x(0, 0), 0.5);
  EXPECT_EQ(table.x(0, 13), 1.0);
  EXPECT_EQ(table.x(0, 12), 0.0);
  EXPECT_THROW(CovariateFormat::ByName("xlsx"), InvalidArgument);
}

TEST(LoadCovariates, WriteLoadRoundTrip) {
  const CovariateTable table = ToyTable(17, 4);
  std::stringstream buf;
  WriteCovariates(table, buf);
  const CovariateTable back = ReadCovariates(buf, CovariateFormat::Plain());
  EXPECT_EQ(back.x, table.x);
  EXPECT_EQ(back.t, table.t);
}

TEST(SynthesizeIhdp, ZeroCoefficientsGiveConstantMeans) {
  const CovariateTable table = ToyTable(40);
  IhdpOptions opts;
  opts.overlap = 2.5;
  const IhdpReplication rep =
      SynthesizeIhdpWith(table, 3, Eigen::VectorXd::Zero(25), opts);
  for (int i = 0; i < table.size(); ++i) {
    EXPECT_EQ(rep.mu0[i], 1.0);
    EXPECT_EQ(rep.mu1[i], -2.5);
  }
  // Default rule: treated mean effect 4, so o = (0 - 1) - 4.
  const IhdpReplication dflt =
      SynthesizeIhdpWith(table, 3, Eigen::VectorXd::Zero(25));
  EXPECT_EQ(dflt.overlap, -5.0);
  EXPECT_EQ(dflt.mu1[0], 5.0);
}

TEST(SynthesizeIhdp, BiasEntersTheControlSurface) {
  CovariateTable table = ToyTable(5);
  table.x.col(0).setZero();
  Eigen::VectorXd a = Eigen::VectorXd::Zero(25);
  a[0] = 1.0;
  const IhdpReplication rep = SynthesizeIhdpWith(table, 1, a);
  for (int i = 0; i < table.size(); ++i) {
    EXPECT_DOUBLE_EQ(rep.mu0[i], std::exp(0.5));
  }
}

TEST(SynthesizeIhdp, TwoUnitHandComputedEffects) {
  CovariateTable table;
  table.x = Eigen::MatrixXd::Zero(2, 25);
  table.x(0, 0) = 1.0;
  table.x(0, 1) = 2.0;
  table.x(1, 1) = 1.0;
  table.x(1, 2) = 1.0;
  table.t = {1, 0};
  Eigen::VectorXd a = Eigen::VectorXd::Zero(25);
  a[0] = 0.1;
  a[1] = 0.2;
  IhdpOptions opts;
  opts.overlap = 0.3;
  const IhdpReplication rep = SynthesizeIhdpWith(table, 9, a, opts);
  // a'x = 0.5 and 0.2; the bias adds 0.5 * (0.1 + 0.2) = 0.15 in the exponent.
  const Eigen::VectorXd cate = rep.mu1 - rep.mu0;
  EXPECT_NEAR(cate[0], 0.5 - 0.3 - std::exp(0.65), 1e-14);
  EXPECT_NEAR(cate[1], 0.2 - 0.3 - std::exp(0.35), 1e-14);
  EXPECT_NEAR(cate[0], -1.7155408290138962, 1e-12);
  EXPECT_NEAR(cate[1], -1.5190675485932573, 1e-12);
}

TEST(SynthesizeIhdp, DefaultOverlapHitsTreatedMeanEffect) {
  const CovariateTable table = ToyTable(90, 2);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const IhdpReplication rep = SynthesizeIhdp(table, seed);
    double sum = 0.0;
    int count = 0;
    for (int i = 0; i < table.size(); ++i) {
      if (table.t[i] == 1) {
        sum += rep.mu1[i] - rep.mu0[i];
        ++count;
      }
    }
    EXPECT_NEAR(sum / count, 4.0, 1e-12);
  }
}

TEST(SynthesizeIhdp, CoefficientsFollowTheLaw) {
  const CovariateTable table = ToyTable(3);
  int zeros = 0, total = 0;
  for (std::uint64_t seed = 0; seed < 400; ++seed) {
    const IhdpReplication rep = SynthesizeIhdp(table, seed);
    for (int j = 0; j < 25; ++j) {
      const double v = rep.coefficients[j];
      EXPECT_TRUE(v == 0.0 || v == 0.1 || v == 0.2 || v == 0.3 || v == 0.4) << v;
      zeros += v == 0.0;
      ++total;
    }
  }
  // Binomial(10000, 0.6): sd 0.0049.
  EXPECT_NEAR(static_cast<double>(zeros) / total, 0.6, 0.02);
}

TEST(SynthesizeIhdp, ConsistencyNoiseAndUnknownPropensity) {
  const CovariateTable table = ToyTable(3000, 7);
  const IhdpReplication rep = SynthesizeIhdp(table, 11);
  const CausalDataset& d = rep.data;
  EXPECT_EQ(d.propensity.size(), 0);
  EXPECT_EQ(d.t, table.t);
  EXPECT_EQ(d.x, table.x);
  for (int i = 0; i < d.size(); ++i) {
    EXPECT_EQ(d.y[i], d.t[i] == 1 ? d.y1[i] : d.y0[i]);
  }
  EXPECT_EQ(d.z_true.col(0), table.x * rep.coefficients);
  // Unit-variance outcome noise on both arms.
  const Eigen::ArrayXd e0 = (d.y0 - rep.mu0).array();
  const Eigen::ArrayXd e1 = (d.y1 - rep.mu1).array();
  EXPECT_NEAR(e0.mean(), 0.0, 4.0 / std::sqrt(3000.0));
  EXPECT_NEAR(e1.mean(), 0.0, 4.0 / std::sqrt(3000.0));
  EXPECT_NEAR(e0.square().mean(), 1.0, 0.1);
  EXPECT_NEAR(e1.square().mean(), 1.0, 0.1);
}

TEST(SynthesizeIhdp, ReplicationsAreDeterministic) {
  const CovariateTable table = ToyTable(50, 1);
  const IhdpReplication a = SynthesizeIhdp(table, 21);
  const IhdpReplication b = SynthesizeIhdp(table, 21);
  EXPECT_EQ(a.coefficients, b.coefficients);
  EXPECT_EQ(a.overlap, b.overlap);
  EXPECT_EQ(a.data.y, b.data.y);
  EXPECT_EQ(a.data.y0, b.data.y0);
  EXPECT_EQ(a.data.y1, b.data.y1);
  EXPECT_EQ(a.data.split, b.data.split);
  EXPECT_NE(SynthesizeIhdp(table, 22).data.y0, a.data.y0);
}

TEST(SynthesizeIhdp, SplitSixtyThreeTwentySevenTen) {
  for (int n : {100, 747}) {
    const IhdpReplication rep = SynthesizeIhdp(ToyTable(n), 5);
    const CausalDataset& d = rep.data;
    const auto train = d.Indices({Split::kTrain});
    const auto valid = d.Indices({Split::kValid});
    const auto test = d.Indices({Split::kTest});
    EXPECT_EQ(static_cast<int>(train.size()), static_cast<int>(std::lround(0.63 * n)));
    EXPECT_EQ(static_cast<int>(valid.size()), static_cast<int>(std::lround(0.27 * n)));
    EXPECT_EQ(train.size() + valid.size() + test.size(), static_cast<std::size_t>(n));
  }
}

TEST(SynthesizeIhdp, RejectsBadInputs) {
  CovariateTable table = ToyTable(5);
  EXPECT_THROW(SynthesizeIhdpWith(table, 0, Eigen::VectorXd::Zero(3)),
               InvalidArgument);
  table.t.clear();
  EXPECT_THROW(SynthesizeIhdp(table, 0), InvalidArgument);
  IhdpOptions opts;
  opts.coefficient_probs = {1.0};
  EXPECT_THROW(SynthesizeIhdp(ToyTable(5), 0, opts), InvalidArgument);
}

TEST(LoadCovariates, ShippedStandInFileParses) {
  const CovariateTable table = LoadCovariates(
      std::string(IVAE_SOURCE_DIR) + "/data/ihdp_standin.csv", CovariateFormat::Plain());
  EXPECT_EQ(table.size(), 30);
  EXPECT_EQ(table.x.cols(), kIhdpCovariates);
  ASSERT_TRUE(table.has_treatment());
  const IhdpReplication rep = SynthesizeIhdp(table, 1);
  EXPECT_EQ(rep.data.size(), 30);
}

}  // namespace
}  // namespace ivae
