#include "semisynth/ihdp.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>

#include "common/errors.h"
#include "common/format.h"
#include "common/rng.h"

namespace ivae {
namespace {

constexpr std::uint64_t kCoefficientStream = 0x636f6566;  // "coef"
constexpr std::uint64_t kNoiseStream = 0x6e6f697365;      // "noise"
constexpr std::uint64_t kSplitStream = 0x73706c6974;      // "split"

std::vector<int> IhdpBinaryCovariates() {
  std::vector<int> idx(kIhdpCovariates - 6);
  std::iota(idx.begin(), idx.end(), 6);
  return idx;
}

}  // namespace

CovariateFormat CovariateFormat::Plain() {
  CovariateFormat f;
  f.binary_covariates = IhdpBinaryCovariates();
  return f;
}

CovariateFormat CovariateFormat::Npci() {
  CovariateFormat f;
  f.has_header = false;
  f.treatment_column = 0;
  f.first_covariate_column = 5;
  f.binary_covariates = IhdpBinaryCovariates();
  f.recode_minus_one = {13};
  return f;
}

CovariateFormat CovariateFormat::ByName(std::string_view name) {
  if (name == "plain") return Plain();
  if (name == "npci") return Npci();
  throw InvalidArgument("unknown covariate format '" + std::string(name) + "'");
}

CovariateTable ReadCovariates(std::istream& in, const CovariateFormat& format) {
  std::string line;
  int line_no = 0;
  int treatment_column = format.treatment_column;
  int first = format.first_covariate_column;
  std::vector<int> covariate_columns;
  if (format.has_header) {
    if (!std::getline(in, line)) throw ParseError("covariates: empty file");
    ++line_no;
    const auto names = SplitString(Trim(line), format.delimiter);
    for (int j = 0; j < static_cast<int>(names.size()); ++j) {
      if (treatment_column < 0 && Trim(names[j]) == "t") treatment_column = j;
    }
    for (int j = first; j < static_cast<int>(names.size()); ++j) {
      if (j != treatment_column) covariate_columns.push_back(j);
    }
    if (static_cast<int>(covariate_columns.size()) != format.num_covariates) {
      throw ParseError("covariates: header has " +
                       std::to_string(covariate_columns.size()) +
                       " covariate columns, expected " +
                       std::to_string(format.num_covariates));
    }
  } else {
    for (int j = 0; j < format.num_covariates; ++j) {
      covariate_columns.push_back(first + j);
    }
  }
  const int min_columns =
      std::max(covariate_columns.back(), treatment_column) + 1;

  std::vector<std::vector<double>> rows;
  CovariateTable table;
  while (std::getline(in, line)) {
    ++line_no;
    if (Trim(line).empty()) continue;
    const auto cells = SplitString(Trim(line), format.delimiter);
    if (static_cast<int>(cells.size()) < min_columns) {
      throw ParseError("covariates line " + std::to_string(line_no) +
                       ": expected at least " + std::to_string(min_columns) +
                       " columns, got " + std::to_string(cells.size()));
    }
    std::vector<double> row(format.num_covariates);
    for (int j = 0; j < format.num_covariates; ++j) {
      try {
        row[j] = ParseDouble(cells[covariate_columns[j]]);
      } catch (const ParseError&) {
        throw ParseError("covariates line " + std::to_string(line_no) +
                         ", column " + std::to_string(covariate_columns[j] + 1) +
                         ": not a number: '" + cells[covariate_columns[j]] + "'");
      }
      if (!std::isfinite(row[j])) {
        throw ParseError("covariates line " + std::to_string(line_no) +
                         ", column " + std::to_string(covariate_columns[j] + 1) +
                         ": missing or non-finite value");
      }
    }
    for (int j : format.recode_minus_one) row[j] -= 1.0;
    for (int j : format.binary_covariates) {
      if (row[j] != 0.0 && row[j] != 1.0) {
        throw ParseError("covariates line " + std::to_string(line_no) +
                         ", column " + std::to_string(covariate_columns[j] + 1) +
                         ": binary covariate is not 0/1");
      }
    }
    if (treatment_column >= 0) {
      double t = 0.0;
      try {
        t = ParseDouble(cells[treatment_column]);
      } catch (const ParseError&) {
        t = -1.0;
      }
      if (t != 0.0 && t != 1.0) {
        throw ParseError("covariates line " + std::to_string(line_no) +
                         ", column " + std::to_string(treatment_column + 1) +
                         ": treatment is not 0/1");
      }
      table.t.push_back(static_cast<int>(t));
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ParseError("covariates: no data rows");
  table.x.resize(static_cast<Eigen::Index>(rows.size()), format.num_covariates);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (int j = 0; j < format.num_covariates; ++j) table.x(i, j) = rows[i][j];
  }
  return table;
}

CovariateTable LoadCovariates(const std::string& path,
                              const CovariateFormat& format) {
  std::ifstream in(path);
  if (!in) throw NotFound("dataset not installed: " + path);
  return ReadCovariates(in, format);
}

void WriteCovariates(const CovariateTable& table, std::ostream& out) {
  for (Eigen::Index j = 0; j < table.x.cols(); ++j) {
    out << (j ? "," : "") << 'x' << j + 1;
  }
  if (table.has_treatment()) out << ",t";
  out << '\n';
  for (int i = 0; i < table.size(); ++i) {
    for (Eigen::Index j = 0; j < table.x.cols(); ++j) {
      out << (j ? "," : "") << FormatDouble(table.x(i, j));
    }
    if (table.has_treatment()) out << ',' << table.t[i];
    out << '\n';
  }
}

IhdpReplication SynthesizeIhdp(const CovariateTable& table, std::uint64_t seed,
                               const IhdpOptions& options) {
  if (options.coefficient_values.size() != options.coefficient_probs.size() ||
      options.coefficient_values.empty()) {
    throw InvalidArgument("coefficient law: values and probabilities differ");
  }
  Rng rng(DeriveSeed(seed, kCoefficientStream));
  std::discrete_distribution<int> pick(options.coefficient_probs.begin(),
                                       options.coefficient_probs.end());
  Eigen::VectorXd a(table.x.cols());
  for (Eigen::Index j = 0; j < a.size(); ++j) {
    a[j] = options.coefficient_values[pick(rng)];
  }
  return SynthesizeIhdpWith(table, seed, a, options);
}

IhdpReplication SynthesizeIhdpWith(const CovariateTable& table,
                                   std::uint64_t seed,
                                   const Eigen::VectorXd& coefficients,
                                   const IhdpOptions& options) {
  const int n = table.size();
  if (!table.has_treatment()) {
    throw InvalidArgument("covariate table has no treatment column");
  }
  if (coefficients.size() != table.x.cols()) {
    throw InvalidArgument("coefficient vector has the wrong length");
  }
  const Eigen::VectorXd score = table.x * coefficients;
  const Eigen::VectorXd mu0 =
      ((table.x.array() + options.bias).matrix() * coefficients).array().exp().matrix();

  IhdpReplication rep;
  rep.coefficients = coefficients;
  if (options.overlap) {
    rep.overlap = *options.overlap;
  } else {
    double sum = 0.0;
    int count = 0;
    for (int i = 0; i < n; ++i) {
      if (table.t[i] == 1) {
        sum += score[i] - mu0[i];
        ++count;
      }
    }
    if (count == 0) {
      sum = (score - mu0).sum();
      count = n;
    }
    rep.overlap = sum / count - options.treated_mean_cate;
  }
  if (!std::isfinite(rep.overlap)) {
    throw InvalidArgument("overlap parameter is not finite");
  }

  rep.mu0 = mu0;
  rep.mu1 = score.array() - rep.overlap;
  CausalDataset& d = rep.data;
  d.x = table.x;
  d.t = table.t;
  d.z_true = score;
  d.y0.resize(n);
  d.y1.resize(n);
  d.y.resize(n);
  Rng noise(DeriveSeed(seed, kNoiseStream));
  for (int i = 0; i < n; ++i) {
    d.y0[i] = rep.mu0[i] + StandardNormal(noise);
    d.y1[i] = rep.mu1[i] + StandardNormal(noise);
    d.y[i] = d.t[i] == 1 ? d.y1[i] : d.y0[i];
  }

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng split_rng(DeriveSeed(seed, kSplitStream));
  std::shuffle(order.begin(), order.end(), split_rng);
  const int n_train =
      static_cast<int>(std::lround(options.train_valid_fractions[0] * n));
  const int n_valid =
      static_cast<int>(std::lround(options.train_valid_fractions[1] * n));
  d.split.assign(n, Split::kTest);
  for (int r = 0; r < n; ++r) {
    d.split[order[r]] = r < n_train             ? Split::kTrain
                        : r < n_train + n_valid ? Split::kValid
                                                : Split::kTest;
  }
  d.Validate();
  return rep;
}

}  // namespace ivae
