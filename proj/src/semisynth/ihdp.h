#ifndef IVAE_SEMISYNTH_IHDP_H_
#define IVAE_SEMISYNTH_IHDP_H_

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "data/dataset.h"

namespace ivae {

inline constexpr int kIhdpCovariates = 25;

// Layout of a covariate file.
struct CovariateFormat {
  char delimiter = ',';
  bool has_header = true;
  int first_covariate_column = 0;
  int num_covariates = kIhdpCovariates;
  // Column holding the treatment; -1 for none. With a header, a column named
  // "t" is used when this is -1.
  int treatment_column = -1;
  // Covariate indices that must be 0/1 after recoding.
  std::vector<int> binary_covariates;
  // Covariate indices stored as 1/2 in the source and shifted down by one.
  std::vector<int> recode_minus_one;

  // Header row, 25 covariate columns plus an optional "t" column.
  static CovariateFormat Plain();
  // Headerless replication files of the common IHDP distribution:
  // treatment, y_factual, y_cfactual, mu0, mu1, x1..x25.
  static CovariateFormat Npci();
  // "plain" or "npci".
  static CovariateFormat ByName(std::string_view name);
};

struct CovariateTable {
  Eigen::MatrixXd x;  // n x 25
  std::vector<int> t;  // empty when the source has no treatment column

  int size() const { return static_cast<int>(x.rows()); }
  bool has_treatment() const { return !t.empty(); }
};

// Throws NotFound ("dataset not installed") for a missing file and
// ParseError naming line and column for malformed content.
CovariateTable LoadCovariates(const std::string& path,
                              const CovariateFormat& format);
CovariateTable ReadCovariates(std::istream& in, const CovariateFormat& format);
// Writes the plain format.
void WriteCovariates(const CovariateTable& table, std::ostream& out);

struct IhdpOptions {
  // o is chosen so the mean CATE over treated units equals this value,
  // unless `overlap` is set.
  double treated_mean_cate = 4.0;
  std::optional<double> overlap;
  std::vector<double> coefficient_values = {0.0, 0.1, 0.2, 0.3, 0.4};
  std::vector<double> coefficient_probs = {0.6, 0.1, 0.1, 0.1, 0.1};
  double bias = 0.5;
  std::array<double, 2> train_valid_fractions = {0.63, 0.27};
};

struct IhdpReplication {
  CausalDataset data;
  Eigen::VectorXd coefficients;  // a
  double overlap = 0.0;          // o
  Eigen::VectorXd mu0;           // exp(a'(x + b)), noiseless
  Eigen::VectorXd mu1;           // a'x - o, noiseless
};

// y(0) ~ N(exp(a'(x + b)), 1), y(1) ~ N(a'x - o, 1); factual outcome picked by
// the table's treatment; z_true holds a'x; propensity is unknown (empty).
IhdpReplication SynthesizeIhdp(const CovariateTable& table, std::uint64_t seed,
                               const IhdpOptions& options = {});
// Same with a given coefficient vector (and the options' overlap rule).
IhdpReplication SynthesizeIhdpWith(const CovariateTable& table,
                                   std::uint64_t seed,
                                   const Eigen::VectorXd& coefficients,
                                   const IhdpOptions& options = {});

}  // namespace ivae

#endif  // IVAE_SEMISYNTH_IHDP_H_
