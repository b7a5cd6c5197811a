#ifndef IVAE_DATA_DATASET_H_
#define IVAE_DATA_DATASET_H_

#include <initializer_list>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace ivae {

enum class Split : int { kTrain = 0, kValid = 1, kTest = 2 };

std::string_view SplitName(Split split);
Split ParseSplit(std::string_view name);

// Units with full ground truth. Matrices hold one unit per row.
struct CausalDataset {
  Eigen::MatrixXd x;           // n x m covariates
  std::vector<int> t;          // n treatments in {0, 1}
  Eigen::VectorXd y;           // factual outcome
  Eigen::VectorXd y0;          // potential outcome under control
  Eigen::VectorXd y1;          // potential outcome under treatment
  Eigen::MatrixXd z_true;      // n x latent_dim true latent (or B-score)
  Eigen::VectorXd propensity;  // p(t=1|.) per unit; empty when unknown
  std::vector<Split> split;

  int size() const { return static_cast<int>(t.size()); }
  int covariate_dim() const { return static_cast<int>(x.cols()); }

  std::vector<int> Indices(std::initializer_list<Split> splits) const;

  // Shapes agree, treatments binary, y equals the selected potential outcome,
  // propensities (when present) lie strictly in (0, 1). Throws
  // InvalidArgument naming the first violation.
  void Validate() const;
};

// Delimited text, header x1..xm,t,y,y0,y1,z1..zk,prop,split. Values are
// written in shortest round-trip form, so Read(Write(d)) reproduces d bit for
// bit. An unknown propensity is written as "nan".
void WriteDatasetCsv(const CausalDataset& data, std::ostream& out);
CausalDataset ReadDatasetCsv(std::istream& in);
void SaveDataset(const CausalDataset& data, const std::string& path);
CausalDataset LoadDataset(const std::string& path);

}  // namespace ivae

#endif  // IVAE_DATA_DATASET_H_
