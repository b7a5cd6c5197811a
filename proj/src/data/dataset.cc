#include "data/dataset.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>

#include "common/errors.h"
#include "common/format.h"

namespace ivae {

std::string_view SplitName(Split split) {
  switch (split) {
    case Split::kTrain:
      return "train";
    case Split::kValid:
      return "valid";
    case Split::kTest:
      return "test";
  }
  return "unknown";
}

Split ParseSplit(std::string_view name) {
  if (name == "train") return Split::kTrain;
  if (name == "valid") return Split::kValid;
  if (name == "test") return Split::kTest;
  throw ParseError("unknown split '" + std::string(name) + "'");
}

std::vector<int> CausalDataset::Indices(
    std::initializer_list<Split> splits) const {
  std::vector<int> out;
  for (int i = 0; i < size(); ++i) {
    if (std::find(splits.begin(), splits.end(), split[i]) != splits.end()) {
      out.push_back(i);
    }
  }
  return out;
}

void CausalDataset::Validate() const {
  const Eigen::Index n = size();
  if (x.rows() != n || y.size() != n || y0.size() != n || y1.size() != n ||
      z_true.rows() != n || static_cast<Eigen::Index>(split.size()) != n ||
      (propensity.size() != 0 && propensity.size() != n)) {
    throw InvalidArgument("dataset columns have inconsistent lengths");
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    const std::string unit = " (unit " + std::to_string(i) + ")";
    if (t[i] != 0 && t[i] != 1) {
      throw InvalidArgument("treatment must be 0 or 1" + unit);
    }
    if (y[i] != (t[i] == 1 ? y1[i] : y0[i])) {
      throw InvalidArgument("factual outcome differs from potential outcome" +
                            unit);
    }
    if (propensity.size() != 0 &&
        !(propensity[i] > 0.0 && propensity[i] < 1.0)) {
      throw InvalidArgument("propensity outside (0, 1)" + unit);
    }
  }
}

void WriteDatasetCsv(const CausalDataset& data, std::ostream& out) {
  data.Validate();
  const Eigen::Index m = data.x.cols();
  const Eigen::Index k = data.z_true.cols();
  for (Eigen::Index j = 0; j < m; ++j) out << 'x' << j + 1 << ',';
  out << "t,y,y0,y1,";
  for (Eigen::Index j = 0; j < k; ++j) out << 'z' << j + 1 << ',';
  out << "prop,split\n";
  for (int i = 0; i < data.size(); ++i) {
    for (Eigen::Index j = 0; j < m; ++j) out << FormatDouble(data.x(i, j)) << ',';
    out << data.t[i] << ',' << FormatDouble(data.y[i]) << ','
        << FormatDouble(data.y0[i]) << ',' << FormatDouble(data.y1[i]) << ',';
    for (Eigen::Index j = 0; j < k; ++j) {
      out << FormatDouble(data.z_true(i, j)) << ',';
    }
    out << (data.propensity.size() == 0 ? std::string("nan")
                                        : FormatDouble(data.propensity[i]))
        << ',' << SplitName(data.split[i]) << '\n';
  }
}

CausalDataset ReadDatasetCsv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError("dataset: empty input");
  const std::vector<std::string> header = SplitString(Trim(line), ',');
  int m = 0;
  while (m < static_cast<int>(header.size()) &&
         header[m] == "x" + std::to_string(m + 1)) {
    ++m;
  }
  const std::vector<std::string> fixed = {"t", "y", "y0", "y1"};
  if (static_cast<int>(header.size()) < m + 6 ||
      !std::equal(fixed.begin(), fixed.end(), header.begin() + m)) {
    throw ParseError("dataset: header must be x1..xm,t,y,y0,y1,z1..zk,prop,split");
  }
  int k = 0;
  while (m + 4 + k < static_cast<int>(header.size()) &&
         header[m + 4 + k] == "z" + std::to_string(k + 1)) {
    ++k;
  }
  if (static_cast<int>(header.size()) != m + 4 + k + 2 ||
      header[m + 4 + k] != "prop" || header[m + 5 + k] != "split") {
    throw ParseError("dataset: header must end with prop,split");
  }
  std::vector<std::vector<double>> x_rows, z_rows;
  std::vector<double> y, y0, y1, prop;
  CausalDataset data;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (Trim(line).empty()) continue;
    const std::vector<std::string> cells = SplitString(Trim(line), ',');
    if (cells.size() != header.size()) {
      throw ParseError("dataset line " + std::to_string(line_no) + ": expected " +
                       std::to_string(header.size()) + " fields, got " +
                       std::to_string(cells.size()));
    }
    try {
      std::vector<double> xr(m), zr(k);
      for (int j = 0; j < m; ++j) xr[j] = ParseDouble(cells[j]);
      const long long t = ParseInt(cells[m]);
      if (t != 0 && t != 1) throw ParseError("treatment must be 0 or 1");
      data.t.push_back(static_cast<int>(t));
      y.push_back(ParseDouble(cells[m + 1]));
      y0.push_back(ParseDouble(cells[m + 2]));
      y1.push_back(ParseDouble(cells[m + 3]));
      for (int j = 0; j < k; ++j) zr[j] = ParseDouble(cells[m + 4 + j]);
      prop.push_back(ParseDouble(cells[m + 4 + k]));
      data.split.push_back(ParseSplit(Trim(cells[m + 5 + k])));
      x_rows.push_back(std::move(xr));
      z_rows.push_back(std::move(zr));
    } catch (const ParseError& e) {
      throw ParseError("dataset line " + std::to_string(line_no) + ": " +
                       e.what());
    }
  }
  const Eigen::Index n = static_cast<Eigen::Index>(data.t.size());
  data.x.resize(n, m);
  data.z_true.resize(n, k);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (int j = 0; j < m; ++j) data.x(i, j) = x_rows[i][j];
    for (int j = 0; j < k; ++j) data.z_true(i, j) = z_rows[i][j];
  }
  data.y = Eigen::Map<Eigen::VectorXd>(y.data(), n);
  data.y0 = Eigen::Map<Eigen::VectorXd>(y0.data(), n);
  data.y1 = Eigen::Map<Eigen::VectorXd>(y1.data(), n);
  const bool unknown = std::all_of(prop.begin(), prop.end(),
                                   [](double p) { return std::isnan(p); });
  if (!unknown) data.propensity = Eigen::Map<Eigen::VectorXd>(prop.data(), n);
  data.Validate();
  return data;
}

void SaveDataset(const CausalDataset& data, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  WriteDatasetCsv(data, out);
  if (!out) throw IoError("failed writing '" + path + "'");
}

CausalDataset LoadDataset(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw NotFound("cannot open dataset '" + path + "'");
  return ReadDatasetCsv(in);
}

}  // namespace ivae
