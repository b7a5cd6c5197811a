#include "harness/stats.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "common/errors.h"

namespace ivae {
namespace {

std::vector<double> Finite(std::span<const double> values) {
  std::vector<double> out;
  for (double v : values) {
    if (std::isfinite(v)) out.push_back(v);
  }
  return out;
}

double SortedMedian(std::vector<double>& v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

double Median(std::span<const double> values) {
  std::vector<double> v = Finite(values);
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  return SortedMedian(v);
}

Summary Summarize(std::span<const double> values) {
  std::vector<double> v = Finite(values);
  Summary s;
  s.count = static_cast<int>(v.size());
  if (v.empty()) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    s.mean = s.median = s.stddev = s.stderr_mean = nan;
    return s;
  }
  double sum = 0.0;
  for (double x : v) sum += x;
  s.mean = sum / s.count;
  double ss = 0.0;
  for (double x : v) ss += (x - s.mean) * (x - s.mean);
  s.stddev = s.count > 1 ? std::sqrt(ss / (s.count - 1)) : 0.0;
  s.stderr_mean = s.stddev / std::sqrt(static_cast<double>(s.count));
  s.median = SortedMedian(v);
  return s;
}

SignTestResult PairedSignTest(std::span<const double> a,
                              std::span<const double> b) {
  if (a.size() != b.size()) throw InvalidArgument("sign test: size mismatch");
  SignTestResult r;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (std::isnan(a[i]) || std::isnan(b[i])) continue;
    if (a[i] < b[i]) {
      ++r.wins;
    } else if (a[i] > b[i]) {
      ++r.losses;
    } else {
      ++r.ties;
    }
  }
  const int n = r.wins + r.losses;
  if (n == 0) return r;
  const int k = std::min(r.wins, r.losses);
  // P(X <= k) for X ~ Binomial(n, 1/2), summed in log space.
  double tail = 0.0;
  for (int j = 0; j <= k; ++j) {
    const double log_term = std::lgamma(n + 1.0) - std::lgamma(j + 1.0) -
                            std::lgamma(n - j + 1.0) - n * std::log(2.0);
    tail += std::exp(log_term);
  }
  r.p_value = std::min(1.0, 2.0 * tail);
  return r;
}

}  // namespace ivae
