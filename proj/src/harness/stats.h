#ifndef IVAE_HARNESS_STATS_H_
#define IVAE_HARNESS_STATS_H_

#include <span>

namespace ivae {

// Summaries over the finite entries; NaN when none remain.
struct Summary {
  int count = 0;
  double mean = 0.0;
  double median = 0.0;
  double stddev = 0.0;  // sample standard deviation
  double stderr_mean = 0.0;
};

Summary Summarize(std::span<const double> values);
double Median(std::span<const double> values);

struct SignTestResult {
  int wins = 0;    // pairs with a < b
  int losses = 0;  // pairs with a > b
  int ties = 0;
  double p_value = 1.0;  // two-sided exact binomial, ties dropped
};

// Paired sign test of a against b; pairs with a NaN are skipped.
SignTestResult PairedSignTest(std::span<const double> a,
                              std::span<const double> b);

}  // namespace ivae

#endif  // IVAE_HARNESS_STATS_H_
