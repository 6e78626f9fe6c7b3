#pragma once

#include <cstddef>
#include <vector>

namespace countlab {

// Pearson correlation coefficient. Throws if either series has zero variance
// or the lengths differ / are < 2.
double pearson(const std::vector<double>& x, const std::vector<double>& y);

struct SummaryStats {
  std::size_t n = 0;
  double min = 0, q1 = 0, median = 0, q3 = 0, max = 0, mean = 0;
};

// Quartiles by linear interpolation between order statistics.
SummaryStats summarize(std::vector<double> values);

// Standard error of a binomial proportion, sqrt(p(1-p)/n).
double binomial_stderr(double p, std::size_t n);

}  // namespace countlab
