#pragma once

#include <vector>

namespace signorini {

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  int count = 0;
};

// Ordinary least squares y = intercept + slope x; r2 = 1 for exact data.
LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y);

double median(std::vector<double> v);

}  // namespace signorini
