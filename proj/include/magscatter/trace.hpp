#pragma once

#include <string>
#include <utility>
#include <vector>

namespace magscatter {

// Time series of one named nonnegative quantity, times strictly increasing.
struct NormTrace {
  std::string name;
  std::vector<std::pair<double, double>> samples;

  void add(double t, double value);
};

struct RateFit {
  double exponent = 0.0;
  double log_amplitude = 0.0;
  double r_squared = 0.0;
  double t_min = 0.0;
  double t_max = 0.0;
};

}  // namespace magscatter
