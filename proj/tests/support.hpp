#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

namespace testsupport {

struct Mean {
  double mean = 0.0;
  double se = 0.0;
};

inline Mean mean_of(const std::vector<double>& x) {
  double s = 0.0;
  for (double v : x) s += v;
  const double m = s / static_cast<double>(x.size());
  double q = 0.0;
  for (double v : x) q += (v - m) * (v - m);
  const double var = q / static_cast<double>(x.size() - 1);
  return {m, std::sqrt(var / static_cast<double>(x.size()))};
}

inline bool within_se(const Mean& m, double target, double z) { return std::abs(m.mean - target) <= z * m.se; }

}  // namespace testsupport
