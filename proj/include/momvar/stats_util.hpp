#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>

namespace momvar {

inline double mean(std::span<const double> x) {
  if (x.empty()) throw std::invalid_argument("mean: empty sample");
  double s = 0.0;
  for (double v : x) s += v;
  return s / static_cast<double>(x.size());
}

// Sample standard deviation, n-1 denominator.
inline double sample_sd(std::span<const double> x) {
  if (x.size() < 2) throw std::invalid_argument("sample_sd: need n >= 2");
  const double m = mean(x);
  double ss = 0.0;
  for (double v : x) ss += (v - m) * (v - m);
  return std::sqrt(ss / static_cast<double>(x.size() - 1));
}

inline double standard_error(std::span<const double> x) {
  return sample_sd(x) / std::sqrt(static_cast<double>(x.size()));
}

}  // namespace momvar
