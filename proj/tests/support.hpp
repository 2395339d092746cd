#pragma once

#include <algorithm>
#include <cmath>

// |a - b| / |b|, falling back to |a - b| when b is zero.
inline double rel_err(double a, double b) {
  const double d = std::abs(a - b);
  return b == 0.0 ? d : d / std::abs(b);
}

inline double abs_err(double a, double b) { return std::abs(a - b); }
