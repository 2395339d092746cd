#pragma once

#include <functional>
#include <vector>

namespace qcrsim {

struct QuadratureOptions {
  double rel_tol = 1e-8;
  double abs_tol = 0.0;
  int max_subdivisions = 4000;
};

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;
  int evaluations = 0;
  bool converged = false;
};

// Globally adaptive 15-point Gauss-Kronrod over [lo, hi]. Interior
// `breakpoints` seed the initial partition so that kinks and peaks sit on
// interval edges.
QuadratureResult integrate_adaptive(const std::function<double(double)>& f, double lo, double hi,
                                    std::vector<double> breakpoints = {},
                                    const QuadratureOptions& options = {});

}  // namespace qcrsim
