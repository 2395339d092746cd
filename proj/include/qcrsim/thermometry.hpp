#pragma once

#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "qcrsim/system.hpp"

namespace qcrsim {

inline constexpr int kGibbsTruncation = 6;
inline constexpr int kMeasuredStates = 4;

// Boltzmann populations p_n ~ exp(-h E_n / k_B T) for n < truncation.
Eigen::VectorXd gibbs_populations(double t_kelvin, const TransmonSpec& spec,
                                  int truncation = kGibbsTruncation);

// First `count` entries renormalized to unit sum.
Eigen::VectorXd normalize_head(const Eigen::VectorXd& p, int count = kMeasuredStates);

// Gibbs populations truncated at `truncation`, then renormalized over the four
// measured states.
Eigen::VectorXd measured_gibbs_populations(double t_kelvin, const TransmonSpec& spec,
                                           int truncation = kGibbsTruncation);

// A population vector is thermal-fittable when it is non-increasing in n.
bool thermal_fittable(const Eigen::VectorXd& p);

struct GibbsFit {
  std::optional<double> temperature;  // K; empty when not thermal-fittable
  double uncertainty = 0.0;           // K, from the residual curvature
  double residual = 0.0;              // sum of squared population errors
  int truncation = kGibbsTruncation;
  bool thermal() const { return temperature.has_value(); }
};

// Least-squares temperature of four measured populations against the
// six-level Gibbs distribution renormalized over four states.
GibbsFit fit_gibbs(const Eigen::VectorXd& measured, const TransmonSpec& spec,
                   int truncation = kGibbsTruncation);

struct SaturationFit {
  double t0 = 0.0;   // K
  double a = 0.0;    // K
  double tau = 0.0;  // ns; NaN when degenerate
  double residual = 0.0;
  bool degenerate = false;
};

class SaturationFitError : public std::runtime_error {
 public:
  SaturationFitError(const std::string& what, SaturationFit best)
      : std::runtime_error(what), best_(best) {}
  const SaturationFit& best_effort() const noexcept { return best_; }

 private:
  SaturationFit best_;
};

// T(t) = t0 + a (1 - exp(-t / tau)) by Levenberg-Marquardt, multi-started
// over tau in {25, 50, 100, 200, 400} ns.
SaturationFit fit_saturation(const std::vector<double>& times_ns, const std::vector<double>& temps_k);

// Least-squares dT/dV over points with V > v_min.
double heating_slope(const std::vector<std::pair<double, double>>& points, double v_min = 0.215);

}  // namespace qcrsim
