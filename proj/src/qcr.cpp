#include "qcrsim/qcr.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <string>

#include "qcrsim/quadrature.hpp"
#include "qcrsim/units.hpp"

namespace qcrsim {

void JunctionSpec::validate() const {
  if (!(delta > 0.0)) throw ValidationError("junction.delta", "must be > 0");
  if (!(gamma_d > 0.0 && gamma_d < 1.0)) throw ValidationError("junction.gamma_d", "must be in (0, 1)");
  if (!(r_t > 0.0)) throw ValidationError("junction.r_t", "must be > 0");
  if (!(t_n > 0.0)) throw ValidationError("junction.t_n", "must be > 0");
}

double JunctionSpec::thermal_energy() const { return kBoltzmannMeV * t_n; }

void CouplingSpec::validate() const {
  if (!(kappa_eff > 0.0)) throw ValidationError("coupling.kappa_eff", "must be > 0");
}

double dynes_dos(double eps, double gamma_d) {
  const std::complex<double> z(std::abs(eps), gamma_d);
  return std::abs((z / std::sqrt(z * z - 1.0)).real());
}

namespace {

double fermi(double energy, double kt) { return 1.0 / (1.0 + std::exp(energy / kt)); }

// Tails beyond this many k_B T from the Fermi window are below e^-60.
constexpr double kWindowThermalWidths = 60.0;

}  // namespace

double tunnelling_integral(double x, const JunctionSpec& junction) {
  const double delta = junction.delta;
  const double kt = junction.thermal_energy();
  const double gamma = junction.gamma_d;

  // f(e - x)[1 - f(e)] confines the integrand to [min(0, x), max(0, x)] up
  // to thermal tails; outside that window it is below e^-60 of its peak.
  const double lo = std::min(0.0, x) - kWindowThermalWidths * kt;
  const double hi = std::max(0.0, x) + kWindowThermalWidths * kt;

  auto integrand = [&](double e) {
    return dynes_dos(e / delta, gamma) * fermi(e - x, kt) * fermi(-e, kt);
  };

  std::vector<double> breaks{0.0, x};
  for (double sign : {-1.0, 1.0}) {
    for (double offset : {0.0, -100.0, -10.0, -1.0, 1.0, 10.0, 100.0}) {
      breaks.push_back(sign * delta * (1.0 + offset * gamma));
    }
  }
  QuadratureOptions options;
  options.rel_tol = 1e-8;
  options.abs_tol = 1e-300;
  const QuadratureResult r = integrate_adaptive(integrand, lo, hi, breaks, options);
  if (!r.converged) {
    throw NumericError("tunnelling integral did not reach relative tolerance 1e-8 at x = " +
                       std::to_string(x) + " meV (error " + std::to_string(r.error) + ")");
  }
  return r.value;
}

double tunnel_spectral_fn(double energy_mev, double v_mv, const JunctionSpec& junction) {
  junction.validate();
  // Fixed summation order on |v| keeps the result bit-identical under v -> -v.
  const double ev = std::abs(v_mv);
  const double sum =
      tunnelling_integral(energy_mev + ev, junction) + tunnelling_integral(energy_mev - ev, junction);
  return kRatePerMeVkOhm / junction.r_t * sum;
}

RateTable transition_rates(const SystemSpec& system, const JunctionSpec& junction,
                           const CouplingSpec& coupling, double v_mv) {
  system.transmon.validate();
  junction.validate();
  coupling.validate();

  // Normal junction, zero bias, zero temperature: F(E) = 2E / (e^2 R_T).
  const double reference =
      2.0 * kPlanckMeV * system.transmon.omega_ge * kRatePerMeVkOhm / junction.r_t;

  RateTable table;
  table.voltage = v_mv;
  const TransmonSpec& t = system.transmon;
  for (int m = 0; m + 1 < t.n_levels; ++m) {
    const double omega = t.omega_ge + m * t.alpha;
    const double energy = kPlanckMeV * omega;
    double scale = coupling.kappa_eff * (m + 1) / reference;
    if (coupling.purcell_filter) {
      const double detuning = omega - system.reset_resonator.omega;
      const double g1 = system.reset_resonator.g;
      scale *= g1 * g1 / (detuning * detuning);
    }
    RatePair pair;
    pair.omega = omega;
    pair.gamma_down = scale * tunnel_spectral_fn(energy, v_mv, junction);
    pair.gamma_up = scale * tunnel_spectral_fn(-energy, v_mv, junction);
    table.transitions.push_back(pair);
  }
  return table;
}

EffectiveTemperature effective_temperature(const RatePair& pair) {
  if (pair.gamma_up == pair.gamma_down) {
    return {std::numeric_limits<double>::infinity(), TemperatureRegime::kInfinite};
  }
  if (pair.gamma_up > pair.gamma_down) return {0.0, TemperatureRegime::kInverted};
  if (pair.gamma_up <= 0.0) return {0.0, TemperatureRegime::kThermal};
  const double log_ratio = std::log(pair.gamma_down / pair.gamma_up);
  return {kPlanckOverBoltzmann * pair.omega / log_ratio, TemperatureRegime::kThermal};
}

double junction_current(double v_mv, const JunctionSpec& junction) {
  junction.validate();
  const double delta = junction.delta;
  const double kt = junction.thermal_energy();
  const double ev = v_mv;
  auto integrand = [&](double e) {
    return dynes_dos(e / delta, junction.gamma_d) * (fermi(e - ev, kt) - fermi(e, kt));
  };
  const double lo = std::min(0.0, ev) - kWindowThermalWidths * kt;
  const double hi = std::max(0.0, ev) + kWindowThermalWidths * kt;
  std::vector<double> breaks{0.0, ev, -delta, delta};
  QuadratureOptions options;
  options.rel_tol = 1e-10;
  options.abs_tol = 1e-300;
  const QuadratureResult r = integrate_adaptive(integrand, lo, hi, breaks, options);
  if (!r.converged) throw NumericError("junction current integral did not converge");
  // meV / (e kOhm) = uA
  return 1.0e3 * r.value / junction.r_t;
}

namespace {

// Least-squares slope of y against x.
double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace

DynesExtraction extract_dynes(const std::vector<std::pair<double, double>>& iv_curve) {
  if (iv_curve.size() < 50) throw RangeError("IV curve needs at least 50 points");
  auto curve = iv_curve;
  std::sort(curve.begin(), curve.end());
  const std::size_t n = curve.size();

  // Central-difference conductance on the (possibly non-uniform) grid.
  std::vector<double> v(n), g(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) v[i] = curve[i].first;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    g[i] = (curve[i + 1].second - curve[i - 1].second) / (v[i + 1] - v[i - 1]);
  }

  // Peak location refined by a parabola through the neighbours.
  auto peak = [&](bool positive) {
    std::size_t best = 0;
    double best_g = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i + 1 < n; ++i) {
      if ((positive && v[i] > 0.0) || (!positive && v[i] < 0.0)) {
        if (g[i] > best_g) {
          best_g = g[i];
          best = i;
        }
      }
    }
    if (best <= 1 || best + 2 >= n) return std::pair<double, bool>{v[best], false};
    const double y0 = g[best - 1], y1 = g[best], y2 = g[best + 1];
    const double denom = y0 - 2.0 * y1 + y2;
    double shift = denom != 0.0 ? 0.5 * (y0 - y2) / denom : 0.0;
    shift = std::clamp(shift, -1.0, 1.0);
    const double h = shift >= 0 ? v[best + 1] - v[best] : v[best] - v[best - 1];
    return std::pair<double, bool>{v[best] + shift * h, true};
  };
  const auto [v_plus, interior_plus] = peak(true);
  const auto [v_minus, interior_minus] = peak(false);
  if (!interior_plus || !interior_minus) {
    throw RangeError("conductance peak sits at the edge of the IV curve; no gap plateau resolved");
  }
  const double delta = 0.5 * (v_plus - v_minus);
  if (!(delta > 0.0)) throw RangeError("no gap plateau resolved");
  if (v.front() > -2.0 * delta || v.back() < 2.0 * delta) {
    throw RangeError("IV curve must span beyond +-2 Delta/e = " + std::to_string(2.0 * delta) + " mV");
  }

  std::vector<double> xin, yin, xout, yout;
  for (const auto& [vv, ii] : curve) {
    if (std::abs(vv) < 0.5 * delta) {
      xin.push_back(vv);
      yin.push_back(ii);
    } else if (std::abs(vv) > 1.5 * delta) {
      xout.push_back(vv);
      yout.push_back(ii);
    }
  }
  if (xin.size() < 3 || xout.size() < 3) throw RangeError("too few points inside or outside the gap");
  // Fit the two outer branches separately so the plateau offset drops out.
  std::vector<double> xp, yp, xm, ym;
  for (std::size_t i = 0; i < xout.size(); ++i) {
    (xout[i] > 0 ? xp : xm).push_back(xout[i]);
    (xout[i] > 0 ? yp : ym).push_back(yout[i]);
  }
  if (xp.size() < 2 || xm.size() < 2) throw RangeError("both bias polarities must extend beyond the gap");
  const double slope_out = 0.5 * (fit_slope(xp, yp) + fit_slope(xm, ym));
  const double slope_in = fit_slope(xin, yin);
  const double ratio = slope_in / slope_out;
  if (!(ratio > 0.0) || ratio > 0.5) {
    throw RangeError("in-gap and out-of-gap resistances are comparable; no superconducting gap");
  }
  return {delta, ratio};
}

}  // namespace qcrsim
