#include "qcrsim/thermometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <unsupported/Eigen/LevenbergMarquardt>

#include "qcrsim/units.hpp"

namespace qcrsim {

Eigen::VectorXd gibbs_populations(double t_kelvin, const TransmonSpec& spec, int truncation) {
  if (!(t_kelvin > 0.0)) throw ValidationError("temperature", "must be > 0");
  if (truncation < 1) throw ValidationError("truncation", "must be >= 1");
  TransmonSpec ladder = spec;
  ladder.n_levels = truncation;
  const std::vector<double> energies = transmon_energies(ladder);
  Eigen::VectorXd p(truncation);
  for (int n = 0; n < truncation; ++n) p(n) = std::exp(-boltzmann_exponent(energies[n], t_kelvin));
  return p / p.sum();
}

Eigen::VectorXd normalize_head(const Eigen::VectorXd& p, int count) {
  Eigen::VectorXd head = p.head(std::min<Eigen::Index>(count, p.size()));
  return head / head.sum();
}

Eigen::VectorXd measured_gibbs_populations(double t_kelvin, const TransmonSpec& spec, int truncation) {
  return normalize_head(gibbs_populations(t_kelvin, spec, truncation), kMeasuredStates);
}

bool thermal_fittable(const Eigen::VectorXd& p) {
  for (Eigen::Index i = 0; i + 1 < p.size(); ++i) {
    if (p(i + 1) > p(i)) return false;
  }
  return true;
}

namespace {

constexpr double kFitTmin = 1e-3;
constexpr double kFitTmax = 5.0;

// Brent's golden-section search with parabolic steps on [a, b].
template <typename F>
double brent_minimize(F&& f, double a, double b, double rel_tol) {
  constexpr double golden = 0.3819660112501051;
  double x = a + golden * (b - a);
  double w = x, v = x;
  double fx = f(x), fw = fx, fv = fx;
  double d = 0.0, e = 0.0;
  for (int iter = 0; iter < 200; ++iter) {
    const double mid = 0.5 * (a + b);
    const double tol1 = rel_tol * std::abs(x) + 1e-14;
    const double tol2 = 2.0 * tol1;
    if (std::abs(x - mid) <= tol2 - 0.5 * (b - a)) break;
    bool golden_step = true;
    if (std::abs(e) > tol1) {
      const double r = (x - w) * (fx - fv);
      double q = (x - v) * (fx - fw);
      double p = (x - v) * q - (x - w) * r;
      q = 2.0 * (q - r);
      if (q > 0.0) p = -p;
      q = std::abs(q);
      const double e_prev = e;
      e = d;
      if (std::abs(p) < std::abs(0.5 * q * e_prev) && p > q * (a - x) && p < q * (b - x)) {
        d = p / q;
        const double u = x + d;
        if (u - a < tol2 || b - u < tol2) d = x < mid ? tol1 : -tol1;
        golden_step = false;
      }
    }
    if (golden_step) {
      e = (x >= mid ? a : b) - x;
      d = golden * e;
    }
    const double u = std::abs(d) >= tol1 ? x + d : x + (d > 0 ? tol1 : -tol1);
    const double fu = f(u);
    if (fu <= fx) {
      (u >= x ? a : b) = x;
      v = w; fv = fw;
      w = x; fw = fx;
      x = u; fx = fu;
    } else {
      (u < x ? a : b) = u;
      if (fu <= fw || w == x) {
        v = w; fv = fw;
        w = u; fw = fu;
      } else if (fu <= fv || v == x || v == w) {
        v = u; fv = fu;
      }
    }
  }
  return x;
}

}  // namespace

GibbsFit fit_gibbs(const Eigen::VectorXd& measured, const TransmonSpec& spec, int truncation) {
  if (measured.size() != kMeasuredStates) throw ValidationError("populations", "expected 4 entries");
  if ((measured.array() < 0.0).any()) throw ValidationError("populations", "entries must be >= 0");
  GibbsFit fit;
  fit.truncation = truncation;
  const Eigen::VectorXd p = measured / measured.sum();
  if (!thermal_fittable(p)) return fit;

  auto residual = [&](double t) {
    return (p - measured_gibbs_populations(t, spec, truncation)).squaredNorm();
  };

  // Log-spaced scan brackets the global minimum, Brent refines inside it.
  constexpr int kGrid = 240;
  const double log_lo = std::log(kFitTmin);
  const double step = (std::log(kFitTmax) - log_lo) / kGrid;
  int best = 0;
  double best_r = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= kGrid; ++i) {
    const double r = residual(std::exp(log_lo + i * step));
    if (r < best_r) {
      best_r = r;
      best = i;
    }
  }
  const double lo = std::exp(log_lo + std::max(0, best - 1) * step);
  const double hi = std::exp(log_lo + std::min(kGrid, best + 1) * step);
  const double t = brent_minimize(residual, lo, hi, 1e-10);

  fit.temperature = t;
  fit.residual = residual(t);
  const double h = 1e-5 * t;
  const Eigen::VectorXd jac = (measured_gibbs_populations(t + h, spec, truncation) -
                               measured_gibbs_populations(t - h, spec, truncation)) /
                              (2.0 * h);
  const double curvature = jac.squaredNorm();
  const double dof = kMeasuredStates - 1;
  fit.uncertainty = curvature > 0.0 ? std::sqrt(fit.residual / dof / curvature) : 0.0;
  return fit;
}

namespace {

// Parameters (t0, a, log tau).
struct SaturationFunctor : Eigen::DenseFunctor<double> {
  const std::vector<double>& t;
  const std::vector<double>& y;
  SaturationFunctor(const std::vector<double>& times, const std::vector<double>& temps)
      : Eigen::DenseFunctor<double>(3, static_cast<int>(times.size())), t(times), y(temps) {}

  int operator()(const InputType& x, ValueType& f) const {
    const double tau = std::exp(x(2));
    for (std::size_t i = 0; i < t.size(); ++i) {
      f(i) = x(0) + x(1) * (1.0 - std::exp(-t[i] / tau)) - y[i];
    }
    return 0;
  }
  int df(const InputType& x, JacobianType& j) const {
    const double tau = std::exp(x(2));
    for (std::size_t i = 0; i < t.size(); ++i) {
      const double decay = std::exp(-t[i] / tau);
      j(i, 0) = 1.0;
      j(i, 1) = 1.0 - decay;
      j(i, 2) = -x(1) * decay * t[i] / tau;
    }
    return 0;
  }
};

}  // namespace

SaturationFit fit_saturation(const std::vector<double>& times, const std::vector<double>& temps) {
  if (times.size() != temps.size()) throw ValidationError("saturation", "times and temperatures differ in length");
  if (times.size() < 4) throw ValidationError("saturation", "need at least 4 points");
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (times[i] < 0.0 || (i > 0 && times[i] <= times[i - 1])) {
      throw ValidationError("saturation", "times must be non-negative and increasing");
    }
  }

  const double mean = std::accumulate(temps.begin(), temps.end(), 0.0) / temps.size();
  const auto [min_it, max_it] = std::minmax_element(temps.begin(), temps.end());
  if (*max_it - *min_it <= 1e-12 * std::max(1.0, std::abs(mean))) {
    SaturationFit flat;
    flat.t0 = mean;
    flat.a = 0.0;
    flat.tau = std::numeric_limits<double>::quiet_NaN();
    flat.degenerate = true;
    for (double y : temps) flat.residual += (y - mean) * (y - mean);
    return flat;
  }

  SaturationFit best;
  best.residual = std::numeric_limits<double>::infinity();
  bool any_converged = false;
  for (double tau0 : {25.0, 50.0, 100.0, 200.0, 400.0}) {
    // t0 and a enter linearly; seed them by linear least squares at tau0.
    Eigen::MatrixXd basis(times.size(), 2);
    Eigen::VectorXd rhs(times.size());
    for (std::size_t i = 0; i < times.size(); ++i) {
      basis(i, 0) = 1.0;
      basis(i, 1) = 1.0 - std::exp(-times[i] / tau0);
      rhs(i) = temps[i];
    }
    const Eigen::Vector2d lin = basis.colPivHouseholderQr().solve(rhs);
    Eigen::VectorXd x(3);
    x << lin(0), lin(1), std::log(tau0);

    SaturationFunctor functor(times, temps);
    Eigen::LevenbergMarquardt<SaturationFunctor> lm(functor);
    lm.setXtol(1e-14);
    lm.setFtol(1e-14);
    lm.setMaxfev(2000);
    const auto status = lm.minimize(x);
    const bool converged = status == Eigen::LevenbergMarquardtSpace::RelativeReductionTooSmall ||
                           status == Eigen::LevenbergMarquardtSpace::RelativeErrorTooSmall ||
                           status == Eigen::LevenbergMarquardtSpace::RelativeErrorAndReductionTooSmall ||
                           status == Eigen::LevenbergMarquardtSpace::CosinusTooSmall ||
                           status == Eigen::LevenbergMarquardtSpace::FtolTooSmall ||
                           status == Eigen::LevenbergMarquardtSpace::XtolTooSmall ||
                           status == Eigen::LevenbergMarquardtSpace::GtolTooSmall;
    Eigen::VectorXd f(times.size());
    functor(x, f);
    const double r = f.squaredNorm();
    if (!std::isfinite(r)) continue;
    if (r < best.residual) {
      best.t0 = x(0);
      best.a = x(1);
      best.tau = std::exp(x(2));
      best.residual = r;
    }
    any_converged = any_converged || converged;
  }
  if (!any_converged) throw SaturationFitError("saturation fit did not converge from any start", best);
  return best;
}

double heating_slope(const std::vector<std::pair<double, double>>& points, double v_min) {
  std::vector<double> v, t;
  for (const auto& [vv, tt] : points) {
    if (vv > v_min) {
      v.push_back(vv);
      t.push_back(tt);
    }
  }
  if (v.size() < 3) throw RangeError("heating slope needs at least 3 points above " + std::to_string(v_min) + " mV");
  const double n = static_cast<double>(v.size());
  const double mv = std::accumulate(v.begin(), v.end(), 0.0) / n;
  const double mt = std::accumulate(t.begin(), t.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    sxy += (v[i] - mv) * (t[i] - mt);
    sxx += (v[i] - mv) * (v[i] - mv);
  }
  return sxy / sxx;
}

}  // namespace qcrsim
