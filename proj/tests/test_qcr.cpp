#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "support.hpp"

#include <cmath>
#include <complex>
#include <vector>

#include "qcrsim/qcr.hpp"
#include "qcrsim/quadrature.hpp"
#include "qcrsim/units.hpp"

using namespace qcrsim;

namespace {

double fermi(double e, double kt) { return 0.5 * (1.0 - std::tanh(0.5 * e / kt)); }

// Composite Simpson on a fine uniform grid over the thermal window.
double simpson_tunnelling(double x, const JunctionSpec& j) {
  const double kt = kBoltzmannMeV * j.t_n;
  const double lo = std::min(0.0, x) - 40.0 * kt;
  const double hi = std::max(0.0, x) + 40.0 * kt;
  const int n = 2 * static_cast<int>((hi - lo) / 2e-6 / 2) + 2;
  const double h = (hi - lo) / n;
  auto f = [&](double e) {
    const std::complex<long double> z(std::abs(e / j.delta), j.gamma_d);
    const long double ns = std::abs((z / std::sqrt(z * z - 1.0L)).real());
    return static_cast<double>(ns) * fermi(e - x, kt) * fermi(-e, kt);
  };
  double sum = f(lo) + f(hi);
  for (int i = 1; i < n; ++i) sum += (i % 2 ? 4.0 : 2.0) * f(lo + i * h);
  return sum * h / 3.0;
}

double oracle_spectral(double e, double v, const JunctionSpec& j) {
  return kRatePerMeVkOhm / j.r_t * (simpson_tunnelling(e + std::abs(v), j) + simpson_tunnelling(e - std::abs(v), j));
}

}  // namespace

TEST_CASE("quadrature handles integrable singularities and kinks") {
  const auto r = integrate_adaptive([](double x) { return 1.0 / std::sqrt(x); }, 0.0, 1.0);
  CHECK(r.converged);
  CHECK(rel_err(r.value, 2.0) <= 1e-8);
  const auto k = integrate_adaptive([](double x) { return std::abs(x - 0.3); }, 0.0, 1.0, {0.3});
  CHECK(rel_err(k.value, 0.5 * (0.09 + 0.49)) <= 1e-12);
  const auto g = integrate_adaptive([](double x) { return std::exp(-x * x); }, -10.0, 10.0);
  CHECK(rel_err(g.value, std::sqrt(M_PI)) <= 1e-10);
}

TEST_CASE("dynes density of states") {
  const double gd = 2.3e-3;
  CHECK(rel_err(dynes_dos(0.0, gd), gd / std::sqrt(1.0 + gd * gd)) <= 1e-12);
  CHECK(rel_err(dynes_dos(1e6, gd), 1.0) <= 1e-9);
  CHECK(rel_err(dynes_dos(-1e6, gd), 1.0) <= 1e-9);
  for (double e : {0.3, 0.99, 1.0, 1.01, 2.5}) CHECK(dynes_dos(e, gd) == dynes_dos(-e, gd));
  // Gap-edge value against an extended-precision evaluation.
  const std::complex<long double> z(1.0L, 2.3e-3L);
  const double reference = static_cast<double>(std::abs((z / std::sqrt(z * z - 1.0L)).real()));
  CHECK(rel_err(dynes_dos(1.0, gd), reference) <= 1e-12);
  CHECK(rel_err(dynes_dos(1.0, gd), 10.443713681632378) <= 1e-14);
}

TEST_CASE("spectral function agrees with a direct Simpson integration") {
  const JunctionSpec j;
  for (double v : {0.0, 0.2, 0.6}) {
    for (double f : {4.09, -4.09, 3.0}) {
      const double e = kPlanckMeV * f;
      CHECK(rel_err(tunnel_spectral_fn(e, v, j), oracle_spectral(e, v, j)) <= 1e-5);
    }
  }
}

TEST_CASE("zero bias obeys detailed balance") {
  for (double t : {0.03, 0.1, 0.3}) {
    JunctionSpec j;
    j.t_n = t;
    const double e = kPlanckMeV * 4.09;
    const double ratio = tunnel_spectral_fn(-e, 0.0, j) / tunnel_spectral_fn(e, 0.0, j);
    CHECK(rel_err(ratio, std::exp(-e / (kBoltzmannMeV * t))) <= 1e-6);
  }
}

TEST_CASE("spectral function is even in bias and monotone in energy") {
  const JunctionSpec j;
  for (double v : {0.1, 0.215, 0.6, 1.2}) {
    for (double e : {-0.02, 0.0, 0.017, 0.3}) CHECK(tunnel_spectral_fn(e, v, j) == tunnel_spectral_fn(e, -v, j));
    double previous = 0.0;
    for (double e = 0.001; e < 0.6; e += 0.01) {
      const double f = tunnel_spectral_fn(e, v, j);
      CHECK(f >= previous);
      previous = f;
    }
  }
}

TEST_CASE("cold junction suppresses sub-gap absorption") {
  JunctionSpec j;
  j.t_n = 0.01;
  const double inside = tunnel_spectral_fn(0.5 * j.delta, 0.0, j);
  const double outside = tunnel_spectral_fn(3.0 * j.delta, 0.0, j);
  MESSAGE("sub-gap ratio " << inside / outside);
  CHECK(inside / outside < 10.0 * j.gamma_d);
  CHECK(inside / outside > 0.1 * j.gamma_d);
}

TEST_CASE("far above the gap the junction is ohmic") {
  const JunctionSpec j;
  const double e = kPlanckMeV * 4.09;
  const double ratio = tunnel_spectral_fn(e, 10.0 * j.delta, j) / tunnel_spectral_fn(e, 5.0 * j.delta, j);
  CHECK(rel_err(ratio, 2.0) <= 0.05);
}

TEST_CASE("transition rates at zero bias follow the bath temperature") {
  const SystemSpec s;
  const RateTable t = transition_rates(s, JunctionSpec{}, CouplingSpec{}, 0.0);
  REQUIRE(t.transitions.size() == 5);
  const RatePair& r = t.transitions[0];
  CHECK(rel_err(r.omega, 4.09) <= 1e-12);
  CHECK(rel_err(r.gamma_up / r.gamma_down, std::exp(-0.0479924 * 4.09 / 0.1)) <= 1e-6);
  for (const auto& p : t.transitions) {
    CHECK(p.gamma_down >= 0.0);
    CHECK(p.gamma_up >= 0.0);
    CHECK(rel_err(effective_temperature(p).kelvin, 0.1) <= 1e-4);
  }
}

TEST_CASE("sub-gap decay grows with bias") {
  const SystemSpec s;
  double previous = 0.0;
  for (double v : {0.0, 0.05, 0.1, 0.15, 0.2}) {
    const double down = transition_rates(s, JunctionSpec{}, CouplingSpec{}, v).transitions[0].gamma_down;
    CHECK(down > previous);
    previous = down;
  }
}

TEST_CASE("rate table is identical under bias reversal") {
  const SystemSpec s;
  const RateTable plus = transition_rates(s, JunctionSpec{}, CouplingSpec{}, 0.6);
  const RateTable minus = transition_rates(s, JunctionSpec{}, CouplingSpec{}, -0.6);
  for (std::size_t m = 0; m < plus.transitions.size(); ++m) {
    CHECK(plus.transitions[m].gamma_down == minus.transitions[m].gamma_down);
    CHECK(plus.transitions[m].gamma_up == minus.transitions[m].gamma_up);
  }
}

TEST_CASE("rates scale with the ladder matrix element") {
  CouplingSpec c;
  c.purcell_filter = false;
  SystemSpec harmonic;
  harmonic.transmon.alpha = -1e-12;
  for (double v : {0.0, 0.3, 1.2}) {
    const RateTable t = transition_rates(harmonic, JunctionSpec{}, c, v);
    for (std::size_t m = 1; m < t.transitions.size(); ++m) {
      CHECK(rel_err(t.transitions[m].gamma_down, (m + 1) * t.transitions[0].gamma_down) <= 1e-9);
      CHECK(rel_err(t.transitions[m].gamma_up, (m + 1) * t.transitions[0].gamma_up) <= 1e-9);
    }
  }
  // Anharmonic ladder: the same factor once each transition's own
  // frequency is accounted for.
  const SystemSpec s;
  const JunctionSpec j;
  const RateTable t = transition_rates(s, j, c, 0.6);
  const double unit = t.transitions[0].gamma_down / tunnel_spectral_fn(kPlanckMeV * t.transitions[0].omega, 0.6, j);
  for (std::size_t m = 0; m < t.transitions.size(); ++m) {
    const double f = tunnel_spectral_fn(kPlanckMeV * t.transitions[m].omega, 0.6, j);
    CHECK(rel_err(t.transitions[m].gamma_down / ((m + 1) * f), unit) <= 1e-12);
  }
}

TEST_CASE("purcell factor filters through the reset resonator") {
  const SystemSpec s;
  CouplingSpec off;
  off.purcell_filter = false;
  const auto a = transition_rates(s, JunctionSpec{}, CouplingSpec{}, 0.6).transitions[0];
  const auto b = transition_rates(s, JunctionSpec{}, off, 0.6).transitions[0];
  const double d = 4.09 - 4.67;
  CHECK(rel_err(a.gamma_down / b.gamma_down, 0.0596 * 0.0596 / (d * d)) <= 1e-12);
}

TEST_CASE("effective temperature") {
  RatePair p;
  p.omega = 4.09;
  p.gamma_down = std::exp(1.0);
  p.gamma_up = 1.0;
  const auto t = effective_temperature(p);
  CHECK(t.thermal());
  CHECK(rel_err(t.kelvin, 0.0479924 * 4.09) <= 1e-12);
  CHECK(rel_err(t.kelvin, 0.1963) <= 1e-4);

  p.gamma_up = p.gamma_down;
  CHECK(effective_temperature(p).regime == TemperatureRegime::kInfinite);
  p.gamma_up = 2.0 * p.gamma_down;
  CHECK(effective_temperature(p).regime == TemperatureRegime::kInverted);

  // The Boltzmann ratio at T_eff reproduces the rate ratio.
  const RatePair q = transition_rates(SystemSpec{}, JunctionSpec{}, CouplingSpec{}, 0.5).transitions[0];
  const double te = effective_temperature(q).kelvin;
  CHECK(rel_err(std::exp(-boltzmann_exponent(q.omega, te)), q.gamma_up / q.gamma_down) <= 1e-12);
}

namespace {

std::vector<std::pair<double, double>> synthetic_iv(const JunctionSpec& j, int half_points = 300) {
  std::vector<std::pair<double, double>> iv;
  for (int i = -half_points; i <= half_points; ++i) {
    const double v = 0.6 * i / half_points;
    iv.emplace_back(v, junction_current(v, j));
  }
  return iv;
}

}  // namespace

TEST_CASE("gap and Dynes parameter from a synthetic IV curve") {
  // IV characterization at base temperature.
  JunctionSpec j;
  j.t_n = 0.03;
  const DynesExtraction d = extract_dynes(synthetic_iv(j));
  MESSAGE("delta " << d.delta << " gamma " << d.gamma_d);
  CHECK(abs_err(d.delta, 0.215) <= 0.005);
  CHECK(d.gamma_d > 2.3e-3 / 1.5);
  CHECK(d.gamma_d < 2.3e-3 * 1.5);

  CHECK(rel_err(junction_current(-0.4, j), -junction_current(0.4, j)) <= 1e-12);
}

TEST_CASE("thermal smearing pushes the conductance peak above the gap") {
  JunctionSpec cold;
  cold.t_n = 0.03;
  JunctionSpec warm;
  warm.t_n = 0.1;
  const double d_cold = extract_dynes(synthetic_iv(cold)).delta;
  const double d_warm = extract_dynes(synthetic_iv(warm)).delta;
  CHECK(d_cold > 0.215);
  CHECK(d_warm > d_cold);
  CHECK(d_warm < 0.215 * 1.1);
  const double g_warm = extract_dynes(synthetic_iv(warm)).gamma_d;
  CHECK(g_warm > 2.3e-3 / 1.5);
  CHECK(g_warm < 2.3e-3 * 1.5);
}

TEST_CASE("IV extraction errors") {
  std::vector<std::pair<double, double>> ohmic;
  for (int i = -100; i <= 100; ++i) ohmic.emplace_back(0.006 * i, 0.006 * i / 13.8 * 1e3);
  CHECK_THROWS_AS(extract_dynes(ohmic), RangeError);

  const JunctionSpec j;
  std::vector<std::pair<double, double>> narrow;
  for (int i = -100; i <= 100; ++i) narrow.emplace_back(0.003 * i, junction_current(0.003 * i, j));
  CHECK_THROWS_AS(extract_dynes(narrow), RangeError);

  std::vector<std::pair<double, double>> sparse(20, {0.0, 0.0});
  CHECK_THROWS_AS(extract_dynes(sparse), RangeError);
}

TEST_CASE("junction validation") {
  JunctionSpec j;
  j.gamma_d = 1.5;
  CHECK_THROWS_AS(j.validate(), ValidationError);
  j = JunctionSpec{};
  j.t_n = 0.0;
  CHECK_THROWS_AS(tunnel_spectral_fn(0.01, 0.0, j), ValidationError);
  CouplingSpec c;
  c.kappa_eff = 0.0;
  CHECK_THROWS_AS(c.validate(), ValidationError);
}
