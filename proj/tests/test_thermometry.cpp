#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "qcrsim/thermometry.hpp"
#include "qcrsim/units.hpp"
#include "support.hpp"

using namespace qcrsim;

namespace {

// Direct Boltzmann weights over six levels, renormalized over four.
Eigen::Vector4d boltzmann4(double t) {
  const double w = 4.09, a = -0.273;
  double z = 0.0;
  Eigen::VectorXd p(6);
  for (int n = 0; n < 6; ++n) {
    const double e = n * w + 0.5 * a * n * (n - 1);
    p(n) = std::exp(-0.0479924 * e / t);
    z += p(n);
  }
  p /= z;
  const Eigen::Vector4d head = p.head<4>();
  return head / head.sum();
}

Eigen::Vector4d perturb(const Eigen::Vector4d& p, std::mt19937_64& rng, double size) {
  std::uniform_real_distribution<double> u(-size, size);
  Eigen::Vector4d q = p;
  for (int i = 0; i < 4; ++i) q(i) = std::max(0.0, q(i) + u(rng));
  return q / q.sum();
}

}  // namespace

TEST_CASE("gibbs populations match direct Boltzmann weights") {
  const TransmonSpec t;
  for (double temp : {0.02, 0.11, 0.3, 0.476, 1.0}) {
    const Eigen::VectorXd p = measured_gibbs_populations(temp, t);
    const Eigen::Vector4d q = boltzmann4(temp);
    for (int i = 0; i < 4; ++i) CHECK(abs_err(p(i), q(i)) <= 1e-12);
    CHECK(abs_err(gibbs_populations(temp, t).sum(), 1.0) <= 1e-12);
  }
}

TEST_CASE("zero-temperature limit is the ground state") {
  const Eigen::VectorXd p = gibbs_populations(1e-4, TransmonSpec{});
  REQUIRE(p.size() == 6);
  CHECK(p(0) == 1.0);
  for (int n = 1; n < 6; ++n) CHECK(p(n) == 0.0);
}

TEST_CASE("equilibrium and heated ground populations") {
  const TransmonSpec t;
  const double idle = measured_gibbs_populations(0.110, t)(0);
  const double hot = measured_gibbs_populations(0.476, t)(0);
  MESSAGE("p_g(0.110 K) = " << idle << ", p_g(0.476 K) = " << hot);
  CHECK(abs_err(idle, 0.83) <= 0.01);
  CHECK(abs_err(hot, 0.42) <= 0.02);
}

TEST_CASE("gibbs populations decrease strictly with level") {
  const TransmonSpec t;
  for (double temp = 0.01; temp < 20.0; temp *= 1.5) {
    const Eigen::VectorXd p = gibbs_populations(temp, t);
    for (int n = 1; n < p.size(); ++n) CHECK(p(n) < p(n - 1));
  }
}

TEST_CASE("exact gibbs input round trips") {
  const TransmonSpec t;
  const GibbsFit f = fit_gibbs(boltzmann4(0.2), t);
  REQUIRE(f.thermal());
  CHECK(abs_err(*f.temperature, 0.2) <= 1e-4);
  CHECK(f.residual < 1e-20);
  CHECK(f.truncation == 6);
  for (double temp = 0.05; temp <= 1.0; temp += 0.025) {
    const GibbsFit g = fit_gibbs(boltzmann4(temp), t);
    REQUIRE(g.thermal());
    CHECK(abs_err(*g.temperature, temp) <= 1e-3);
    CHECK(g.uncertainty >= 0.0);
  }
}

TEST_CASE("fit tolerates population noise") {
  const TransmonSpec t;
  std::mt19937_64 rng(7);
  for (int seed = 0; seed < 50; ++seed) {
    const GibbsFit f = fit_gibbs(perturb(boltzmann4(0.3), rng, 0.01), t);
    REQUIRE(f.thermal());
    CHECK(abs_err(*f.temperature, 0.3) <= 0.02);
  }
}

TEST_CASE("heated populations fit near half a kelvin") {
  const TransmonSpec t;
  const GibbsFit at_476 = fit_gibbs(boltzmann4(0.476), t);
  REQUIRE(at_476.thermal());
  CHECK(*at_476.temperature >= 0.47);
  CHECK(*at_476.temperature <= 0.48);

  // A ground population of exactly 0.42 with a thermal tail at 0.476 K sits
  // slightly cooler on this ladder.
  Eigen::Vector4d p = boltzmann4(0.476);
  p.tail<3>() *= 0.58 / p.tail<3>().sum();
  p(0) = 0.42;
  const GibbsFit f = fit_gibbs(p, t);
  REQUIRE(f.thermal());
  MESSAGE("p_g = 0.42 fits to " << *f.temperature << " K");
  CHECK(*f.temperature > 0.45);
  CHECK(*f.temperature < 0.46);
}

TEST_CASE("fitted temperature is monotone in the ground population") {
  const TransmonSpec t;
  double previous_pg = 1.0, previous_t = 0.0;
  for (double temp = 0.06; temp <= 1.0; temp += 0.02) {
    const Eigen::Vector4d p = boltzmann4(temp);
    const double fitted = *fit_gibbs(p, t).temperature;
    CHECK(p(0) < previous_pg);
    CHECK(fitted > previous_t);
    previous_pg = p(0);
    previous_t = fitted;
  }
}

TEST_CASE("relative uncertainty grows with temperature") {
  const TransmonSpec t;
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-0.005, 0.005);
  double cold = 0.0, hot = 0.0;
  for (int k = 0; k < 20; ++k) {
    Eigen::Vector4d d;
    for (int i = 0; i < 4; ++i) d(i) = u(rng);
    d.array() -= d.mean();
    const GibbsFit fc = fit_gibbs(boltzmann4(0.15) + d, t);
    const GibbsFit fh = fit_gibbs(boltzmann4(0.47) + d, t);
    REQUIRE(fc.thermal());
    REQUIRE(fh.thermal());
    cold += fc.uncertainty / *fc.temperature;
    hot += fh.uncertainty / *fh.temperature;
  }
  CHECK(hot > cold);
}

TEST_CASE("inverted populations are flagged, not fitted") {
  const GibbsFit f = fit_gibbs(Eigen::Vector4d(0.1, 0.2, 0.3, 0.4), TransmonSpec{});
  CHECK_FALSE(f.thermal());
  CHECK_FALSE(thermal_fittable(Eigen::Vector4d(0.5, 0.1, 0.3, 0.1)));
  CHECK(thermal_fittable(Eigen::Vector4d(0.4, 0.3, 0.2, 0.1)));
  CHECK_THROWS_AS(fit_gibbs(Eigen::Vector3d(0.5, 0.3, 0.2), TransmonSpec{}), ValidationError);
  CHECK_THROWS_AS(fit_gibbs(Eigen::Vector4d(1.1, -0.1, 0.0, 0.0), TransmonSpec{}), ValidationError);
}

TEST_CASE("saturation fit recovers noiseless curves") {
  struct Case {
    double a, tau;
  };
  for (const Case c : {Case{0.36, 109.0}, Case{0.15, 185.0}, Case{0.3, 80.0}}) {
    std::vector<double> t, y;
    for (int i = 0; i < 10; ++i) {
      t.push_back(22.0 * i);
      y.push_back(0.110 + c.a * (1.0 - std::exp(-t.back() / c.tau)));
    }
    const SaturationFit f = fit_saturation(t, y);
    CHECK_FALSE(f.degenerate);
    CHECK(rel_err(f.t0, 0.110) <= 0.01);
    CHECK(rel_err(f.a, c.a) <= 0.01);
    CHECK(rel_err(f.tau, c.tau) <= 0.01);
  }
}

TEST_CASE("flat data is degenerate") {
  const std::vector<double> t{0, 20, 40, 60, 80};
  const std::vector<double> y(5, 0.11);
  const SaturationFit f = fit_saturation(t, y);
  CHECK(f.degenerate);
  CHECK(abs_err(f.t0, 0.11) <= 1e-15);
  CHECK(f.a == 0.0);
  CHECK(std::isnan(f.tau));
}

TEST_CASE("saturation fit input checks") {
  CHECK_THROWS_AS(fit_saturation({0, 10, 20}, {0.1, 0.2, 0.3}), ValidationError);
  CHECK_THROWS_AS(fit_saturation({0, 20, 10, 30}, {0.1, 0.2, 0.3, 0.4}), ValidationError);
  CHECK_THROWS_AS(fit_saturation({0, 10, 20, 30}, {0.1, 0.2, 0.3}), ValidationError);
}

TEST_CASE("heating slope") {
  std::vector<std::pair<double, double>> line;
  for (double v = 0.0; v <= 1.2001; v += 0.1) line.emplace_back(v, 0.1 + 0.36 * v);
  CHECK(rel_err(heating_slope(line), 0.36) <= 1e-12);
  // Points at or below v_min are ignored.
  line.emplace_back(0.1, 5.0);
  CHECK(rel_err(heating_slope(line), 0.36) <= 1e-12);
  CHECK_THROWS_AS(heating_slope({{0.3, 0.2}, {0.4, 0.3}, {0.1, 0.1}}), RangeError);
}
