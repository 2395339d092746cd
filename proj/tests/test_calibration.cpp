#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "qcrsim/calibration.hpp"
#include "qcrsim/dynamics.hpp"
#include "qcrsim/thermometry.hpp"
#include "qcrsim/units.hpp"
#include "support.hpp"

using namespace qcrsim;

TEST_CASE("default coupling reproduces the reference heating run") {
  const double t = reference_heating_temperature(SystemSpec{}, JunctionSpec{}, CouplingSpec{});
  MESSAGE("T = " << t);
  CHECK(abs_err(t, 0.47) < 1e-3);
}

TEST_CASE("calibration recovers the default coupling") {
  CouplingSpec start;
  start.kappa_eff = 1.0;
  const double kappa = calibrate_kappa(SystemSpec{}, JunctionSpec{}, start);
  MESSAGE("kappa_eff = " << kappa);
  CHECK(rel_err(kappa, CouplingSpec{}.kappa_eff) < 5e-3);
}

TEST_CASE("heating grows with the coupling") {
  double previous = 0.0;
  for (double kappa : {0.01, 0.03, 0.1, 0.3}) {
    CouplingSpec c;
    c.kappa_eff = kappa;
    const double t = reference_heating_temperature(SystemSpec{}, JunctionSpec{}, c);
    CHECK(t > previous);
    previous = t;
  }
}

TEST_CASE("unreachable target is reported") {
  HeatingCalibration cal;
  cal.target_temperature = 50.0;
  CHECK_THROWS_AS(calibrate_kappa(SystemSpec{}, JunctionSpec{}, CouplingSpec{}, cal), RangeError);
}

TEST_CASE("calibrated pulse lands on the hot-state populations") {
  const SystemSpec s;
  const MasterEquation eq(s);
  const Trajectory t = evolve(eq.gibbs_state(0.11), s, JunctionSpec{}, CouplingSpec{}, BiasPulse{}, 0.1, 100.0);
  const Eigen::VectorXd p = normalize_head(t.populations.back(), kMeasuredStates);
  CHECK(abs_err(p(0), 0.42) <= 0.04);
  CHECK(abs_err(*t.temperatures.back(), 0.47) <= 0.05);
}
