#include "qcrsim/calibration.hpp"

#include <cmath>

#include "qcrsim/dynamics.hpp"
#include "qcrsim/units.hpp"

namespace qcrsim {

double reference_heating_temperature(const SystemSpec& system, const JunctionSpec& junction,
                                     const CouplingSpec& coupling, const HeatingCalibration& cal) {
  const MasterEquation equation(system);
  BiasPulse pulse;
  pulse.amplitude = cal.amplitude;
  pulse.duration = cal.duration;
  const Trajectory t = evolve(equation.gibbs_state(cal.initial_temperature), system, junction, coupling,
                              pulse, cal.dt, cal.duration);
  if (!t.temperatures.back()) throw NumericError("reference heating run ended in a non-thermal state");
  return *t.temperatures.back();
}

double calibrate_kappa(const SystemSpec& system, const JunctionSpec& junction, const CouplingSpec& coupling,
                       const HeatingCalibration& cal) {
  auto temperature_at = [&](double kappa) {
    CouplingSpec c = coupling;
    c.kappa_eff = kappa;
    return reference_heating_temperature(system, junction, c, cal);
  };
  double lo = 1e-4, hi = 10.0;
  if (temperature_at(lo) > cal.target_temperature || temperature_at(hi) < cal.target_temperature) {
    throw RangeError("target temperature not reachable for kappa_eff in [1e-4, 10] 1/ns");
  }
  for (int iter = 0; iter < 100; ++iter) {
    const double mid = std::sqrt(lo * hi);
    const double t = temperature_at(mid);
    if (std::abs(t - cal.target_temperature) < 1e-4) return mid;
    (t < cal.target_temperature ? lo : hi) = mid;
  }
  return std::sqrt(lo * hi);
}

}  // namespace qcrsim
