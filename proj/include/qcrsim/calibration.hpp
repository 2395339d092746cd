#pragma once

#include "qcrsim/qcr.hpp"
#include "qcrsim/system.hpp"

namespace qcrsim {

// Reference heating experiment used to pin kappa_eff: a net-zero square pulse
// of `amplitude` for `duration` starting from the Gibbs state at
// `initial_temperature`, judged by the four-state Gibbs fit at the end.
struct HeatingCalibration {
  double amplitude = 1.2;             // mV
  double duration = 100.0;            // ns
  double initial_temperature = 0.11;  // K
  double target_temperature = 0.47;   // K
  double dt = 0.1;                    // ns
};

// Fitted end temperature of the reference experiment.
double reference_heating_temperature(const SystemSpec& system, const JunctionSpec& junction,
                                     const CouplingSpec& coupling, const HeatingCalibration& cal = {});

// Bisection in log kappa_eff until the reference experiment ends at the
// target temperature (to 1e-4 K).
double calibrate_kappa(const SystemSpec& system, const JunctionSpec& junction, const CouplingSpec& coupling,
                       const HeatingCalibration& cal = {});

}  // namespace qcrsim
