#pragma once

#include <array>
#include <vector>

#include "qcrsim/dynamics.hpp"
#include "qcrsim/qcr.hpp"
#include "qcrsim/system.hpp"

namespace qcrsim {

struct OttoSpec {
  double omega_max = 4.09;   // GHz, sweet spot
  double omega_min = 3.0;    // GHz, detuned
  double v_hot = 1.2;        // mV, above the gap
  double v_cold = 0.15;      // mV, below the gap
  double t_isochore = 100.0; // ns
  double t_adiabat = 50.0;   // ns, QCR off
  int n_cycles = 20;

  void validate(const JunctionSpec& junction) const;
};

struct OttoOptions {
  double dt = 0.5;  // ns, isochore integration step
  DissipationModel model = DissipationModel::kTransmon;
};

// Energies in GHz * h. Q > 0 flows into the working medium, W > 0 is
// extracted.
struct OttoCycle {
  double q_hot = 0.0;
  double q_cold = 0.0;
  double work = 0.0;
  double efficiency = 0.0;          // W / Q_h, NaN unless Q_h > 0
  double energy_change = 0.0;       // E(end) - E(start) of the cycle
  double first_law_residual = 0.0;  // |Q_h + Q_c - W - dE| / scale
  double state_change = 0.0;        // trace distance to the previous cycle start
  // Transmon populations after strokes (i) to (iv).
  std::array<Eigen::VectorXd, 4> stroke_populations;
};

struct OttoResult {
  std::vector<OttoCycle> cycles;
  double t_hot = 0.0;   // K, m=0 effective temperature at (omega_max, v_hot)
  double t_cold = 0.0;  // K, m=0 effective temperature at (omega_min, v_cold)
  double carnot_efficiency = 0.0;
  double frequency_efficiency = 0.0;
  bool limit_cycle = false;
  int limit_cycle_index = -1;  // first cycle whose start state repeats within 1e-6

  const OttoCycle& last() const { return cycles.back(); }
};

// 1 - omega_min / omega_max.
double frequency_efficiency(const OttoSpec& spec);

// Four strokes per cycle: hot isochore at omega_max, ideal adiabat to
// omega_min, cold isochore, ideal adiabat back. Starts from the cold-bath
// steady state.
OttoResult run_cycle(const OttoSpec& spec, const SystemSpec& system, const JunctionSpec& junction,
                     const CouplingSpec& coupling, const OttoOptions& options = {});

}  // namespace qcrsim
