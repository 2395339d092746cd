#include "qcrsim/otto.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "qcrsim/units.hpp"

namespace qcrsim {

void OttoSpec::validate(const JunctionSpec& junction) const {
  if (!(omega_min > 0.0)) throw ValidationError("otto.omega_min", "must be > 0");
  if (!(omega_min < omega_max)) throw ValidationError("otto.omega_min", "must be below omega_max");
  if (!(std::abs(v_hot) > junction.delta)) throw ValidationError("otto.v_hot", "must exceed Delta/e");
  if (!(std::abs(v_cold) < junction.delta)) throw ValidationError("otto.v_cold", "must stay below Delta/e");
  if (!(t_isochore > 0.0)) throw ValidationError("otto.t_isochore", "must be > 0");
  if (!(t_adiabat > 0.0)) throw ValidationError("otto.t_adiabat", "must be > 0");
  if (n_cycles < 1) throw ValidationError("otto.n_cycles", "must be >= 1");
}

double frequency_efficiency(const OttoSpec& spec) { return 1.0 - spec.omega_min / spec.omega_max; }

namespace {

// Ideal adiabat: populations and coherences in the bare basis carry over
// unchanged to the Hamiltonian at the new frequency.
DensityMatrix adiabat(const DensityMatrix& rho) { return rho; }

}  // namespace

OttoResult run_cycle(const OttoSpec& spec, const SystemSpec& system, const JunctionSpec& junction,
                     const CouplingSpec& coupling, const OttoOptions& options) {
  junction.validate();
  coupling.validate();
  spec.validate(junction);

  SystemSpec hot_system = system;
  hot_system.transmon.omega_ge = spec.omega_max;
  SystemSpec cold_system = system;
  cold_system.transmon.omega_ge = spec.omega_min;

  const MasterEquation hot(hot_system, options.model);
  const MasterEquation cold(cold_system, options.model);
  const RateTable hot_rates = transition_rates(hot_system, junction, coupling, spec.v_hot);
  const RateTable cold_rates = transition_rates(cold_system, junction, coupling, spec.v_cold);

  OttoResult result;
  result.t_hot = effective_temperature(hot_rates.transitions.front()).kelvin;
  result.t_cold = effective_temperature(cold_rates.transitions.front()).kelvin;
  result.carnot_efficiency = 1.0 - result.t_cold / result.t_hot;
  result.frequency_efficiency = frequency_efficiency(spec);

  EvolveOptions evolve_options;
  evolve_options.model = options.model;
  evolve_options.fit_temperatures = false;
  auto isochore = [&](const MasterEquation& eq, const RateTable& rates, const DensityMatrix& rho) {
    // The rotating frame leaves bare-basis energies unchanged; the final state
    // is returned in the lab frame.
    const Trajectory t = propagate(rho, eq, [&](double) { return rates; }, options.dt, spec.t_isochore,
                                   evolve_options);
    return t.final_state;
  };

  DensityMatrix state = steady_state(cold, cold_rates).state;
  for (int c = 0; c < spec.n_cycles; ++c) {
    const DensityMatrix start = state;
    const double e_start = hot.energy(state);

    // (i) hot isochore at omega_max
    const DensityMatrix heated = isochore(hot, hot_rates, state);
    const double q_hot = hot.energy(heated) - e_start;
    // (ii) adiabat omega_max -> omega_min
    const DensityMatrix lowered = adiabat(heated);
    const double w_down = cold.energy(lowered) - hot.energy(heated);
    // (iii) cold isochore at omega_min
    const DensityMatrix cooled = isochore(cold, cold_rates, lowered);
    const double q_cold = cold.energy(cooled) - cold.energy(lowered);
    // (iv) adiabat omega_min -> omega_max
    state = adiabat(cooled);
    const double w_up = hot.energy(state) - cold.energy(cooled);

    OttoCycle cycle;
    cycle.q_hot = q_hot;
    cycle.q_cold = q_cold;
    cycle.work = -(w_down + w_up);
    cycle.energy_change = hot.energy(state) - e_start;
    cycle.efficiency = q_hot > 0.0 ? cycle.work / q_hot : std::numeric_limits<double>::quiet_NaN();
    const double scale = std::max({std::abs(q_hot), std::abs(q_cold), std::abs(cycle.work), 1e-300});
    cycle.first_law_residual =
        std::abs(cycle.q_hot + cycle.q_cold - cycle.work - cycle.energy_change) / scale;
    cycle.state_change = trace_distance(state, start);
    cycle.stroke_populations = {hot.transmon_populations(heated), cold.transmon_populations(lowered),
                                cold.transmon_populations(cooled), hot.transmon_populations(state)};
    result.cycles.push_back(cycle);
    if (!result.limit_cycle && cycle.state_change < 1e-6) {
      result.limit_cycle = true;
      result.limit_cycle_index = c;
    }
  }
  return result;
}

}  // namespace qcrsim
