#pragma once

#include <utility>
#include <vector>

#include "qcrsim/system.hpp"

namespace qcrsim {

// Normal-metal / insulator / superconductor tunnel junction.
struct JunctionSpec {
  double delta = 0.215;     // meV
  double gamma_d = 2.3e-3;  // Dynes broadening
  double r_t = 13.8;        // kOhm
  double t_n = 0.1;         // K, normal-metal electron temperature

  void validate() const;
  double thermal_energy() const;  // k_B t_n in meV
};

// Maps junction rates onto transmon transitions. `kappa_eff` is the 0->1
// decay rate the transmon would see through a normal-state junction at zero
// bias and zero temperature, before the Purcell factor. The default is the
// calibrated value (see calibration.hpp).
struct CouplingSpec {
  double kappa_eff = 0.054095;  // 1/ns
  bool purcell_filter = true;

  void validate() const;
};

struct RatePair {
  double gamma_down = 0.0;  // 1/ns, m+1 -> m
  double gamma_up = 0.0;    // 1/ns, m -> m+1
  double omega = 0.0;       // GHz
};

struct RateTable {
  double voltage = 0.0;  // mV
  std::vector<RatePair> transitions;  // indexed by lower level m
};

// BCS density of states with Dynes broadening, eps in units of Delta.
double dynes_dos(double eps, double gamma_d);

// Single-direction golden-rule integral int n_S(e) f(e - x) [1 - f(e)] de
// in meV, for energy x handed to the tunnelling quasiparticle.
double tunnelling_integral(double x_mev, const JunctionSpec& junction);

// Rate (1/ns) at which the junction absorbs energy E (meV) at bias v (mV),
// summed over both tunnelling directions. Negative E is emission into the
// circuit. Even in v.
double tunnel_spectral_fn(double energy_mev, double v_mv, const JunctionSpec& junction);

// Per-transition up/down rates on the transmon ladder at bias v.
RateTable transition_rates(const SystemSpec& system, const JunctionSpec& junction,
                           const CouplingSpec& coupling, double v_mv);

enum class TemperatureRegime { kThermal, kInfinite, kInverted };

struct EffectiveTemperature {
  double kelvin = 0.0;  // meaningful only when regime == kThermal
  TemperatureRegime regime = TemperatureRegime::kThermal;
  bool thermal() const { return regime == TemperatureRegime::kThermal; }
};

// T_eff = h omega / (k_B ln(gamma_down / gamma_up)).
EffectiveTemperature effective_temperature(const RatePair& pair);

// Junction current in nA at bias v, for synthetic IV curves.
double junction_current(double v_mv, const JunctionSpec& junction);

struct DynesExtraction {
  double delta = 0.0;    // meV
  double gamma_d = 0.0;
};

// Gap from the half distance between the two conductance peaks, Dynes
// parameter as the ratio of the in-gap to out-of-gap linear-fit slopes.
DynesExtraction extract_dynes(const std::vector<std::pair<double, double>>& iv_curve);

}  // namespace qcrsim
