#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qcrsim/dynamics.hpp"
#include "qcrsim/otto.hpp"
#include "qcrsim/qcr.hpp"
#include "qcrsim/readout.hpp"
#include "qcrsim/system.hpp"
#include "qcrsim/units.hpp"

namespace qcrsim {

struct ReadoutGeometry {
  double separation = 3.0;  // adjacent means, in sigma
  double sigma = 1.0;
  double h_inflation = 2.0;
  int shots = 10000;              // per measured dataset
  int calibration_shots = 10000;  // per prepared state
  int mc_samples = 100000;        // correction-matrix draws per component

  ReadoutModel model() const { return ReadoutModel::circle(separation, sigma, h_inflation); }
  void validate() const;
};

struct EvolveSettings {
  double dt = 0.1;       // ns
  double t_end = -1.0;   // ns; negative means pulse.duration
  std::string initial = "gibbs:0.11";  // gibbs:<T_K> | level:<n>
  std::string model = "transmon";      // transmon | extended

  void validate() const;
  DissipationModel dissipation_model() const;
};

struct SweepSettings {
  std::vector<double> amplitudes{0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0, 1.1, 1.2};
  std::vector<double> durations{100.0};
  double initial_temperature = 0.11;  // K

  void validate() const;
};

struct RatesSettings {
  std::vector<double> voltages{0.0, 0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.4, 0.5, 0.6, 0.8, 1.0, 1.2};
};

struct ThermoSettings {
  double v_min = 0.215;  // mV, lower edge of the slope fit
};

struct ExperimentConfig {
  SystemSpec system;
  JunctionSpec junction;
  CouplingSpec coupling;
  BiasPulse pulse;
  EvolveSettings evolve;
  SweepSettings sweep;
  RatesSettings rates;
  ReadoutGeometry readout;
  ThermoSettings thermo;
  OttoSpec otto;
  OttoOptions otto_options;
  std::uint64_t seed = 42;
  std::string output_dir = "out";
  std::vector<std::string> stages;

  // Validates every block; ValidationError names the offending field.
  void validate() const;
};

// Unknown key, with the closest valid key as a suggestion.
class UnknownKeyError : public ValidationError {
 public:
  UnknownKeyError(const std::string& key, const std::string& suggestion, const std::string& where);
  const std::string& suggestion() const noexcept { return suggestion_; }

 private:
  std::string suggestion_;
};

std::vector<std::string> config_keys();

// Sets one dotted key; throws UnknownKeyError or ValidationError.
void apply_setting(ExperimentConfig& config, const std::string& key, const std::string& value,
                   const std::string& where = "");

ExperimentConfig parse_config(std::string_view text, const std::string& source = "<config>");
ExperimentConfig load_config(const std::string& path);

// Every key with its resolved value, in canonical order; parses back to an
// identical config.
std::string echo_config(const ExperimentConfig& config);

// Named presets: fig3d, fig4a, fig4b, otto-demo.
std::vector<std::string> preset_names();
ExperimentConfig preset(const std::string& name);

}  // namespace qcrsim
