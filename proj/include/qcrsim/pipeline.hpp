#pragma once

#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qcrsim/config.hpp"
#include "qcrsim/dynamics.hpp"
#include "qcrsim/io.hpp"
#include "qcrsim/otto.hpp"
#include "qcrsim/readout.hpp"
#include "qcrsim/thermometry.hpp"

namespace qcrsim {

// A failed stage, tagged with its name.
class StageError : public std::runtime_error {
 public:
  StageError(const std::string& stage, const std::string& what)
      : std::runtime_error(stage + ": " + what), stage_(stage) {}
  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

std::vector<std::string> stage_names();

// One pulse setting and the four-state-normalized populations it produced.
struct SweepPoint {
  double v_mv = 0.0;
  double t_ns = 0.0;
  Eigen::Vector4d populations = Eigen::Vector4d::Zero();
};

struct ThermoRow {
  double v_mv = 0.0;
  double t_ns = 0.0;
  GibbsFit fit;
};

// gibbs:<T_K> or level:<n>.
DensityMatrix initial_state(const MasterEquation& equation, const std::string& spec);

CsvWriter rates_table(const ExperimentConfig& config);
Trajectory run_evolve(const ExperimentConfig& config);
CsvWriter trajectory_table(const Trajectory& trajectory);

// Final populations of every (amplitude, duration) pulse, from the Gibbs
// state at sweep.initial_temperature.
std::vector<SweepPoint> run_sweep(const ExperimentConfig& config);
CsvWriter populations_table(const std::vector<SweepPoint>& points);

struct ReadoutRun {
  std::vector<IQShot> calibration;
  GmmModel model;
  Eigen::Matrix4d correction = Eigen::Matrix4d::Zero();
  std::vector<SweepPoint> measured;
};

// Calibrates the GMM once, then samples and re-estimates every sweep point
// with one shared correction matrix.
ReadoutRun run_readout(const ExperimentConfig& config, const std::vector<SweepPoint>& points);

std::vector<ThermoRow> run_thermo(const std::vector<SweepPoint>& points, const TransmonSpec& transmon);
CsvWriter temperatures_table(const std::vector<ThermoRow>& rows);
// Slope over amplitudes for a single duration; per-amplitude saturation fits
// when several durations were swept.
CsvWriter thermo_summary(const std::vector<ThermoRow>& rows, double v_min);

CsvWriter otto_cycles_table(const OttoResult& result);
CsvWriter otto_summary_table(const OttoResult& result);

// Validates, writes config.txt (resolved echo), then runs `config.stages` in
// order into `config.output_dir`. Returns the files written.
std::vector<std::string> run_pipeline(const ExperimentConfig& config, std::ostream* log = nullptr);

}  // namespace qcrsim
