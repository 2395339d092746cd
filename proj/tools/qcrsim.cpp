#include <CLI11.hpp>

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "qcrsim/config.hpp"
#include "qcrsim/io.hpp"
#include "qcrsim/keyvalue.hpp"
#include "qcrsim/pipeline.hpp"
#include "qcrsim/random.hpp"
#include "qcrsim/readout.hpp"
#include "qcrsim/thermometry.hpp"

namespace {

using namespace qcrsim;

struct CommonOptions {
  std::string config_path;
  std::vector<std::string> settings;  // key=value overrides
};

void add_common(CLI::App* app, CommonOptions& common) {
  app->add_option("--config", common.config_path, "Experiment config file");
  app->add_option("--set", common.settings, "Override a config key (key=value), repeatable");
}

ExperimentConfig resolve(const CommonOptions& common) {
  ExperimentConfig config = common.config_path.empty() ? ExperimentConfig{} : load_config(common.config_path);
  for (const auto& s : common.settings) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ValidationError(s, "--set expects key=value");
    apply_setting(config, trim(s.substr(0, eq)), trim(s.substr(eq + 1)), "--set");
  }
  return config;
}

void emit(const std::string& content, const std::string& path) {
  if (path.empty() || path == "-") {
    std::cout << content;
  } else {
    write_file(path, content);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Transmon thermal-state generation with a quantum-circuit refrigerator"};
  app.require_subcommand(1);

  // rates
  CommonOptions rates_common;
  std::vector<double> rates_voltages;
  std::string rates_out;
  auto* rates = app.add_subcommand("rates", "Transition rates and effective temperatures versus bias");
  add_common(rates, rates_common);
  rates->add_option("--voltages", rates_voltages, "Bias voltages (mV)")->delimiter(',');
  rates->add_option("-o,--out", rates_out, "Output CSV (default stdout)");

  // evolve
  CommonOptions evolve_common;
  std::optional<double> evolve_amplitude, evolve_duration, evolve_dt;
  std::optional<std::string> evolve_initial, evolve_model;
  std::string evolve_out;
  auto* evolve_cmd = app.add_subcommand("evolve", "Lindblad evolution under a square bias pulse");
  add_common(evolve_cmd, evolve_common);
  evolve_cmd->add_option("--amplitude", evolve_amplitude, "Pulse amplitude (mV)");
  evolve_cmd->add_option("--duration", evolve_duration, "Pulse duration (ns)");
  evolve_cmd->add_option("--dt", evolve_dt, "Time step (ns)");
  evolve_cmd->add_option("--initial", evolve_initial, "gibbs:<T_K> or level:<n>");
  evolve_cmd->add_option("--model", evolve_model, "transmon or extended");
  evolve_cmd->add_option("-o,--out", evolve_out, "Output CSV (default stdout)");

  // shots
  CommonOptions shots_common;
  std::vector<double> shots_populations;
  std::optional<int> shots_n;
  std::optional<std::uint64_t> shots_seed;
  bool shots_calibration = false;
  std::string shots_out;
  auto* shots_cmd = app.add_subcommand("shots", "Synthesize single-shot IQ data");
  add_common(shots_cmd, shots_common);
  shots_cmd->add_option("--populations", shots_populations, "p0,p1,p2,p3")->delimiter(',')->expected(4);
  shots_cmd->add_option("-n,--count", shots_n, "Number of shots (per state with --calibration)");
  shots_cmd->add_option("--seed", shots_seed, "Root seed");
  shots_cmd->add_flag("--calibration", shots_calibration, "Labelled shots from each prepared state");
  shots_cmd->add_option("-o,--out", shots_out, "Output CSV (default stdout)");

  // fit
  CommonOptions fit_common;
  std::string fit_calibration, fit_model_out, fit_out;
  std::vector<std::string> fit_shots;
  std::optional<std::uint64_t> fit_seed;
  auto* fit_cmd = app.add_subcommand("fit", "Fit the readout GMM and extract populations");
  add_common(fit_cmd, fit_common);
  fit_cmd->add_option("--calibration", fit_calibration, "Labelled calibration shots CSV")->required();
  fit_cmd->add_option("--shots", fit_shots, "Shot CSVs to convert into populations");
  fit_cmd->add_option("--model", fit_model_out, "Model file to write");
  fit_cmd->add_option("--seed", fit_seed, "Root seed");
  fit_cmd->add_option("-o,--out", fit_out, "Populations CSV (default stdout)");

  // thermo
  CommonOptions thermo_common;
  std::string thermo_in, thermo_out, thermo_summary_out;
  std::optional<double> thermo_vmin;
  auto* thermo_cmd = app.add_subcommand("thermo", "Gibbs temperatures from measured populations");
  add_common(thermo_cmd, thermo_common);
  thermo_cmd->add_option("populations", thermo_in, "CSV with p0..p3 and optional V_mV, t_ns")->required();
  thermo_cmd->add_option("--v-min", thermo_vmin, "Lower bias edge of the slope fit (mV)");
  thermo_cmd->add_option("-o,--out", thermo_out, "Temperatures CSV (default stdout)");
  thermo_cmd->add_option("--summary", thermo_summary_out, "Summary CSV (default stdout after the table)");

  // otto
  CommonOptions otto_common;
  std::optional<double> otto_vhot, otto_vcold, otto_omin, otto_omax, otto_tiso;
  std::optional<int> otto_cycles;
  std::string otto_dir;
  auto* otto_cmd = app.add_subcommand("otto", "Quantum Otto cycle on the tunable bath");
  add_common(otto_cmd, otto_common);
  otto_cmd->add_option("--v-hot", otto_vhot, "Hot-bath bias (mV)");
  otto_cmd->add_option("--v-cold", otto_vcold, "Cold-bath bias (mV)");
  otto_cmd->add_option("--omega-max", otto_omax, "Hot-stroke frequency (GHz)");
  otto_cmd->add_option("--omega-min", otto_omin, "Cold-stroke frequency (GHz)");
  otto_cmd->add_option("--t-isochore", otto_tiso, "Isochore duration (ns)");
  otto_cmd->add_option("--cycles", otto_cycles, "Number of cycles");
  otto_cmd->add_option("-o,--out-dir", otto_dir, "Directory for otto_cycles.csv and otto_summary.csv (default stdout)");

  // pipeline
  std::string pipeline_target;
  std::optional<std::uint64_t> pipeline_seed;
  std::optional<std::string> pipeline_out;
  std::vector<std::string> pipeline_settings;
  auto* pipeline_cmd = app.add_subcommand("pipeline", "Run a preset or config file end to end");
  pipeline_cmd->add_option("target", pipeline_target, "Preset name (fig3d, fig4a, fig4b, otto-demo) or config file")
      ->required();
  pipeline_cmd->add_option("--seed", pipeline_seed, "Root seed");
  pipeline_cmd->add_option("--out", pipeline_out, "Output directory");
  pipeline_cmd->add_option("--set", pipeline_settings, "Override a config key (key=value), repeatable");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*rates) {
      ExperimentConfig config = resolve(rates_common);
      if (!rates_voltages.empty()) config.rates.voltages = rates_voltages;
      config.system.validate();
      config.junction.validate();
      config.coupling.validate();
      emit(rates_table(config).str(), rates_out);
    } else if (*evolve_cmd) {
      ExperimentConfig config = resolve(evolve_common);
      if (evolve_amplitude) config.pulse.amplitude = *evolve_amplitude;
      if (evolve_duration) config.pulse.duration = *evolve_duration;
      if (evolve_dt) config.evolve.dt = *evolve_dt;
      if (evolve_initial) config.evolve.initial = *evolve_initial;
      if (evolve_model) config.evolve.model = *evolve_model;
      config.validate();
      emit(trajectory_table(run_evolve(config)).str(), evolve_out);
    } else if (*shots_cmd) {
      ExperimentConfig config = resolve(shots_common);
      if (shots_seed) config.seed = *shots_seed;
      config.readout.validate();
      const ReadoutModel model = config.readout.model();
      std::vector<IQShot> shots;
      if (shots_calibration) {
        shots = synthesize_calibration(model, shots_n.value_or(config.readout.calibration_shots),
                                       derive_seed(config.seed, "readout.calibration"));
      } else {
        if (shots_populations.size() != 4) throw ValidationError("--populations", "expected p0,p1,p2,p3");
        const Eigen::Vector4d p(shots_populations[0], shots_populations[1], shots_populations[2],
                                shots_populations[3]);
        shots = synthesize_shots(p, model, shots_n.value_or(config.readout.shots),
                                 derive_seed(config.seed, "readout.shots"));
      }
      CsvWriter csv({"i", "q", "label"});
      for (const auto& s : shots) csv.add(s.i).add(s.q).add(s.label).end_row();
      emit(csv.str(), shots_out);
    } else if (*fit_cmd) {
      ExperimentConfig config = resolve(fit_common);
      if (fit_seed) config.seed = *fit_seed;
      config.readout.validate();
      const auto calibration = load_shots(fit_calibration);
      const GmmModel model = fit_gmm(calibration, kReadoutStates, calibration_components(calibration, kReadoutStates),
                                     derive_seed(config.seed, "readout.gmm"));
      if (!fit_model_out.empty()) write_file(fit_model_out, format_gmm(model));
      const Eigen::Matrix4d m =
          correction_matrix(model, config.readout.mc_samples, derive_seed(config.seed, "readout.correction"));
      CsvWriter csv({"file", "p0", "p1", "p2", "p3", "c0", "c1", "c2", "c3"});
      for (const auto& path : fit_shots) {
        const PopulationEstimate e = estimate_populations(load_shots(path), model, m);
        csv.add(std::filesystem::path(path).filename().string());
        for (int i = 0; i < 4; ++i) csv.add(e.p(i));
        for (int i = 0; i < 4; ++i) csv.add(e.raw_counts(i));
        csv.end_row();
      }
      emit(csv.str(), fit_out);
    } else if (*thermo_cmd) {
      ExperimentConfig config = resolve(thermo_common);
      if (thermo_vmin) config.thermo.v_min = *thermo_vmin;
      config.system.transmon.validate(4);
      const CsvTable table = load_csv(thermo_in);
      std::vector<SweepPoint> points;
      const bool v = table.column("V_mV").has_value();
      const bool t = table.column("t_ns").has_value();
      const std::vector<double> zeros(table.rows.size(), 0.0);
      const auto vs = v ? table.values("V_mV") : zeros;
      const auto ts = t ? table.values("t_ns") : zeros;
      std::vector<std::vector<double>> cols;
      for (int i = 0; i < 4; ++i) cols.push_back(table.values("p" + std::to_string(i)));
      for (std::size_t r = 0; r < table.rows.size(); ++r) {
        SweepPoint p;
        p.v_mv = vs[r];
        p.t_ns = ts[r];
        for (int i = 0; i < 4; ++i) p.populations(i) = cols[i][r];
        points.push_back(p);
      }
      const auto rows = run_thermo(points, config.system.transmon);
      emit(temperatures_table(rows).str(), thermo_out);
      if (v || t) emit(thermo_summary(rows, config.thermo.v_min).str(), thermo_summary_out);
    } else if (*otto_cmd) {
      ExperimentConfig config = resolve(otto_common);
      if (otto_vhot) config.otto.v_hot = *otto_vhot;
      if (otto_vcold) config.otto.v_cold = *otto_vcold;
      if (otto_omax) config.otto.omega_max = *otto_omax;
      if (otto_omin) config.otto.omega_min = *otto_omin;
      if (otto_tiso) config.otto.t_isochore = *otto_tiso;
      if (otto_cycles) config.otto.n_cycles = *otto_cycles;
      config.validate();
      OttoOptions options = config.otto_options;
      options.model = config.evolve.dissipation_model();
      const OttoResult result = run_cycle(config.otto, config.system, config.junction, config.coupling, options);
      if (otto_dir.empty()) {
        std::cout << otto_cycles_table(result).str() << "\n" << otto_summary_table(result).str();
      } else {
        write_file((std::filesystem::path(otto_dir) / "otto_cycles.csv").string(), otto_cycles_table(result).str());
        write_file((std::filesystem::path(otto_dir) / "otto_summary.csv").string(), otto_summary_table(result).str());
      }
    } else if (*pipeline_cmd) {
      const auto names = preset_names();
      const bool is_preset = std::find(names.begin(), names.end(), pipeline_target) != names.end();
      if (!is_preset && !std::filesystem::exists(pipeline_target)) {
        preset(pipeline_target);  // throws, listing the known presets
      }
      ExperimentConfig config = is_preset ? preset(pipeline_target) : load_config(pipeline_target);
      for (const auto& s : pipeline_settings) {
        const auto eq = s.find('=');
        if (eq == std::string::npos) throw ValidationError(s, "--set expects key=value");
        apply_setting(config, trim(s.substr(0, eq)), trim(s.substr(eq + 1)), "--set");
      }
      if (pipeline_seed) config.seed = *pipeline_seed;
      if (pipeline_out) config.output_dir = *pipeline_out;
      run_pipeline(config, &std::cerr);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
