#include "qcrsim/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <ostream>

#include "qcrsim/keyvalue.hpp"
#include "qcrsim/qcr.hpp"
#include "qcrsim/random.hpp"
#include "qcrsim/units.hpp"

namespace qcrsim {

std::vector<std::string> stage_names() { return {"rates", "evolve", "sweep", "readout", "thermo", "otto"}; }

DensityMatrix initial_state(const MasterEquation& equation, const std::string& spec) {
  const auto parts = split(spec, ':');
  if (parts.size() == 2 && parts[0] == "gibbs") return equation.gibbs_state(parse_double(parts[1]));
  if (parts.size() == 2 && parts[0] == "level") {
    const long long n = parse_integer(parts[1]);
    if (n < 0 || n >= equation.transmon_levels()) {
      throw ValidationError("evolve.initial", "level outside the transmon ladder");
    }
    return equation.transmon_level(static_cast<int>(n));
  }
  throw ValidationError("evolve.initial", "expected gibbs:<T_K> or level:<n>");
}

CsvWriter rates_table(const ExperimentConfig& config) {
  CsvWriter csv({"V_mV", "m", "gamma_down_per_ns", "gamma_up_per_ns", "T_eff_K"});
  for (double v : config.rates.voltages) {
    const RateTable table = transition_rates(config.system, config.junction, config.coupling, v);
    for (std::size_t m = 0; m < table.transitions.size(); ++m) {
      const RatePair& r = table.transitions[m];
      const EffectiveTemperature t = effective_temperature(r);
      csv.add(v).add(static_cast<int>(m)).add(r.gamma_down).add(r.gamma_up).add(t.kelvin).end_row();
    }
  }
  return csv;
}

Trajectory run_evolve(const ExperimentConfig& config) {
  const MasterEquation equation(config.system, config.evolve.dissipation_model());
  EvolveOptions options;
  options.model = config.evolve.dissipation_model();
  const double t_end = config.evolve.t_end < 0.0 ? config.pulse.duration : config.evolve.t_end;
  return evolve(initial_state(equation, config.evolve.initial), config.system, config.junction,
                config.coupling, config.pulse, config.evolve.dt, t_end, options);
}

CsvWriter trajectory_table(const Trajectory& trajectory) {
  std::vector<std::string> header{"t_ns"};
  const int n = trajectory.populations.empty() ? 0 : static_cast<int>(trajectory.populations.front().size());
  for (int i = 0; i < n; ++i) header.push_back("p" + std::to_string(i));
  header.push_back("T_fit_K");
  CsvWriter csv(header);
  for (std::size_t k = 0; k < trajectory.times.size(); ++k) {
    csv.add(trajectory.times[k]);
    for (int i = 0; i < n; ++i) csv.add(trajectory.populations[k](i));
    csv.add(k < trajectory.temperatures.size() ? trajectory.temperatures[k] : std::nullopt);
    csv.end_row();
  }
  return csv;
}

std::vector<SweepPoint> run_sweep(const ExperimentConfig& config) {
  const MasterEquation equation(config.system, config.evolve.dissipation_model());
  const DensityMatrix rho0 = equation.gibbs_state(config.sweep.initial_temperature);
  EvolveOptions options;
  options.model = config.evolve.dissipation_model();
  options.fit_temperatures = false;
  std::vector<SweepPoint> points;
  for (double amplitude : config.sweep.amplitudes) {
    for (double duration : config.sweep.durations) {
      BiasPulse pulse = config.pulse;
      pulse.amplitude = amplitude;
      pulse.duration = duration;
      try {
        pulse.validate();
      } catch (const ValidationError& e) {
        throw ValidationError("sweep.durations", e.what());
      }
      const Trajectory t =
          evolve(rho0, config.system, config.junction, config.coupling, pulse, config.evolve.dt, duration, options);
      SweepPoint point;
      point.v_mv = amplitude;
      point.t_ns = duration;
      point.populations = normalize_head(t.populations.back().cwiseMax(0.0), kMeasuredStates);
      points.push_back(point);
    }
  }
  return points;
}

CsvWriter populations_table(const std::vector<SweepPoint>& points) {
  CsvWriter csv({"V_mV", "t_ns", "p0", "p1", "p2", "p3"});
  for (const auto& p : points) {
    csv.add(p.v_mv).add(p.t_ns);
    for (int i = 0; i < kMeasuredStates; ++i) csv.add(p.populations(i));
    csv.end_row();
  }
  return csv;
}

ReadoutRun run_readout(const ExperimentConfig& config, const std::vector<SweepPoint>& points) {
  const ReadoutModel geometry = config.readout.model();
  ReadoutRun run;
  run.calibration = synthesize_calibration(geometry, config.readout.calibration_shots,
                                           derive_seed(config.seed, "readout.calibration"));
  run.model = fit_gmm(run.calibration, kReadoutStates, calibration_components(run.calibration, kReadoutStates),
                      derive_seed(config.seed, "readout.gmm"));
  run.correction =
      correction_matrix(run.model, config.readout.mc_samples, derive_seed(config.seed, "readout.correction"));
  // Every dataset draws from the same shot stream, so neighbouring sweep
  // points differ only through their populations.
  const std::uint64_t shot_seed = derive_seed(config.seed, "readout.shots");
  for (const auto& point : points) {
    const auto shots = synthesize_shots(point.populations, geometry, config.readout.shots, shot_seed);
    SweepPoint measured = point;
    measured.populations = estimate_populations(shots, run.model, run.correction).p;
    run.measured.push_back(measured);
  }
  return run;
}

std::vector<ThermoRow> run_thermo(const std::vector<SweepPoint>& points, const TransmonSpec& transmon) {
  std::vector<ThermoRow> rows;
  for (const auto& p : points) rows.push_back({p.v_mv, p.t_ns, fit_gibbs(p.populations, transmon)});
  return rows;
}

CsvWriter temperatures_table(const std::vector<ThermoRow>& rows) {
  CsvWriter csv({"V_mV", "t_ns", "T_mK", "T_err_mK", "residual"});
  for (const auto& r : rows) {
    csv.add(r.v_mv).add(r.t_ns);
    if (r.fit.temperature) {
      csv.add(1e3 * *r.fit.temperature).add(1e3 * r.fit.uncertainty);
    } else {
      csv.add(std::string()).add(std::string());
    }
    csv.add(r.fit.residual).end_row();
  }
  return csv;
}

CsvWriter thermo_summary(const std::vector<ThermoRow>& rows, double v_min) {
  std::map<double, std::vector<const ThermoRow*>> by_amplitude;
  std::map<double, int> durations;
  for (const auto& r : rows) {
    by_amplitude[r.v_mv].push_back(&r);
    ++durations[r.t_ns];
  }
  if (durations.size() <= 1) {
    std::vector<std::pair<double, double>> points;
    for (const auto& r : rows) {
      if (r.fit.temperature) points.emplace_back(r.v_mv, *r.fit.temperature);
    }
    CsvWriter csv({"slope_K_per_mV", "v_min_mV", "points"});
    int used = 0;
    for (const auto& p : points) used += p.first > v_min ? 1 : 0;
    csv.add(heating_slope(points, v_min)).add(v_min).add(used).end_row();
    return csv;
  }
  CsvWriter csv({"V_mV", "t0_K", "a_K", "tau_ns", "residual", "status"});
  for (const auto& [v, group] : by_amplitude) {
    std::vector<double> times, temps;
    for (const ThermoRow* r : group) {
      if (!r->fit.temperature) continue;
      times.push_back(r->t_ns);
      temps.push_back(*r->fit.temperature);
    }
    SaturationFit fit;
    std::string status = "ok";
    try {
      fit = fit_saturation(times, temps);
      if (fit.degenerate) status = "flat";
    } catch (const SaturationFitError& e) {
      fit = e.best_effort();
      status = "unconverged";
    } catch (const std::invalid_argument&) {
      csv.add(v).add(std::string()).add(std::string()).add(std::string()).add(std::string()).add("too_few_points");
      csv.end_row();
      continue;
    }
    csv.add(v).add(fit.t0).add(fit.a).add(fit.tau).add(fit.residual).add(status).end_row();
  }
  return csv;
}

CsvWriter otto_cycles_table(const OttoResult& result) {
  CsvWriter csv({"cycle", "Q_h", "Q_c", "W", "eta"});
  for (std::size_t k = 0; k < result.cycles.size(); ++k) {
    const OttoCycle& c = result.cycles[k];
    csv.add(static_cast<int>(k))
        .add(c.q_hot * kAttojoulePerGHz)
        .add(c.q_cold * kAttojoulePerGHz)
        .add(c.work * kAttojoulePerGHz)
        .add(c.efficiency)
        .end_row();
  }
  return csv;
}

CsvWriter otto_summary_table(const OttoResult& result) {
  CsvWriter csv({"eta_limit", "eta_c", "eta_f", "T_h_K", "T_c_K", "limit_cycle"});
  csv.add(result.last().efficiency)
      .add(result.carnot_efficiency)
      .add(result.frequency_efficiency)
      .add(result.t_hot)
      .add(result.t_cold)
      .add(result.limit_cycle ? result.limit_cycle_index : -1)
      .end_row();
  return csv;
}

std::vector<std::string> run_pipeline(const ExperimentConfig& config, std::ostream* log) {
  config.validate();
  const auto known = stage_names();
  for (const auto& s : config.stages) {
    if (std::find(known.begin(), known.end(), s) == known.end()) {
      throw ValidationError("stages", "unknown stage `" + s + "`");
    }
  }
  if (config.stages.empty()) throw ValidationError("stages", "no stages to run");

  const std::filesystem::path dir(config.output_dir);
  std::vector<std::string> written;
  auto emit = [&](const std::string& name, const std::string& content) {
    const std::string path = (dir / name).string();
    write_file(path, content);
    written.push_back(path);
    if (log) *log << "wrote " << path << "\n";
  };
  emit("config.txt", echo_config(config));

  std::optional<std::vector<SweepPoint>> sweep;
  std::optional<std::vector<SweepPoint>> measured;
  for (const auto& stage : config.stages) {
    if (log) *log << "stage " << stage << "\n";
    try {
      if (stage == "rates") {
        emit("rates.csv", rates_table(config).str());
      } else if (stage == "evolve") {
        emit("trajectory.csv", trajectory_table(run_evolve(config)).str());
      } else if (stage == "sweep") {
        sweep = run_sweep(config);
        emit("sweep.csv", populations_table(*sweep).str());
      } else if (stage == "readout") {
        if (!sweep) throw std::runtime_error("needs the sweep stage first");
        const ReadoutRun run = run_readout(config, *sweep);
        {
          CsvWriter csv({"i", "q", "label"});
          for (const auto& s : run.calibration) csv.add(s.i).add(s.q).add(s.label).end_row();
          emit("calibration_shots.csv", csv.str());
        }
        emit("model.txt", format_gmm(run.model));
        emit("measured_populations.csv", populations_table(run.measured).str());
        measured = run.measured;
      } else if (stage == "thermo") {
        const auto* source = measured ? &*measured : sweep ? &*sweep : nullptr;
        if (!source) throw std::runtime_error("needs the sweep stage first");
        const auto rows = run_thermo(*source, config.system.transmon);
        emit("temperatures.csv", temperatures_table(rows).str());
        emit("thermo_summary.csv", thermo_summary(rows, config.thermo.v_min).str());
      } else if (stage == "otto") {
        OttoOptions options = config.otto_options;
        options.model = config.evolve.dissipation_model();
        const OttoResult result =
            run_cycle(config.otto, config.system, config.junction, config.coupling, options);
        emit("otto_cycles.csv", otto_cycles_table(result).str());
        emit("otto_summary.csv", otto_summary_table(result).str());
      }
    } catch (const StageError&) {
      throw;
    } catch (const std::exception& e) {
      throw StageError(stage, e.what());
    }
  }
  return written;
}

}  // namespace qcrsim
