#include "qcrsim/config.hpp"

#include <algorithm>
#include <functional>
#include <sstream>
#include <stdexcept>
#include <variant>

#include "qcrsim/keyvalue.hpp"

namespace qcrsim {

void ReadoutGeometry::validate() const {
  if (!(separation > 0.0)) throw ValidationError("readout.separation", "must be > 0");
  if (!(sigma > 0.0)) throw ValidationError("readout.sigma", "must be > 0");
  if (!(h_inflation > 0.0)) throw ValidationError("readout.h_inflation", "must be > 0");
  if (shots < 1) throw ValidationError("readout.shots", "must be >= 1");
  if (calibration_shots < 10) throw ValidationError("readout.calibration_shots", "must be >= 10");
  if (mc_samples < 1000) throw ValidationError("readout.mc_samples", "must be >= 1000");
}

void EvolveSettings::validate() const {
  if (!(dt > 0.0)) throw ValidationError("evolve.dt", "must be > 0");
  dissipation_model();
  const auto parts = split(initial, ':');
  if (parts.size() != 2 || (parts[0] != "gibbs" && parts[0] != "level")) {
    throw ValidationError("evolve.initial", "expected gibbs:<T_K> or level:<n>");
  }
  try {
    if (parts[0] == "gibbs" && !(parse_double(parts[1]) > 0.0)) {
      throw ValidationError("evolve.initial", "temperature must be > 0");
    }
    if (parts[0] == "level" && parse_integer(parts[1]) < 0) {
      throw ValidationError("evolve.initial", "level must be >= 0");
    }
  } catch (const std::invalid_argument& e) {
    if (dynamic_cast<const ValidationError*>(&e)) throw;
    throw ValidationError("evolve.initial", e.what());
  }
}

DissipationModel EvolveSettings::dissipation_model() const {
  if (model == "transmon") return DissipationModel::kTransmon;
  if (model == "extended") return DissipationModel::kExtended;
  throw ValidationError("evolve.model", "expected transmon or extended");
}

void SweepSettings::validate() const {
  if (amplitudes.empty()) throw ValidationError("sweep.amplitudes", "must not be empty");
  if (durations.empty()) throw ValidationError("sweep.durations", "must not be empty");
  for (double d : durations) {
    if (d < 0.0) throw ValidationError("sweep.durations", "must be >= 0");
  }
  if (!(initial_temperature > 0.0)) throw ValidationError("sweep.initial_temperature", "must be > 0");
}

void ExperimentConfig::validate() const {
  system.validate();
  if (system.transmon.n_levels < 4) throw ValidationError("transmon.n_levels", "must be >= 4 for readout");
  junction.validate();
  coupling.validate();
  pulse.validate();
  evolve.validate();
  sweep.validate();
  readout.validate();
  otto.validate(junction);
  if (!(otto_options.dt > 0.0)) throw ValidationError("otto.dt", "must be > 0");
  if (!(thermo.v_min >= 0.0)) throw ValidationError("thermo.v_min", "must be >= 0");
}

namespace {

using FieldRef = std::variant<double*, int*, bool*, std::string*, std::vector<double>*,
                              std::vector<std::string>*, std::uint64_t*>;

struct Field {
  std::string key;
  FieldRef ref;
};

std::vector<Field> bind(ExperimentConfig& c) {
  return {
      {"seed", &c.seed},
      {"output_dir", &c.output_dir},
      {"stages", &c.stages},
      {"transmon.omega_ge", &c.system.transmon.omega_ge},
      {"transmon.alpha", &c.system.transmon.alpha},
      {"transmon.n_levels", &c.system.transmon.n_levels},
      {"reset_resonator.omega", &c.system.reset_resonator.omega},
      {"reset_resonator.g", &c.system.reset_resonator.g},
      {"reset_resonator.n_levels", &c.system.reset_resonator.n_levels},
      {"readout_resonator.omega", &c.system.readout_resonator.omega},
      {"readout_resonator.g", &c.system.readout_resonator.g},
      {"readout_resonator.n_levels", &c.system.readout_resonator.n_levels},
      {"system.max_dimension", &c.system.max_dimension},
      {"junction.delta", &c.junction.delta},
      {"junction.gamma_d", &c.junction.gamma_d},
      {"junction.r_t", &c.junction.r_t},
      {"junction.t_n", &c.junction.t_n},
      {"coupling.kappa_eff", &c.coupling.kappa_eff},
      {"coupling.purcell_filter", &c.coupling.purcell_filter},
      {"pulse.dc_offset", &c.pulse.dc_offset},
      {"pulse.amplitude", &c.pulse.amplitude},
      {"pulse.duration", &c.pulse.duration},
      {"pulse.period", &c.pulse.period},
      {"pulse.rise_time", &c.pulse.rise_time},
      {"evolve.dt", &c.evolve.dt},
      {"evolve.t_end", &c.evolve.t_end},
      {"evolve.initial", &c.evolve.initial},
      {"evolve.model", &c.evolve.model},
      {"sweep.amplitudes", &c.sweep.amplitudes},
      {"sweep.durations", &c.sweep.durations},
      {"sweep.initial_temperature", &c.sweep.initial_temperature},
      {"rates.voltages", &c.rates.voltages},
      {"readout.separation", &c.readout.separation},
      {"readout.sigma", &c.readout.sigma},
      {"readout.h_inflation", &c.readout.h_inflation},
      {"readout.shots", &c.readout.shots},
      {"readout.calibration_shots", &c.readout.calibration_shots},
      {"readout.mc_samples", &c.readout.mc_samples},
      {"thermo.v_min", &c.thermo.v_min},
      {"otto.omega_max", &c.otto.omega_max},
      {"otto.omega_min", &c.otto.omega_min},
      {"otto.v_hot", &c.otto.v_hot},
      {"otto.v_cold", &c.otto.v_cold},
      {"otto.t_isochore", &c.otto.t_isochore},
      {"otto.t_adiabat", &c.otto.t_adiabat},
      {"otto.n_cycles", &c.otto.n_cycles},
      {"otto.dt", &c.otto_options.dt},
  };
}

std::size_t edit_distance(const std::string& a, const std::string& b) {
  std::vector<std::size_t> row(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) row[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    std::size_t diag = row[0];
    row[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t up = row[j];
      row[j] = std::min({row[j] + 1, row[j - 1] + 1, diag + (a[i - 1] == b[j - 1] ? 0 : 1)});
      diag = up;
    }
  }
  return row[b.size()];
}

std::string nearest_key(const std::string& key) {
  std::string best;
  std::size_t best_d = static_cast<std::size_t>(-1);
  for (const auto& k : config_keys()) {
    const std::size_t d = edit_distance(key, k);
    if (d < best_d) {
      best_d = d;
      best = k;
    }
  }
  return best;
}

std::string format_value(const FieldRef& ref) {
  return std::visit(
      [](auto* p) -> std::string {
        using T = std::remove_pointer_t<decltype(p)>;
        if constexpr (std::is_same_v<T, double>) {
          return format_exact(*p);
        } else if constexpr (std::is_same_v<T, int>) {
          return std::to_string(*p);
        } else if constexpr (std::is_same_v<T, std::uint64_t>) {
          return std::to_string(*p);
        } else if constexpr (std::is_same_v<T, bool>) {
          return *p ? "true" : "false";
        } else if constexpr (std::is_same_v<T, std::string>) {
          return *p;
        } else if constexpr (std::is_same_v<T, std::vector<double>>) {
          std::string out;
          for (std::size_t i = 0; i < p->size(); ++i) out += (i ? ", " : "") + format_exact((*p)[i]);
          return out;
        } else {
          std::string out;
          for (std::size_t i = 0; i < p->size(); ++i) out += (i ? ", " : "") + (*p)[i];
          return out;
        }
      },
      ref);
}

}  // namespace

UnknownKeyError::UnknownKeyError(const std::string& key, const std::string& suggestion, const std::string& where)
    : ValidationError(key, (where.empty() ? "" : where + ": ") + "unknown key (did you mean `" + suggestion +
                               "`?)"),
      suggestion_(suggestion) {}

std::vector<std::string> config_keys() {
  ExperimentConfig scratch;
  std::vector<std::string> keys;
  for (const auto& f : bind(scratch)) keys.push_back(f.key);
  return keys;
}

void apply_setting(ExperimentConfig& config, const std::string& key, const std::string& value,
                   const std::string& where) {
  for (auto& field : bind(config)) {
    if (field.key != key) continue;
    try {
      std::visit(
          [&](auto* p) {
            using T = std::remove_pointer_t<decltype(p)>;
            if constexpr (std::is_same_v<T, double>) {
              *p = parse_double(value);
            } else if constexpr (std::is_same_v<T, int>) {
              *p = static_cast<int>(parse_integer(value));
            } else if constexpr (std::is_same_v<T, std::uint64_t>) {
              const long long v = parse_integer(value);
              if (v < 0) throw std::invalid_argument("must be >= 0");
              *p = static_cast<std::uint64_t>(v);
            } else if constexpr (std::is_same_v<T, bool>) {
              *p = parse_bool(value);
            } else if constexpr (std::is_same_v<T, std::string>) {
              *p = value;
            } else if constexpr (std::is_same_v<T, std::vector<double>>) {
              *p = parse_double_list(value);
            } else {
              p->clear();
              if (!trim(value).empty()) *p = split(value, ',');
            }
          },
          field.ref);
    } catch (const std::invalid_argument& e) {
      throw ValidationError(key, (where.empty() ? "" : where + ": ") + e.what());
    }
    return;
  }
  throw UnknownKeyError(key, nearest_key(key), where);
}

ExperimentConfig parse_config(std::string_view text, const std::string& source) {
  ExperimentConfig config;
  for (const auto& kv : parse_key_values(text, source)) {
    apply_setting(config, kv.key, kv.value, source + ":" + std::to_string(kv.line));
  }
  return config;
}

ExperimentConfig load_config(const std::string& path) { return parse_config(read_file(path), path); }

std::string echo_config(const ExperimentConfig& config) {
  ExperimentConfig copy = config;
  std::ostringstream out;
  out << "# resolved configuration\n";
  for (const auto& f : bind(copy)) out << f.key << " = " << format_value(f.ref) << "\n";
  return out.str();
}

std::vector<std::string> preset_names() { return {"fig3d", "fig4a", "fig4b", "otto-demo"}; }

ExperimentConfig preset(const std::string& name) {
  ExperimentConfig c;
  if (name == "fig3d") {
    c.stages = {"sweep", "readout", "thermo"};
  } else if (name == "fig4a") {
    c.sweep.amplitudes.clear();
    for (int i = 0; i <= 24; ++i) c.sweep.amplitudes.push_back(i / 20.0);
    c.stages = {"rates", "sweep", "readout", "thermo"};
  } else if (name == "fig4b") {
    c.sweep.amplitudes = {0.3, 0.6, 1.2};
    c.sweep.durations.clear();
    for (int i = 0; i <= 10; ++i) c.sweep.durations.push_back(20.0 * i);
    c.stages = {"sweep", "readout", "thermo"};
  } else if (name == "otto-demo") {
    c.otto.t_isochore = 400.0;
    c.stages = {"otto"};
  } else {
    std::string known;
    for (const auto& n : preset_names()) known += (known.empty() ? "" : ", ") + n;
    throw ValidationError("pipeline", "unknown preset `" + name + "` (known: " + known + ")");
  }
  c.output_dir = "out/" + name;
  return c;
}

}  // namespace qcrsim
