// Prints one PASS/FAIL line per acceptance criterion; exits non-zero if any fail.
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "qcrsim/calibration.hpp"
#include "qcrsim/config.hpp"
#include "qcrsim/dynamics.hpp"
#include "qcrsim/keyvalue.hpp"
#include "qcrsim/otto.hpp"
#include "qcrsim/pipeline.hpp"
#include "qcrsim/qcr.hpp"
#include "qcrsim/random.hpp"
#include "qcrsim/readout.hpp"
#include "qcrsim/thermometry.hpp"

using namespace qcrsim;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

std::string g_cli;  // path of the command line tool, for the determinism check

Outcome idle_gibbs() {
  Outcome o;
  const double pg = measured_gibbs_populations(0.110, TransmonSpec{}, 6)(0);
  o.detail << "p_g(0.110 K) = " << pg;
  o.require(std::abs(pg - 0.83) <= 0.01, "p_g within 0.83 +- 0.01");
  return o;
}

Outcome hot_gibbs() {
  Outcome o;
  const double pg = measured_gibbs_populations(0.476, TransmonSpec{}, 6)(0);
  o.detail << "p_g(0.476 K) = " << pg;
  o.require(std::abs(pg - 0.42) <= 0.02, "p_g within 0.42 +- 0.02");
  return o;
}

Outcome one_sigma() {
  Outcome o;
  const double closed = fraction_within_sigma(1.0);
  o.require(closed == 1.0 - std::exp(-0.5), "closed form 1 - exp(-1/2)");
  o.require(std::abs(closed - 0.3934) < 1e-4, "0.3934 to four digits");
  const ReadoutModel model = ReadoutModel::circle();
  const auto shots = synthesize_shots(Eigen::Vector4d(1, 0, 0, 0), model, 100000, derive_seed(42, "acceptance.sigma"));
  int inside = 0;
  for (const auto& s : shots) inside += model.states[0].mahalanobis2({s.i, s.q}) <= 1.0;
  const double empirical = inside / 1e5;
  o.detail << "closed form " << closed << ", empirical " << empirical;
  o.require(std::abs(empirical - 0.3934) <= 0.005, "empirical within 0.3934 +- 0.005");
  return o;
}

Outcome readout_round_trip() {
  Outcome o;
  const Eigen::Vector4d p(0.83, 0.14, 0.025, 0.005);
  const ReadoutModel truth = ReadoutModel::circle(3.0);
  double worst = 0.0;
  int failures = 0;
  for (std::uint64_t k = 0; k < 20; ++k) {
    const std::uint64_t root = derive_seed(42, "acceptance.readout", k);
    const auto cal = synthesize_calibration(truth, 10000, derive_seed(root, "calibration"));
    const GmmModel model = fit_gmm(cal, kReadoutStates, {}, derive_seed(root, "gmm"));
    const auto shots = synthesize_shots(p, truth, 10000, derive_seed(root, "shots"));
    const PopulationEstimate est = estimate_populations(shots, model, derive_seed(root, "correction"), 100000);
    const double err = (est.p - p).cwiseAbs().maxCoeff();
    worst = std::max(worst, err);
    failures += err > 0.02;
  }
  o.detail << "worst component error over 20 seeds " << worst << ", seeds above 0.02: " << failures;
  o.require(worst <= 0.02, "every component within +-0.02 on every seed");
  return o;
}

Outcome lindblad() {
  Outcome o;
  // Positivity and trace over 1000 ns of constant heating bias from the idle state.
  {
    const SystemSpec s;
    const MasterEquation eq(s);
    const RateTable rates = transition_rates(s, JunctionSpec{}, CouplingSpec{}, 1.2);
    double drift = 0.0, min_eig = 1.0;
    EvolveOptions opt;
    opt.fit_temperatures = false;
    opt.observer = [&](double, const DensityMatrix& rho) {
      drift = std::max(drift, std::abs(rho.matrix.trace().real() - 1.0));
      min_eig = std::min(min_eig, Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd>(rho.matrix).eigenvalues().minCoeff());
    };
    propagate(eq.gibbs_state(0.11), eq, [&](double) { return rates; }, 0.1, 1000.0, opt);
    o.detail << "trace drift " << drift << ", min eigenvalue " << min_eig;
    o.require(drift < 1e-9, "trace drift < 1e-9");
    o.require(min_eig > -1e-9, "min eigenvalue > -1e-9");
  }
  // Two-level relaxation against p_e(t) = p_inf + (p_e(0) - p_inf) exp(-(down + up) t).
  {
    SystemSpec s;
    s.transmon.n_levels = 2;
    s.reset_resonator.n_levels = 1;
    s.readout_resonator.n_levels = 1;
    const MasterEquation eq(s);
    const double down = 0.03, up = 0.007;
    RateTable rates;
    rates.transitions.push_back({down, up, s.transmon.omega_ge});
    const Trajectory t = propagate(eq.transmon_level(1), eq, [&](double) { return rates; }, 0.1, 200.0);
    double worst = 0.0;
    const double p_inf = up / (down + up);
    for (std::size_t k = 0; k < t.times.size(); ++k) {
      const double exact = p_inf + (1.0 - p_inf) * std::exp(-(down + up) * t.times[k]);
      worst = std::max(worst, std::abs(t.populations[k](1) - exact));
    }
    o.detail << ", two-level error " << worst;
    o.require(worst < 1e-6, "two-level closed form within 1e-6");
  }
  // Steady state at a heating bias against the Gibbs state at the effective temperature.
  {
    const SystemSpec s;
    const MasterEquation eq(s);
    double worst = 1.0;
    for (double v : {0.0, 0.3, 0.6, 1.2}) {
      const RateTable rates = transition_rates(s, JunctionSpec{}, CouplingSpec{}, v);
      const double t_eff = effective_temperature(rates.transitions.front()).kelvin;
      worst = std::min(worst, fidelity(steady_state(eq, rates).state, eq.gibbs_state(t_eff)));
    }
    o.detail << ", worst steady-state fidelity " << worst;
    o.require(worst > 0.99, "steady-state fidelity > 0.99");
  }
  return o;
}

Outcome saturation_fit() {
  Outcome o;
  std::vector<double> t, y;
  const double t0 = 0.110, a = 0.36, tau = 109.0;
  for (int i = 0; i <= 10; ++i) {
    t.push_back(20.0 * i);
    y.push_back(t0 + a * (1.0 - std::exp(-t.back() / tau)));
  }
  const SaturationFit fit = fit_saturation(t, y);
  o.detail << "t0 " << fit.t0 << ", a " << fit.a << ", tau " << fit.tau;
  o.require(std::abs(fit.t0 - t0) <= 0.01 * t0, "t0 within 1%");
  o.require(std::abs(fit.a - a) <= 0.01 * a, "a within 1%");
  o.require(std::abs(fit.tau - tau) <= 0.01 * tau, "tau within 1%");
  return o;
}

Outcome calibrated_heating() {
  Outcome o;
  ExperimentConfig config = preset("fig4a");
  CouplingSpec start;
  start.kappa_eff = 1.0;
  config.coupling.kappa_eff = calibrate_kappa(config.system, config.junction, start);

  const MasterEquation eq(config.system);
  const Trajectory run = evolve(eq.gibbs_state(0.11), config.system, config.junction, config.coupling,
                                BiasPulse{}, 0.1, 100.0);
  const double temp = run.temperatures.back().value_or(std::nan(""));
  const double pg = normalize_head(run.populations.back())(0);
  o.detail << "kappa_eff " << config.coupling.kappa_eff << ", T " << temp << " K, p_g " << pg;
  o.require(std::abs(temp - 0.47) <= 0.05, "T within 0.47 +- 0.05 K");
  o.require(std::abs(pg - 0.42) <= 0.04, "p_g within 0.42 +- 0.04");

  const auto rows = run_thermo(run_sweep(config), config.system.transmon);
  std::vector<std::pair<double, double>> points;
  bool monotone = true;
  double previous = -1.0;
  for (const auto& r : rows) {
    if (r.v_mv <= config.junction.delta) continue;
    const double t = r.fit.temperature.value_or(std::nan(""));
    monotone = monotone && t > previous;
    previous = t;
    points.emplace_back(r.v_mv, t);
  }
  const double slope = heating_slope(points, config.junction.delta);
  o.detail << ", slope " << slope << " K/mV over " << points.size() << " points";
  o.require(monotone, "T(V) increasing above the gap");
  o.require(slope >= 0.18 && slope <= 0.72, "slope within a factor of 2 of 0.36 K/mV");
  return o;
}

Outcome otto() {
  Outcome o;
  double worst_residual = 0.0, worst_margin = -1.0;
  int engines = 0;
  for (double v_hot : {0.3, 0.6, 1.2}) {
    for (double v_cold : {0.0, 0.1, 0.2}) {
      OttoSpec spec;
      spec.v_hot = v_hot;
      spec.v_cold = v_cold;
      const OttoResult r = run_cycle(spec, SystemSpec{}, JunctionSpec{}, CouplingSpec{});
      for (const auto& c : r.cycles) {
        worst_residual = std::max(worst_residual, c.first_law_residual);
        if (c.work > 0.0) {
          ++engines;
          worst_margin = std::max(worst_margin, c.efficiency - r.carnot_efficiency);
        }
      }
    }
  }
  o.detail << "first-law residual " << worst_residual << ", engine cycles " << engines
           << ", max eta - eta_c " << worst_margin;
  o.require(worst_residual <= 1e-8, "first law closes to 1e-8");
  o.require(engines > 0, "some grid point runs as an engine");
  o.require(worst_margin <= 1e-9, "eta <= 1 - T_c/T_h");

  SystemSpec two;
  two.transmon.n_levels = 2;
  two.reset_resonator.n_levels = 1;
  two.readout_resonator.n_levels = 1;
  OttoSpec spec;
  // 25 relaxation times of the slower (cold, sub-gap) bath.
  double slowest = 0.0;
  for (auto [omega, v] : {std::pair{spec.omega_max, spec.v_hot}, std::pair{spec.omega_min, spec.v_cold}}) {
    SystemSpec s = two;
    s.transmon.omega_ge = omega;
    const RatePair r = transition_rates(s, JunctionSpec{}, CouplingSpec{}, v).transitions.front();
    slowest = std::max(slowest, 1.0 / (r.gamma_down + r.gamma_up));
  }
  spec.t_isochore = 100.0 * std::ceil(25.0 * slowest / 100.0);
  spec.n_cycles = 4;
  OttoOptions options;
  options.dt = 10.0;
  const OttoResult r = run_cycle(spec, two, JunctionSpec{}, CouplingSpec{}, options);
  const double eta = r.last().efficiency;
  o.detail << ", two-level eta " << eta << " vs eta_f " << r.frequency_efficiency;
  o.require(r.last().work > 0.0 && std::abs(eta - r.frequency_efficiency) <= 0.01 * r.frequency_efficiency,
            "two-level eta within 1% of 1 - omega_min/omega_max");
  return o;
}

Outcome determinism() {
  Outcome o;
  const fs::path root = fs::temp_directory_path() / "qcrsim_acceptance";
  fs::remove_all(root);
  const fs::path a = root / "a", b = root / "b";
  if (!g_cli.empty()) {
    for (const auto& dir : {a, b}) {
      const std::string cmd = "\"" + g_cli + "\" pipeline fig4a --seed 42 --out \"" + dir.string() + "\" > /dev/null 2>&1";
      o.require(std::system(cmd.c_str()) == 0, "pipeline command succeeds");
    }
  } else {
    for (const auto& dir : {a, b}) {
      ExperimentConfig c = preset("fig4a");
      c.seed = 42;
      c.output_dir = dir.string();
      run_pipeline(c);
    }
  }
  int compared = 0;
  for (const auto& entry : fs::directory_iterator(a)) {
    if (entry.path().extension() != ".csv") continue;
    const fs::path other = b / entry.path().filename();
    o.require(fs::exists(other) && read_file(entry.path().string()) == read_file(other.string()),
              entry.path().filename().string() + " identical");
    ++compared;
  }
  o.detail << compared << " CSV files compared" << (g_cli.empty() ? " (library)" : " (command line)");
  o.require(compared >= 5, "all pipeline CSVs present");
  fs::remove_all(root);
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc > 1) g_cli = argv[1];
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"idle Gibbs ground population", idle_gibbs},
      {"hot Gibbs ground population", hot_gibbs},
      {"one-sigma fraction", one_sigma},
      {"readout round trip", readout_round_trip},
      {"Lindblad correctness", lindblad},
      {"saturation fit round trip", saturation_fit},
      {"calibrated end-to-end heating", calibrated_heating},
      {"Otto thermodynamics", otto},
      {"determinism", determinism},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    Outcome outcome;
    try {
      outcome = criteria[i].second();
    } catch (const std::exception& e) {
      outcome.pass = false;
      outcome.detail << "exception: " << e.what();
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    failed += !outcome.pass;
    std::cout << (outcome.pass ? "PASS" : "FAIL") << " " << i + 1 << " " << criteria[i].first << ": "
              << outcome.detail.str() << " (" << std::fixed << std::setprecision(2) << seconds << " s)"
              << std::defaultfloat << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
