#pragma once

#include <functional>
#include <map>
#include <optional>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include "qcrsim/qcr.hpp"
#include "qcrsim/system.hpp"

namespace qcrsim {

using SparseMatrixXc = Eigen::SparseMatrix<std::complex<double>>;

// Unit-trace positive Hermitian matrix.
struct DensityMatrix {
  MatrixXc matrix;

  int dimension() const { return static_cast<int>(matrix.rows()); }
  std::complex<double> trace() const { return matrix.trace(); }
  double min_eigenvalue() const;
  double hermiticity_residual() const;
  // Throws ValidationError unless Hermitian (1e-10), unit trace (1e-9) and
  // positive (-1e-9).
  void validate() const;
};

// Uhlmann fidelity (Tr sqrt(sqrt(rho) sigma sqrt(rho)))^2.
double fidelity(const DensityMatrix& rho, const DensityMatrix& sigma);
double trace_distance(const DensityMatrix& rho, const DensityMatrix& sigma);

struct BiasPulse {
  double dc_offset = 0.0;  // mV
  double amplitude = 1.2;  // mV
  double duration = 100.0; // ns
  double period = 10.0;    // ns, 100 MHz fundamental
  double rise_time = 0.0;  // ns, linear edges centred on each sign change

  void validate() const;
};

// dc_offset + amplitude * square(t) on [0, duration), 0 elsewhere. The first
// half-period is positive.
double pulse_voltage(const BiasPulse& pulse, double t_ns);

enum class DissipationModel {
  // Transmon ladder only, resonators folded into the rate prefactors.
  kTransmon,
  // Full transmon x reset x readout space with transmon-ladder jumps.
  kExtended,
};

// Vectorized Lindblad generator
//   d rho / dt = -2 pi i [H, rho] + sum_m gd(m) D[|m><m+1|] + gu(m) D[|m+1><m|]
// written in the frame rotating with a diagonal H0 that commutes with H and
// shifts every jump by a fixed frequency, so the frame generator is
// time-independent at fixed rates.
class MasterEquation {
 public:
  MasterEquation(const SystemSpec& system, DissipationModel model = DissipationModel::kTransmon);

  int dimension() const { return dimension_; }
  int transmon_levels() const { return system_.transmon.n_levels; }
  const SystemSpec& system() const { return system_; }
  DissipationModel model() const { return model_; }

  // Lab-frame Hamiltonian (GHz) and the frame Hamiltonian H - H0.
  const MatrixXc& hamiltonian() const { return hamiltonian_; }
  const MatrixXc& frame_hamiltonian() const { return frame_hamiltonian_; }
  // Diagonal of H0 (GHz).
  const Eigen::VectorXd& frame_frequencies() const { return frame_frequencies_; }

  // Full frame generator and its dissipative part alone.
  SparseMatrixXc generator(const RateTable& rates) const;
  SparseMatrixXc dissipator(const RateTable& rates) const;
  // exp(h C) for the coherent frame superoperator C = -2 pi i [H - H0, .],
  // applied exactly as U rho U^dag with U = exp(-2 pi i (H - H0) h).
  SparseMatrixXc frame_propagator(double h) const;

  // Transmon populations (partial trace over the resonators).
  Eigen::VectorXd transmon_populations(const DensityMatrix& rho) const;
  double energy(const DensityMatrix& rho) const;  // GHz, Tr(rho H)

  DensityMatrix gibbs_state(double t_kelvin) const;
  DensityMatrix transmon_level(int n) const;

  // Frame change rho_lab = U0 rho_frame U0^dag, U0 = exp(-2 pi i H0 t).
  DensityMatrix to_lab_frame(const DensityMatrix& rho, double t_ns) const;
  DensityMatrix to_rotating_frame(const DensityMatrix& rho, double t_ns) const;

  // Substeps that keep the coherent phase 2 pi |H - H0| dt per substep
  // below 1, so the dissipator is sampled finely against the frame rotation.
  int substeps(double dt) const;

 private:
  SystemSpec system_;
  DissipationModel model_;
  int dimension_ = 0;
  MatrixXc hamiltonian_;
  MatrixXc frame_hamiltonian_;
  Eigen::VectorXd frame_frequencies_;
  std::vector<SparseMatrixXc> lowering_;  // |m><m+1| lifted to the full space
  SparseMatrixXc coherent_;               // -2 pi i [H - H0, .]
  double frame_spread_ = 0.0;             // max - min eigenvalue of H - H0
};

Eigen::VectorXcd vectorize(const MatrixXc& m);
MatrixXc unvectorize(const Eigen::VectorXcd& v, int dim);

// One classical fourth-order Runge-Kutta step of dv/dt = L v.
void rk4_step(const SparseMatrixXc& generator, Eigen::VectorXcd& v, double dt);

// One integrating-factor (Lawson) RK4 step of dv/dt = C v + D v, with the
// coherent flow exp(h C) supplied exactly as `half` = exp(h C / 2) and
// `full` = exp(h C). Fourth order; exact when D = 0.
void lawson_rk4_step(const SparseMatrixXc& dissipator, const SparseMatrixXc& half,
                     const SparseMatrixXc& full, Eigen::VectorXcd& v, double h);

struct Trajectory {
  std::vector<double> times;                        // ns
  std::vector<Eigen::VectorXd> populations;         // transmon p_n(t)
  std::vector<std::optional<double>> temperatures;  // Gibbs fit (K), when thermal
  DensityMatrix final_state;                        // lab frame
};

struct EvolveOptions {
  DissipationModel model = DissipationModel::kTransmon;
  bool fit_temperatures = true;
  bool check_positivity = true;
  // Called at every output sample with the rotating-frame state; spectrum,
  // trace and transmon populations are frame-independent.
  std::function<void(double t_ns, const DensityMatrix& rho)> observer;
};

// Rates are piecewise constant per step, evaluated at the step midpoint.
using RateProvider = std::function<RateTable(double t_ns)>;

Trajectory propagate(const DensityMatrix& rho0, const MasterEquation& equation,
                     const RateProvider& rates, double dt, double t_end,
                     const EvolveOptions& options = {});

// QCR-driven evolution under `pulse`. dt must tile the half-period.
Trajectory evolve(const DensityMatrix& rho0, const SystemSpec& system, const JunctionSpec& junction,
                  const CouplingSpec& coupling, const BiasPulse& pulse, double dt, double t_end,
                  const EvolveOptions& options = {});

struct SteadyState {
  DensityMatrix state;
  double residual = 0.0;  // ||L vec(rho)||
};

// Null vector of the generator with unit trace, refined to residual 1e-9.
SteadyState steady_state(const MasterEquation& equation, const RateTable& rates);

DensityMatrix steady_state(const SystemSpec& system, const JunctionSpec& junction,
                           const CouplingSpec& coupling, double v_mv,
                           DissipationModel model = DissipationModel::kTransmon);

// Caches rate tables by voltage for repeated evaluation along a pulse.
class RateCache {
 public:
  RateCache(SystemSpec system, JunctionSpec junction, CouplingSpec coupling);
  const RateTable& at(double v_mv);

 private:
  SystemSpec system_;
  JunctionSpec junction_;
  CouplingSpec coupling_;
  std::map<double, RateTable> cache_;
};

}  // namespace qcrsim
