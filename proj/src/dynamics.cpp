#include "qcrsim/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include <Eigen/Eigenvalues>
#include <Eigen/SparseLU>
#include <unsupported/Eigen/KroneckerProduct>

#include "qcrsim/thermometry.hpp"
#include "qcrsim/units.hpp"

namespace qcrsim {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr std::complex<double> kI(0.0, 1.0);

Eigen::VectorXd hermitian_eigenvalues(const MatrixXc& m) {
  const MatrixXc h = 0.5 * (m + m.adjoint());
  Eigen::SelfAdjointEigenSolver<MatrixXc> solver(h, Eigen::EigenvaluesOnly);
  return solver.eigenvalues();
}

SparseMatrixXc sparse_identity(int n) {
  SparseMatrixXc id(n, n);
  id.setIdentity();
  return id;
}

// Superoperator of D[A] rho = A rho A^dag - {A^dag A, rho} / 2 on column-major vec.
SparseMatrixXc lindblad_dissipator(const SparseMatrixXc& a) {
  const int n = static_cast<int>(a.rows());
  const SparseMatrixXc id = sparse_identity(n);
  const SparseMatrixXc ada = SparseMatrixXc(a.adjoint()) * a;
  SparseMatrixXc conj_a = a.conjugate();
  SparseMatrixXc out = Eigen::kroneckerProduct(conj_a, a);
  out -= 0.5 * SparseMatrixXc(Eigen::kroneckerProduct(id, ada));
  out -= 0.5 * SparseMatrixXc(Eigen::kroneckerProduct(SparseMatrixXc(ada.transpose()), id));
  return out;
}

}  // namespace

double DensityMatrix::min_eigenvalue() const { return hermitian_eigenvalues(matrix).minCoeff(); }

double DensityMatrix::hermiticity_residual() const {
  return (matrix - matrix.adjoint()).cwiseAbs().maxCoeff();
}

void DensityMatrix::validate() const {
  if (matrix.rows() == 0 || matrix.rows() != matrix.cols()) {
    throw ValidationError("density_matrix", "must be square and non-empty");
  }
  if (hermiticity_residual() > 1e-10) throw ValidationError("density_matrix", "not Hermitian within 1e-10");
  if (std::abs(trace() - 1.0) > 1e-9) throw ValidationError("density_matrix", "trace differs from 1 by more than 1e-9");
  if (min_eigenvalue() < -1e-9) throw ValidationError("density_matrix", "negative eigenvalue below -1e-9");
}

double fidelity(const DensityMatrix& rho, const DensityMatrix& sigma) {
  Eigen::SelfAdjointEigenSolver<MatrixXc> s(0.5 * (rho.matrix + rho.matrix.adjoint()));
  const Eigen::VectorXd root = s.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  const MatrixXc sqrt_rho = s.eigenvectors() * root.asDiagonal() * s.eigenvectors().adjoint();
  const MatrixXc inner = sqrt_rho * sigma.matrix * sqrt_rho;
  const double tr = hermitian_eigenvalues(inner).cwiseMax(0.0).cwiseSqrt().sum();
  return tr * tr;
}

double trace_distance(const DensityMatrix& rho, const DensityMatrix& sigma) {
  return 0.5 * hermitian_eigenvalues(rho.matrix - sigma.matrix).cwiseAbs().sum();
}

void BiasPulse::validate() const {
  if (!(duration >= 0.0)) throw ValidationError("pulse.duration", "must be >= 0");
  if (!(period > 0.0)) throw ValidationError("pulse.period", "must be > 0");
  if (!(rise_time >= 0.0 && rise_time <= 0.5 * period)) {
    throw ValidationError("pulse.rise_time", "must lie in [0, period / 2]");
  }
  const double cycles = duration / period;
  if (std::abs(cycles - std::round(cycles)) > 1e-9 * std::max(1.0, cycles)) {
    throw ValidationError("pulse.duration", "must be a whole number of periods for a net-zero pulse");
  }
}

double pulse_voltage(const BiasPulse& pulse, double t) {
  if (t < 0.0 || t >= pulse.duration) return 0.0;
  const double phase = std::fmod(t, pulse.period) / pulse.period;  // [0, 1)
  double square;
  if (pulse.rise_time <= 0.0) {
    square = phase < 0.5 ? 1.0 : -1.0;
  } else {
    // Triangle wave, +1 at a quarter period, clipped into a trapezoid.
    const double shifted = phase < 0.75 ? phase : phase - 1.0;
    const double triangle = 1.0 - 4.0 * std::abs(shifted - 0.25);
    square = std::clamp(triangle * 0.5 * pulse.period / pulse.rise_time, -1.0, 1.0);
  }
  return pulse.dc_offset + pulse.amplitude * square;
}

MasterEquation::MasterEquation(const SystemSpec& system, DissipationModel model)
    : system_(system), model_(model) {
  system_.transmon.validate();
  const int nt = system_.transmon.n_levels;
  const std::vector<double> ladder = transmon_energies(system_.transmon);

  if (model_ == DissipationModel::kTransmon) {
    dimension_ = nt;
    hamiltonian_ = MatrixXc::Zero(nt, nt);
    for (int n = 0; n < nt; ++n) hamiltonian_(n, n) = ladder[n];
    frame_frequencies_ = hamiltonian_.diagonal().real();
  } else {
    system_.validate();
    dimension_ = system_.dimension();
    hamiltonian_ = build_hamiltonian(system_);
    frame_frequencies_ = system_.transmon.omega_ge * excitation_number(system_).diagonal();
  }
  frame_hamiltonian_ = hamiltonian_;
  frame_hamiltonian_.diagonal() -= frame_frequencies_.cast<std::complex<double>>();
  frame_spread_ = dimension_ > 1 ? [&] {
    const Eigen::VectorXd ev = hermitian_eigenvalues(frame_hamiltonian_);
    return ev.maxCoeff() - ev.minCoeff();
  }() : 0.0;

  const SparseMatrixXc id = sparse_identity(dimension_);
  const SparseMatrixXc hf = frame_hamiltonian_.sparseView(1.0, 1e-300);
  coherent_ = -kI * kTwoPi *
              (SparseMatrixXc(Eigen::kroneckerProduct(id, hf)) -
               SparseMatrixXc(Eigen::kroneckerProduct(SparseMatrixXc(hf.transpose()), id)));

  for (int m = 0; m + 1 < nt; ++m) {
    MatrixXc jump = MatrixXc::Zero(nt, nt);
    jump(m, m + 1) = 1.0;
    if (model_ == DissipationModel::kExtended) jump = lift_transmon_operator(system_, jump);
    lowering_.push_back(jump.sparseView());
  }
}

SparseMatrixXc MasterEquation::generator(const RateTable& rates) const {
  SparseMatrixXc l = coherent_ + dissipator(rates);
  l.makeCompressed();
  return l;
}

SparseMatrixXc MasterEquation::dissipator(const RateTable& rates) const {
  if (static_cast<int>(rates.transitions.size()) != transmon_levels() - 1) {
    throw ValidationError("rates", "expected one rate pair per transmon transition");
  }
  SparseMatrixXc l(dimension_ * dimension_, dimension_ * dimension_);
  for (std::size_t m = 0; m < lowering_.size(); ++m) {
    const RatePair& r = rates.transitions[m];
    if (r.gamma_down < 0.0 || r.gamma_up < 0.0) throw ValidationError("rates", "must be >= 0");
    if (r.gamma_down > 0.0) l += r.gamma_down * lindblad_dissipator(lowering_[m]);
    if (r.gamma_up > 0.0) l += r.gamma_up * lindblad_dissipator(SparseMatrixXc(lowering_[m].adjoint()));
  }
  l.makeCompressed();
  return l;
}

SparseMatrixXc MasterEquation::frame_propagator(double h) const {
  Eigen::SelfAdjointEigenSolver<MatrixXc> solver(0.5 * (frame_hamiltonian_ + frame_hamiltonian_.adjoint()));
  const Eigen::VectorXcd phase = (-kI * kTwoPi * h * solver.eigenvalues().cast<std::complex<double>>()).array().exp();
  const MatrixXc u = solver.eigenvectors() * phase.asDiagonal() * solver.eigenvectors().adjoint();
  // H - H0 conserves excitation number, so U is block diagonal; drop the
  // rounding noise between blocks.
  const SparseMatrixXc us = u.sparseView(1.0, 1e-14);
  SparseMatrixXc out = Eigen::kroneckerProduct(SparseMatrixXc(us.conjugate()), us);
  out.makeCompressed();
  return out;
}

Eigen::VectorXd MasterEquation::transmon_populations(const DensityMatrix& rho) const {
  const int nt = transmon_levels();
  const int block = dimension_ / nt;
  Eigen::VectorXd p = Eigen::VectorXd::Zero(nt);
  for (int i = 0; i < dimension_; ++i) p(i / block) += rho.matrix(i, i).real();
  return p;
}

double MasterEquation::energy(const DensityMatrix& rho) const {
  return (rho.matrix * hamiltonian_).trace().real();
}

DensityMatrix MasterEquation::gibbs_state(double t_kelvin) const {
  if (!(t_kelvin > 0.0)) throw ValidationError("temperature", "must be > 0");
  if (model_ == DissipationModel::kTransmon) {
    const Eigen::VectorXd p = gibbs_populations(t_kelvin, system_.transmon, transmon_levels());
    return {p.cast<std::complex<double>>().asDiagonal()};
  }
  Eigen::SelfAdjointEigenSolver<MatrixXc> solver(hamiltonian_);
  const Eigen::VectorXd e = solver.eigenvalues().array() - solver.eigenvalues()(0);
  Eigen::VectorXd w = (-kPlanckOverBoltzmann / t_kelvin * e.array()).exp();
  w /= w.sum();
  MatrixXc rho = solver.eigenvectors() * w.cast<std::complex<double>>().asDiagonal() *
                 solver.eigenvectors().adjoint();
  return {0.5 * (rho + rho.adjoint())};
}

DensityMatrix MasterEquation::transmon_level(int n) const {
  if (n < 0 || n >= transmon_levels()) throw ValidationError("level", "outside the transmon truncation");
  const int index = model_ == DissipationModel::kTransmon ? n : bare_index(system_, {n, 0, 0});
  MatrixXc rho = MatrixXc::Zero(dimension_, dimension_);
  rho(index, index) = 1.0;
  return {rho};
}

DensityMatrix MasterEquation::to_lab_frame(const DensityMatrix& rho, double t) const {
  const Eigen::VectorXcd phase =
      (-kI * kTwoPi * t * frame_frequencies_.cast<std::complex<double>>()).array().exp();
  return {phase.asDiagonal() * rho.matrix * phase.conjugate().asDiagonal()};
}

DensityMatrix MasterEquation::to_rotating_frame(const DensityMatrix& rho, double t) const {
  return to_lab_frame(rho, -t);
}

int MasterEquation::substeps(double dt) const {
  return std::max(1, static_cast<int>(std::ceil(kTwoPi * frame_spread_ * dt)));
}

Eigen::VectorXcd vectorize(const MatrixXc& m) {
  return Eigen::Map<const Eigen::VectorXcd>(m.data(), m.size());
}

MatrixXc unvectorize(const Eigen::VectorXcd& v, int dim) {
  return Eigen::Map<const MatrixXc>(v.data(), dim, dim);
}

void rk4_step(const SparseMatrixXc& l, Eigen::VectorXcd& v, double dt) {
  const Eigen::VectorXcd k1 = l * v;
  const Eigen::VectorXcd k2 = l * (v + 0.5 * dt * k1);
  const Eigen::VectorXcd k3 = l * (v + 0.5 * dt * k2);
  const Eigen::VectorXcd k4 = l * (v + dt * k3);
  v += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

void lawson_rk4_step(const SparseMatrixXc& d, const SparseMatrixXc& half, const SparseMatrixXc& full,
                     Eigen::VectorXcd& v, double h) {
  const Eigen::VectorXcd k1 = d * v;
  const Eigen::VectorXcd k2 = d * (half * (v + 0.5 * h * k1));
  const Eigen::VectorXcd half_v = half * v;
  const Eigen::VectorXcd k3 = d * (half_v + 0.5 * h * k2);
  const Eigen::VectorXcd full_v = full * v;
  const Eigen::VectorXcd k4 = d * (full_v + h * (half * k3));
  v = full_v + (h / 6.0) * (full * k1 + 2.0 * (half * (k2 + k3)) + k4);
}

Trajectory propagate(const DensityMatrix& rho0, const MasterEquation& equation,
                     const RateProvider& rates, double dt, double t_end,
                     const EvolveOptions& options) {
  if (!(dt > 0.0)) throw ValidationError("dt", "must be > 0");
  if (!(t_end >= 0.0)) throw ValidationError("t_end", "must be >= 0");
  const long steps = std::lround(t_end / dt);
  if (std::abs(steps * dt - t_end) > 1e-9 * std::max(1.0, t_end)) {
    throw ValidationError("dt", "must divide t_end");
  }
  if (rho0.dimension() != equation.dimension()) {
    throw ValidationError("rho0", "dimension does not match the master equation");
  }
  rho0.validate();

  const int dim = equation.dimension();
  const int sub = equation.substeps(dt);
  const bool fit = options.fit_temperatures && equation.transmon_levels() >= kMeasuredStates;

  const double h = dt / sub;
  const SparseMatrixXc half = equation.frame_propagator(0.5 * h);
  const SparseMatrixXc full = equation.frame_propagator(h);

  Trajectory traj;
  Eigen::VectorXcd v = vectorize(rho0.matrix);
  auto record = [&](double t, long step) {
    const DensityMatrix rho{unvectorize(v, dim)};
    const double drift = std::abs(rho.trace() - 1.0);
    if (drift > 1e-6) {
      throw NumericError("trace drift " + std::to_string(drift) + " at step " + std::to_string(step) +
                         " (t = " + std::to_string(t) + " ns)");
    }
    if (options.check_positivity) {
      const double lowest = rho.min_eigenvalue();
      if (lowest < -1e-6) {
        throw NumericError("negative eigenvalue " + std::to_string(lowest) + " at step " +
                           std::to_string(step) + " (t = " + std::to_string(t) + " ns)");
      }
    }
    if (options.observer) options.observer(t, rho);
    traj.times.push_back(t);
    Eigen::VectorXd p = equation.transmon_populations(rho);
    if (fit) {
      const GibbsFit g = fit_gibbs(normalize_head(p.cwiseMax(0.0)), equation.system().transmon);
      traj.temperatures.push_back(g.temperature);
    } else {
      traj.temperatures.emplace_back();
    }
    traj.populations.push_back(std::move(p));
  };

  std::map<std::vector<double>, SparseMatrixXc> generators;
  record(0.0, 0);
  for (long k = 0; k < steps; ++k) {
    const RateTable table = rates((k + 0.5) * dt);
    std::vector<double> key;
    for (const RatePair& r : table.transitions) {
      key.push_back(r.gamma_down);
      key.push_back(r.gamma_up);
    }
    auto it = generators.find(key);
    if (it == generators.end()) it = generators.emplace(key, equation.dissipator(table)).first;
    for (int s = 0; s < sub; ++s) lawson_rk4_step(it->second, half, full, v, h);
    record((k + 1) * dt, k + 1);
  }
  traj.final_state = equation.to_lab_frame(DensityMatrix{unvectorize(v, dim)}, steps * dt);
  return traj;
}

RateCache::RateCache(SystemSpec system, JunctionSpec junction, CouplingSpec coupling)
    : system_(std::move(system)), junction_(junction), coupling_(coupling) {}

const RateTable& RateCache::at(double v_mv) {
  auto it = cache_.find(v_mv);
  if (it == cache_.end()) {
    it = cache_.emplace(v_mv, transition_rates(system_, junction_, coupling_, v_mv)).first;
  }
  return it->second;
}

Trajectory evolve(const DensityMatrix& rho0, const SystemSpec& system, const JunctionSpec& junction,
                  const CouplingSpec& coupling, const BiasPulse& pulse, double dt, double t_end,
                  const EvolveOptions& options) {
  pulse.validate();
  junction.validate();
  coupling.validate();
  const double per_half = 0.5 * pulse.period / dt;
  if (std::abs(per_half - std::round(per_half)) > 1e-9 * per_half || std::round(per_half) < 1.0) {
    throw ValidationError("dt", "must tile the pulse half-period");
  }
  const MasterEquation equation(system, options.model);
  RateCache cache(system, junction, coupling);
  const RateProvider provider = [&](double t) { return cache.at(pulse_voltage(pulse, t)); };
  return propagate(rho0, equation, provider, dt, t_end, options);
}

SteadyState steady_state(const MasterEquation& equation, const RateTable& rates) {
  const bool any_rate = std::any_of(rates.transitions.begin(), rates.transitions.end(),
                                    [](const RatePair& r) { return r.gamma_down > 0.0 || r.gamma_up > 0.0; });
  if (!any_rate) throw NumericError("all rates vanish; the generator has no unique fixed point");

  const int dim = equation.dimension();
  const int n = dim * dim;
  const SparseMatrixXc l = equation.generator(rates);

  // Replace the first equation with the trace constraint.
  std::vector<Eigen::Triplet<std::complex<double>>> triplets;
  for (int col = 0; col < l.outerSize(); ++col) {
    for (SparseMatrixXc::InnerIterator it(l, col); it; ++it) {
      if (it.row() != 0) triplets.emplace_back(static_cast<int>(it.row()), col, it.value());
    }
  }
  for (int i = 0; i < dim; ++i) triplets.emplace_back(0, i * dim + i, 1.0);
  SparseMatrixXc a(n, n);
  a.setFromTriplets(triplets.begin(), triplets.end());
  a.makeCompressed();

  Eigen::SparseLU<SparseMatrixXc> lu;
  lu.compute(a);
  if (lu.info() != Eigen::Success) throw NumericError("steady-state system is singular");
  Eigen::VectorXcd b = Eigen::VectorXcd::Zero(n);
  b(0) = 1.0;
  Eigen::VectorXcd x = lu.solve(b);
  for (int iter = 0; iter < 5; ++iter) {
    const Eigen::VectorXcd r = b - a * x;
    if ((l * x).norm() < 1e-12) break;
    x += lu.solve(r);
  }

  MatrixXc rho = unvectorize(x, dim);
  rho = 0.5 * (rho + rho.adjoint());
  rho /= rho.trace();
  SteadyState out{{rho}, (l * vectorize(rho)).norm()};
  if (!(out.residual < 1e-9)) {
    throw NumericError("steady-state residual " + std::to_string(out.residual) + " above 1e-9");
  }
  return out;
}

DensityMatrix steady_state(const SystemSpec& system, const JunctionSpec& junction,
                           const CouplingSpec& coupling, double v_mv, DissipationModel model) {
  const MasterEquation equation(system, model);
  return steady_state(equation, transition_rates(system, junction, coupling, v_mv)).state;
}

}  // namespace qcrsim
