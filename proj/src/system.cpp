#include "qcrsim/system.hpp"

#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/KroneckerProduct>

#include "qcrsim/units.hpp"

namespace qcrsim {

void TransmonSpec::validate(int min_levels) const {
  if (!(omega_ge > 0.0)) throw ValidationError("transmon.omega_ge", "must be > 0");
  if (!(alpha < 0.0)) throw ValidationError("transmon.alpha", "must be < 0");
  if (n_levels < min_levels) {
    throw ValidationError("transmon.n_levels", "must be >= " + std::to_string(min_levels));
  }
}

void ResonatorSpec::validate() const {
  if (!(omega > 0.0)) throw ValidationError("resonator.omega", "must be > 0");
  if (!(g >= 0.0)) throw ValidationError("resonator.g", "must be >= 0");
  if (n_levels < 1) throw ValidationError("resonator.n_levels", "must be >= 1");
}

void SystemSpec::validate() const {
  transmon.validate();
  try {
    reset_resonator.validate();
  } catch (const ValidationError& e) {
    throw ValidationError("reset_" + e.field(), e.what());
  }
  try {
    readout_resonator.validate();
  } catch (const ValidationError& e) {
    throw ValidationError("readout_" + e.field(), e.what());
  }
  const long long dim = static_cast<long long>(transmon.n_levels) *
                        reset_resonator.n_levels * readout_resonator.n_levels;
  if (dim < 2) throw ValidationError("system.dimension", "must be >= 2");
  if (dim > max_dimension) {
    throw ValidationError("system.dimension",
                          std::to_string(dim) + " exceeds cap " + std::to_string(max_dimension));
  }
}

int SystemSpec::dimension() const {
  return transmon.n_levels * reset_resonator.n_levels * readout_resonator.n_levels;
}

bool SystemSpec::dispersive() const {
  auto ok = [&](const ResonatorSpec& r) {
    return std::abs(r.g) < 0.1 * std::abs(r.omega - transmon.omega_ge);
  };
  return ok(reset_resonator) && ok(readout_resonator);
}

BareState bare_state(const SystemSpec& spec, int index) {
  const int n1 = spec.reset_resonator.n_levels;
  const int n2 = spec.readout_resonator.n_levels;
  return {index / (n1 * n2), (index / n2) % n1, index % n2};
}

int bare_index(const SystemSpec& spec, const BareState& s) {
  return (s.transmon * spec.reset_resonator.n_levels + s.reset) *
             spec.readout_resonator.n_levels +
         s.readout;
}

int Spectrum::dressed_index(int bare) const {
  for (std::size_t i = 0; i < bare_labels.size(); ++i) {
    if (bare_labels[i] == bare) return static_cast<int>(i);
  }
  return -1;
}

std::vector<double> transmon_energies(const TransmonSpec& spec) {
  std::vector<double> e(static_cast<std::size_t>(spec.n_levels));
  for (int n = 0; n < spec.n_levels; ++n) {
    e[n] = n * spec.omega_ge + 0.5 * spec.alpha * n * (n - 1);
  }
  return e;
}

std::vector<double> ladder_elements(const TransmonSpec& spec) {
  std::vector<double> out;
  for (int n = 0; n + 1 < spec.n_levels; ++n) out.push_back(std::sqrt(n + 1.0));
  return out;
}

Eigen::MatrixXd annihilation(int n_levels) {
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n_levels, n_levels);
  for (int n = 0; n + 1 < n_levels; ++n) a(n, n + 1) = std::sqrt(n + 1.0);
  return a;
}

namespace {

struct Operators {
  Eigen::MatrixXd b, a1, a2;
};

Operators full_space_operators(const SystemSpec& spec) {
  const int nt = spec.transmon.n_levels;
  const int n1 = spec.reset_resonator.n_levels;
  const int n2 = spec.readout_resonator.n_levels;
  const Eigen::MatrixXd it = Eigen::MatrixXd::Identity(nt, nt);
  const Eigen::MatrixXd i1 = Eigen::MatrixXd::Identity(n1, n1);
  const Eigen::MatrixXd i2 = Eigen::MatrixXd::Identity(n2, n2);
  Operators ops;
  ops.b = Eigen::kroneckerProduct(annihilation(nt), Eigen::MatrixXd(Eigen::kroneckerProduct(i1, i2)));
  ops.a1 = Eigen::kroneckerProduct(it, Eigen::MatrixXd(Eigen::kroneckerProduct(annihilation(n1), i2)));
  ops.a2 = Eigen::kroneckerProduct(it, Eigen::MatrixXd(Eigen::kroneckerProduct(i1, annihilation(n2))));
  return ops;
}

}  // namespace

MatrixXc build_hamiltonian(const SystemSpec& spec) {
  spec.validate();
  const Operators ops = full_space_operators(spec);
  const auto& b = ops.b;
  const auto& a1 = ops.a1;
  const auto& a2 = ops.a2;
  const double g1 = spec.reset_resonator.g;
  const double g2 = spec.readout_resonator.g;

  Eigen::MatrixXd h = spec.transmon.omega_ge * b.transpose() * b +
                      0.5 * spec.transmon.alpha * b.transpose() * b.transpose() * b * b +
                      spec.reset_resonator.omega * a1.transpose() * a1 +
                      spec.readout_resonator.omega * a2.transpose() * a2 +
                      g1 * (b.transpose() * a1 + b * a1.transpose()) +
                      g2 * (b.transpose() * a2 + b * a2.transpose());
  return h.cast<std::complex<double>>();
}

Eigen::MatrixXd excitation_number(const SystemSpec& spec) {
  const Operators ops = full_space_operators(spec);
  return ops.b.transpose() * ops.b + ops.a1.transpose() * ops.a1 + ops.a2.transpose() * ops.a2;
}

MatrixXc lift_transmon_operator(const SystemSpec& spec, const MatrixXc& op) {
  const int nr = spec.reset_resonator.n_levels * spec.readout_resonator.n_levels;
  return Eigen::kroneckerProduct(op, MatrixXc::Identity(nr, nr));
}

Spectrum diagonalize(const SystemSpec& spec) {
  const MatrixXc h = build_hamiltonian(spec);
  Eigen::SelfAdjointEigenSolver<MatrixXc> solver(h);
  if (solver.info() != Eigen::Success) throw NumericError("Hamiltonian diagonalization failed");

  Spectrum s;
  s.energies = solver.eigenvalues().array() - solver.eigenvalues()(0);
  s.eigenvectors = solver.eigenvectors();
  const int dim = static_cast<int>(h.rows());
  s.bare_labels.resize(dim);
  s.transmon_labels.resize(dim);
  for (int j = 0; j < dim; ++j) {
    // maxCoeff returns the first maximum, i.e. ties go to the lowest bare index
    Eigen::Index best = 0;
    s.eigenvectors.col(j).cwiseAbs2().maxCoeff(&best);
    s.bare_labels[j] = static_cast<int>(best);
    s.transmon_labels[j] = bare_state(spec, static_cast<int>(best)).transmon;
  }
  return s;
}

}  // namespace qcrsim
