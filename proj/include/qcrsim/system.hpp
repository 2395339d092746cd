#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

namespace qcrsim {

using MatrixXc = Eigen::MatrixXcd;
using VectorXc = Eigen::VectorXcd;

struct TransmonSpec {
  double omega_ge = 4.09;  // GHz
  double alpha = -0.273;   // GHz, negative
  int n_levels = 6;

  // Throws ValidationError. `min_levels` lets callers demand the 4 measured
  // states (readout) or the 6-level Gibbs truncation (thermometry).
  void validate(int min_levels = 2) const;
};

struct ResonatorSpec {
  double omega = 4.67;  // GHz
  double g = 0.0596;    // GHz
  int n_levels = 4;

  void validate() const;
};

struct SystemSpec {
  TransmonSpec transmon{};
  ResonatorSpec reset_resonator{4.67, 0.0596, 4};
  ResonatorSpec readout_resonator{7.44, 0.0704, 4};
  // Upper bound on the tensor-product dimension.
  int max_dimension = 4096;

  void validate() const;
  int dimension() const;
  // True when |g| < 0.1 |omega - omega_ge| for both resonators.
  bool dispersive() const;
};

// Bare basis index -> (transmon, reset, readout) occupation. The transmon is
// the slowest index: i = (n * n1 + k) * n2 + l.
struct BareState {
  int transmon = 0;
  int reset = 0;
  int readout = 0;
};

BareState bare_state(const SystemSpec& spec, int index);
int bare_index(const SystemSpec& spec, const BareState& state);

struct Spectrum {
  Eigen::VectorXd energies;  // GHz, ascending, ground at 0
  MatrixXc eigenvectors;     // columns in the bare product basis
  // Bare basis index with the largest overlap, per dressed state.
  std::vector<int> bare_labels;
  // Transmon occupation of that bare state, per dressed state.
  std::vector<int> transmon_labels;
  // Dressed index whose bare label is `bare_index`, or -1.
  int dressed_index(int bare_index) const;
};

// E_n = n omega_ge + (alpha / 2) n (n - 1), n < n_levels.
std::vector<double> transmon_energies(const TransmonSpec& spec);

// |<n| b + b^dag |n+1>| = sqrt(n + 1).
std::vector<double> ladder_elements(const TransmonSpec& spec);

// Annihilation operator truncated to `n_levels`.
Eigen::MatrixXd annihilation(int n_levels);

// Kerr transmon with two resonators, excitation-conserving couplings.
MatrixXc build_hamiltonian(const SystemSpec& spec);

// Total excitation number b^dag b + a1^dag a1 + a2^dag a2 in the bare basis.
Eigen::MatrixXd excitation_number(const SystemSpec& spec);

// Lifts a transmon-space operator into the full product space.
MatrixXc lift_transmon_operator(const SystemSpec& spec, const MatrixXc& op);

Spectrum diagonalize(const SystemSpec& spec);

}  // namespace qcrsim
