#pragma once

#include <stdexcept>
#include <string>

namespace qcrsim {

// Frequencies are ordinary (not angular) in GHz, times in ns, temperatures
// in K, energies in meV, voltages in mV.

// h / k_B in K per GHz.
inline constexpr double kPlanckOverBoltzmann = 0.0479924;
// k_B in meV per K.
inline constexpr double kBoltzmannMeV = 0.0861733;
// h in meV per GHz (h * 1 GHz = 4.13567 ueV).
inline constexpr double kPlanckMeV = kPlanckOverBoltzmann * kBoltzmannMeV;
// 1 meV / (e^2 * 1 kOhm) expressed in 1/ns.
inline constexpr double kRatePerMeVkOhm = 1.0e-3 / (1.602176634e-19 * 1.0e3) * 1.0e-9;
// h * 1 GHz in aJ.
inline constexpr double kAttojoulePerGHz = 6.62607015e-34 * 1.0e9 * 1.0e18;

inline double boltzmann_exponent(double freq_ghz, double temp_k) {
  return kPlanckOverBoltzmann * freq_ghz / temp_k;
}

// Violated parameter constraint; `field` names the offending input.
class ValidationError : public std::invalid_argument {
 public:
  ValidationError(std::string field, const std::string& what)
      : std::invalid_argument(field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

// Quadrature, integrator or solver failure.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Input data does not cover the range an operation needs.
class RangeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace qcrsim
