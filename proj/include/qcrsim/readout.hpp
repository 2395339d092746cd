#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

namespace qcrsim {

// One single-shot IQ point. `label` is the prepared (calibration) or sampled
// state, -1 when unknown.
struct IQShot {
  double i = 0.0;
  double q = 0.0;
  int label = -1;
};

struct Gaussian2 {
  Eigen::Vector2d mean = Eigen::Vector2d::Zero();
  Eigen::Matrix2d covariance = Eigen::Matrix2d::Identity();

  // Squared Mahalanobis distance of `x`.
  double mahalanobis2(const Eigen::Vector2d& x) const;
};

inline constexpr int kReadoutStates = 4;  // g, e, f, h-and-above

// Forward model of the dispersive readout: one Gaussian cloud per state.
struct ReadoutModel {
  std::array<Gaussian2, kReadoutStates> states;

  // Means on a circle at 90 degree spacing with adjacent means
  // `separation` sigma apart; isotropic covariance sigma^2, the h cloud
  // inflated by `h_inflation`.
  static ReadoutModel circle(double separation = 3.0, double sigma = 1.0, double h_inflation = 2.0);
  void validate() const;
};

// Draws a state from `populations`, then a point from that state's cloud.
std::vector<IQShot> synthesize_shots(const Eigen::Vector4d& populations, const ReadoutModel& model,
                                     int n, std::uint64_t seed);

// `n_per_state` labelled shots from each prepared state.
std::vector<IQShot> synthesize_calibration(const ReadoutModel& model, int n_per_state, std::uint64_t seed);

// Probability mass of a 2D Gaussian inside Mahalanobis radius m:
// Q(1, 0, m^2 / 2) = 1 - exp(-m^2 / 2).
double fraction_within_sigma(double m);

struct GmmModel {
  std::vector<double> weights;
  std::vector<Gaussian2> components;
  double log_likelihood = 0.0;
  std::vector<double> log_likelihood_history;  // one entry per EM iteration
  int iterations = 0;
  bool converged = false;
  // Calibration state per component; components are stored in label order
  // when a reference was available, so labels[i] == i.
  std::vector<int> labels;

  int size() const { return static_cast<int>(components.size()); }
};

struct GmmOptions {
  int max_iterations = 500;
  double tolerance = 1e-8;  // relative log-likelihood change
};

// Per-label sample mean and covariance of a labelled calibration set.
std::vector<Gaussian2> calibration_components(const std::vector<IQShot>& shots, int k);

// EM fit of a k-component mixture. `init` seeds the components (and serves
// as the label reference); when empty, fully labelled shots seed from their
// per-label moments, otherwise k-means++ seeding draws from `seed`.
GmmModel fit_gmm(const std::vector<IQShot>& shots, int k, const std::vector<Gaussian2>& init,
                 std::uint64_t seed, const GmmOptions& options = {});

struct PopulationEstimate {
  Eigen::Vector4d p = Eigen::Vector4d::Zero();            // corrected, normalized
  Eigen::Vector4d uncorrected = Eigen::Vector4d::Zero();  // raw counts normalized
  Eigen::Vector4d raw_counts = Eigen::Vector4d::Zero();   // shots inside each 1-sigma ellipse
  Eigen::Matrix4d correction = Eigen::Matrix4d::Zero();   // M(i, j): j-shot inside ellipse i
};

// Monte Carlo capture matrix M(i, j), the probability that a shot from
// component j lands inside component i's 1-sigma ellipse. All components
// share one stream of standard-normal draws.
Eigen::Matrix4d correction_matrix(const GmmModel& model, int samples, std::uint64_t seed);

// Populations from 1-sigma ellipse counts, p = normalize(clip(M^-1 c)).
PopulationEstimate estimate_populations(const std::vector<IQShot>& shots, const GmmModel& model,
                                        std::uint64_t seed, int mc_samples = 100000);

// Same, with a precomputed correction matrix shared across datasets.
PopulationEstimate estimate_populations(const std::vector<IQShot>& shots, const GmmModel& model,
                                        const Eigen::Matrix4d& correction);

}  // namespace qcrsim
