#include "qcrsim/readout.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <string>

#include "qcrsim/random.hpp"
#include "qcrsim/units.hpp"

namespace qcrsim {

double Gaussian2::mahalanobis2(const Eigen::Vector2d& x) const {
  const Eigen::Vector2d d = x - mean;
  return d.dot(covariance.ldlt().solve(d));
}

namespace {

Eigen::Matrix2d cholesky_factor(const Eigen::Matrix2d& cov, const std::string& field) {
  Eigen::LLT<Eigen::Matrix2d> llt(cov);
  if (llt.info() != Eigen::Success || (cov - cov.transpose()).cwiseAbs().maxCoeff() > 1e-12 * cov.norm()) {
    throw ValidationError(field, "covariance is not symmetric positive definite");
  }
  return llt.matrixL();
}

Eigen::Vector2d as_vector(const IQShot& s) { return {s.i, s.q}; }

}  // namespace

ReadoutModel ReadoutModel::circle(double separation, double sigma, double h_inflation) {
  ReadoutModel m;
  const double radius = separation * sigma / std::numbers::sqrt2;
  for (int s = 0; s < kReadoutStates; ++s) {
    const double angle = 0.5 * std::numbers::pi * s;
    m.states[s].mean = radius * Eigen::Vector2d(std::cos(angle), std::sin(angle));
    m.states[s].covariance = sigma * sigma * Eigen::Matrix2d::Identity();
  }
  m.states[3].covariance *= h_inflation;
  return m;
}

void ReadoutModel::validate() const {
  for (int s = 0; s < kReadoutStates; ++s) {
    cholesky_factor(states[s].covariance, "readout.state" + std::to_string(s));
  }
}

std::vector<IQShot> synthesize_shots(const Eigen::Vector4d& populations, const ReadoutModel& model,
                                     int n, std::uint64_t seed) {
  if (n < 0) throw ValidationError("shots", "count must be >= 0");
  if ((populations.array() < 0.0).any() || std::abs(populations.sum() - 1.0) > 1e-9) {
    throw ValidationError("populations", "must be non-negative and sum to 1");
  }
  std::array<Eigen::Matrix2d, kReadoutStates> factors;
  for (int s = 0; s < kReadoutStates; ++s) {
    factors[s] = cholesky_factor(model.states[s].covariance, "readout.state" + std::to_string(s));
  }
  Rng rng(seed);
  std::discrete_distribution<int> pick(populations.data(), populations.data() + kReadoutStates);
  std::normal_distribution<double> normal;
  std::vector<IQShot> shots;
  shots.reserve(n);
  for (int k = 0; k < n; ++k) {
    const int s = pick(rng);
    const double z0 = normal(rng);
    const double z1 = normal(rng);
    const Eigen::Vector2d x = model.states[s].mean + factors[s] * Eigen::Vector2d(z0, z1);
    shots.push_back({x(0), x(1), s});
  }
  return shots;
}

std::vector<IQShot> synthesize_calibration(const ReadoutModel& model, int n_per_state, std::uint64_t seed) {
  std::vector<IQShot> all;
  for (int s = 0; s < kReadoutStates; ++s) {
    Eigen::Vector4d prepared = Eigen::Vector4d::Zero();
    prepared(s) = 1.0;
    const auto shots = synthesize_shots(prepared, model, n_per_state, derive_seed(seed, "calibration", s));
    all.insert(all.end(), shots.begin(), shots.end());
  }
  return all;
}

double fraction_within_sigma(double m) {
  if (!(m >= 0.0)) throw ValidationError("mahalanobis_radius", "must be >= 0");
  return -std::expm1(-0.5 * m * m);
}

namespace {

constexpr double kLog2Pi = 1.8378770664093453;

struct Moments {
  Eigen::Vector2d mean = Eigen::Vector2d::Zero();
  Eigen::Matrix2d covariance = Eigen::Matrix2d::Zero();
};

Moments sample_moments(const std::vector<Eigen::Vector2d>& xs) {
  Moments m;
  for (const auto& x : xs) m.mean += x;
  m.mean /= static_cast<double>(xs.size());
  for (const auto& x : xs) m.covariance += (x - m.mean) * (x - m.mean).transpose();
  m.covariance /= static_cast<double>(xs.size());
  m.covariance = 0.5 * (m.covariance + m.covariance.transpose()).eval();
  return m;
}

double log_density(const Gaussian2& g, double log_det, const Eigen::Matrix2d& inverse,
                   const Eigen::Vector2d& x) {
  const Eigen::Vector2d d = x - g.mean;
  return -kLog2Pi - 0.5 * log_det - 0.5 * d.dot(inverse * d);
}

// Permutation of components minimizing total squared distance to `reference`.
std::vector<int> match_to_reference(const std::vector<Gaussian2>& components,
                                    const std::vector<Eigen::Vector2d>& reference) {
  const int k = static_cast<int>(components.size());
  std::vector<int> perm(k);  // perm[label] = component
  std::iota(perm.begin(), perm.end(), 0);
  if (k <= 8) {
    std::vector<int> best = perm;
    double best_cost = std::numeric_limits<double>::infinity();
    do {
      double cost = 0.0;
      for (int l = 0; l < k; ++l) cost += (components[perm[l]].mean - reference[l]).squaredNorm();
      if (cost < best_cost) {
        best_cost = cost;
        best = perm;
      }
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
  }
  std::vector<bool> used(k, false);
  for (int l = 0; l < k; ++l) {
    int pick = -1;
    for (int c = 0; c < k; ++c) {
      if (!used[c] && (pick < 0 || (components[c].mean - reference[l]).squaredNorm() <
                                       (components[pick].mean - reference[l]).squaredNorm())) {
        pick = c;
      }
    }
    used[pick] = true;
    perm[l] = pick;
  }
  return perm;
}

std::vector<Gaussian2> kmeans_plus_plus(const std::vector<Eigen::Vector2d>& xs, int k, Rng& rng,
                                        const Eigen::Matrix2d& data_cov) {
  std::vector<Eigen::Vector2d> centers;
  std::uniform_int_distribution<std::size_t> first(0, xs.size() - 1);
  centers.push_back(xs[first(rng)]);
  std::vector<double> d2(xs.size());
  while (static_cast<int>(centers.size()) < k) {
    for (std::size_t n = 0; n < xs.size(); ++n) {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& c : centers) best = std::min(best, (xs[n] - c).squaredNorm());
      d2[n] = best;
    }
    std::discrete_distribution<std::size_t> pick(d2.begin(), d2.end());
    centers.push_back(xs[pick(rng)]);
  }
  // A few Lloyd iterations give per-cluster covariances to start EM from.
  std::vector<int> assign(xs.size(), 0);
  for (int iter = 0; iter < 10; ++iter) {
    for (std::size_t n = 0; n < xs.size(); ++n) {
      int best = 0;
      for (int c = 1; c < k; ++c) {
        if ((xs[n] - centers[c]).squaredNorm() < (xs[n] - centers[best]).squaredNorm()) best = c;
      }
      assign[n] = best;
    }
    std::vector<Eigen::Vector2d> sums(k, Eigen::Vector2d::Zero());
    std::vector<int> counts(k, 0);
    for (std::size_t n = 0; n < xs.size(); ++n) {
      sums[assign[n]] += xs[n];
      ++counts[assign[n]];
    }
    for (int c = 0; c < k; ++c) {
      if (counts[c] > 0) centers[c] = sums[c] / counts[c];
    }
  }
  std::vector<Gaussian2> out(k);
  for (int c = 0; c < k; ++c) {
    std::vector<Eigen::Vector2d> members;
    for (std::size_t n = 0; n < xs.size(); ++n) {
      if (assign[n] == c) members.push_back(xs[n]);
    }
    out[c].mean = centers[c];
    out[c].covariance = members.size() > 2 ? sample_moments(members).covariance : data_cov;
    if (out[c].covariance.determinant() <= 0.0) out[c].covariance = data_cov;
  }
  return out;
}

}  // namespace

std::vector<Gaussian2> calibration_components(const std::vector<IQShot>& shots, int k) {
  std::vector<std::vector<Eigen::Vector2d>> groups(k);
  for (const auto& s : shots) {
    if (s.label >= 0 && s.label < k) groups[s.label].push_back(as_vector(s));
  }
  std::vector<Gaussian2> out(k);
  for (int l = 0; l < k; ++l) {
    if (groups[l].size() < 3) {
      throw ValidationError("calibration", "label " + std::to_string(l) + " has fewer than 3 shots");
    }
    const Moments m = sample_moments(groups[l]);
    out[l] = {m.mean, m.covariance};
  }
  return out;
}

GmmModel fit_gmm(const std::vector<IQShot>& shots, int k, const std::vector<Gaussian2>& init,
                 std::uint64_t seed, const GmmOptions& options) {
  if (k < 1) throw ValidationError("gmm.k", "must be >= 1");
  if (static_cast<int>(shots.size()) < 10 * k) throw ValidationError("shots", "need at least 10 shots per component");
  if (!init.empty() && static_cast<int>(init.size()) != k) {
    throw ValidationError("gmm.init", "expected k initial components");
  }

  const std::size_t n = shots.size();
  std::vector<Eigen::Vector2d> xs(n);
  for (std::size_t i = 0; i < n; ++i) xs[i] = as_vector(shots[i]);
  const Moments data = sample_moments(xs);
  const double det_floor = 1e-12 * data.covariance.determinant();

  Rng rng(seed);
  std::vector<Eigen::Vector2d> reference;
  std::vector<Gaussian2> comps;
  if (!init.empty()) {
    comps = init;
    for (const auto& g : init) reference.push_back(g.mean);
  } else {
    bool labelled = std::all_of(shots.begin(), shots.end(), [k](const IQShot& s) { return s.label >= 0 && s.label < k; });
    if (labelled) {
      comps = calibration_components(shots, k);
      for (const auto& g : comps) reference.push_back(g.mean);
    } else {
      comps = kmeans_plus_plus(xs, k, rng, data.covariance);
    }
  }
  for (std::size_t c = 0; c < comps.size(); ++c) cholesky_factor(comps[c].covariance, "gmm.init");
  std::vector<double> weights(k, 1.0 / k);
  std::vector<bool> reseeded(k, false);

  GmmModel model;
  Eigen::MatrixXd resp(n, k);
  double previous = -std::numeric_limits<double>::infinity();
  for (int iter = 0; iter < options.max_iterations; ++iter) {
    // E-step.
    std::vector<double> log_det(k);
    std::vector<Eigen::Matrix2d> inverse(k);
    for (int c = 0; c < k; ++c) {
      log_det[c] = std::log(comps[c].covariance.determinant());
      inverse[c] = comps[c].covariance.inverse();
    }
    double ll = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double top = -std::numeric_limits<double>::infinity();
      for (int c = 0; c < k; ++c) {
        resp(i, c) = std::log(weights[c]) + log_density(comps[c], log_det[c], inverse[c], xs[i]);
        top = std::max(top, resp(i, c));
      }
      double sum = 0.0;
      for (int c = 0; c < k; ++c) {
        resp(i, c) = std::exp(resp(i, c) - top);
        sum += resp(i, c);
      }
      resp.row(i) /= sum;
      ll += top + std::log(sum);
    }
    model.log_likelihood_history.push_back(ll);
    model.log_likelihood = ll;
    model.iterations = iter + 1;
    if (iter > 0 && std::abs(ll - previous) <= options.tolerance * std::abs(previous)) {
      model.converged = true;
      break;
    }
    previous = ll;

    // M-step.
    for (int c = 0; c < k; ++c) {
      const double nk = resp.col(c).sum();
      Eigen::Vector2d mean = Eigen::Vector2d::Zero();
      for (std::size_t i = 0; i < n; ++i) mean += resp(i, c) * xs[i];
      Eigen::Matrix2d cov = Eigen::Matrix2d::Zero();
      if (nk > 0.0) {
        mean /= nk;
        for (std::size_t i = 0; i < n; ++i) cov += resp(i, c) * (xs[i] - mean) * (xs[i] - mean).transpose();
        cov /= nk;
        cov = 0.5 * (cov + cov.transpose()).eval();
      }
      if (!(nk > 1e-9 * n) || !(cov.determinant() > det_floor)) {
        if (reseeded[c]) {
          throw NumericError("GMM component " + std::to_string(c) + " collapsed twice");
        }
        reseeded[c] = true;
        std::uniform_int_distribution<std::size_t> pick(0, n - 1);
        comps[c] = {xs[pick(rng)], data.covariance};
        weights[c] = 1.0 / k;
        continue;
      }
      comps[c] = {mean, cov};
      weights[c] = nk / n;
    }
    const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
    for (double& w : weights) w /= total;
  }

  std::vector<int> order(k);
  std::iota(order.begin(), order.end(), 0);
  if (!reference.empty()) order = match_to_reference(comps, reference);
  for (int l = 0; l < k; ++l) {
    model.components.push_back(comps[order[l]]);
    model.weights.push_back(weights[order[l]]);
    model.labels.push_back(l);
  }
  return model;
}

Eigen::Matrix4d correction_matrix(const GmmModel& model, int samples, std::uint64_t seed) {
  if (model.size() != kReadoutStates) throw ValidationError("gmm", "population estimate needs 4 components");
  if (samples < 1) throw ValidationError("mc_samples", "must be >= 1");
  Rng rng(seed);
  std::normal_distribution<double> normal;
  std::vector<Eigen::Vector2d> z(samples);
  for (auto& v : z) {
    const double a = normal(rng);
    const double b = normal(rng);
    v = {a, b};
  }
  std::array<Eigen::Matrix2d, kReadoutStates> inverse;
  for (int i = 0; i < kReadoutStates; ++i) inverse[i] = model.components[i].covariance.inverse();

  Eigen::Matrix4d m = Eigen::Matrix4d::Zero();
  for (int j = 0; j < kReadoutStates; ++j) {
    const Eigen::Matrix2d factor = cholesky_factor(model.components[j].covariance, "gmm.component");
    for (const auto& zz : z) {
      const Eigen::Vector2d x = model.components[j].mean + factor * zz;
      for (int i = 0; i < kReadoutStates; ++i) {
        const Eigen::Vector2d d = x - model.components[i].mean;
        if (d.dot(inverse[i] * d) <= 1.0) m(i, j) += 1.0;
      }
    }
  }
  return m / static_cast<double>(samples);
}

PopulationEstimate estimate_populations(const std::vector<IQShot>& shots, const GmmModel& model,
                                        std::uint64_t seed, int mc_samples) {
  return estimate_populations(shots, model, correction_matrix(model, mc_samples, seed));
}

PopulationEstimate estimate_populations(const std::vector<IQShot>& shots, const GmmModel& model,
                                        const Eigen::Matrix4d& correction) {
  if (model.size() != kReadoutStates) throw ValidationError("gmm", "population estimate needs 4 components");
  PopulationEstimate est;
  std::array<Eigen::Matrix2d, kReadoutStates> inverse;
  for (int i = 0; i < kReadoutStates; ++i) inverse[i] = model.components[i].covariance.inverse();
  for (const auto& s : shots) {
    const Eigen::Vector2d x = as_vector(s);
    for (int i = 0; i < kReadoutStates; ++i) {
      const Eigen::Vector2d d = x - model.components[i].mean;
      if (d.dot(inverse[i] * d) <= 1.0) est.raw_counts(i) += 1.0;
    }
  }
  if (est.raw_counts.sum() <= 0.0) throw NumericError("no shot falls inside any 1-sigma ellipse");
  est.uncorrected = est.raw_counts / est.raw_counts.sum();

  est.correction = correction;
  Eigen::JacobiSVD<Eigen::Matrix4d> svd(est.correction);
  const auto sv = svd.singularValues();
  if (!(sv(3) > 0.0) || sv(0) / sv(3) > 1e8) {
    throw NumericError("correction matrix is singular (condition number above 1e8); overlap is unresolvable");
  }
  const Eigen::Vector4d n = est.correction.partialPivLu().solve(est.raw_counts).cwiseMax(0.0);
  if (!(n.sum() > 0.0)) throw NumericError("corrected populations vanish");
  est.p = n / n.sum();
  return est;
}

}  // namespace qcrsim
