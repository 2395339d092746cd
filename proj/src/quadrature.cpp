#include "qcrsim/quadrature.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <queue>

namespace qcrsim {

namespace {

// Kronrod nodes (positive half, descending) and weights for G7-K15.
constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
// Gauss weights for the odd Kronrod nodes (1, 3, 5, 7).
constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment {
  double lo, hi, value, error;
  bool operator<(const Segment& o) const { return error < o.error; }
};

Segment gauss_kronrod(const std::function<double(double)>& f, double lo, double hi) {
  const double center = 0.5 * (lo + hi);
  const double half = 0.5 * (hi - lo);
  const double fc = f(center);
  double kronrod = fc * kWgk[7];
  double gauss = fc * kWg[3];
  for (int j = 0; j < 7; ++j) {
    const double dx = half * kXgk[j];
    const double s = f(center - dx) + f(center + dx);
    kronrod += kWgk[j] * s;
    if (j % 2 == 1) gauss += kWg[j / 2] * s;
  }
  return {lo, hi, kronrod * half, std::abs((kronrod - gauss) * half)};
}

}  // namespace

QuadratureResult integrate_adaptive(const std::function<double(double)>& f, double lo, double hi,
                                    std::vector<double> breakpoints,
                                    const QuadratureOptions& options) {
  QuadratureResult result;
  if (hi <= lo) return {0.0, 0.0, 0, true};

  std::vector<double> edges{lo};
  std::sort(breakpoints.begin(), breakpoints.end());
  for (double b : breakpoints) {
    if (b > edges.back() && b < hi) edges.push_back(b);
  }
  edges.push_back(hi);

  std::priority_queue<Segment> heap;
  double total = 0.0;
  double total_error = 0.0;
  for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
    Segment s = gauss_kronrod(f, edges[i], edges[i + 1]);
    result.evaluations += 15;
    total += s.value;
    total_error += s.error;
    heap.push(s);
  }

  int subdivisions = 0;
  auto tolerance = [&] { return std::max(options.abs_tol, options.rel_tol * std::abs(total)); };
  while (total_error > tolerance() && subdivisions < options.max_subdivisions) {
    const Segment worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.lo + worst.hi);
    if (mid <= worst.lo || mid >= worst.hi) {
      heap.push(worst);
      break;
    }
    const Segment left = gauss_kronrod(f, worst.lo, mid);
    const Segment right = gauss_kronrod(f, mid, worst.hi);
    result.evaluations += 30;
    total += left.value + right.value - worst.value;
    total_error += left.error + right.error - worst.error;
    heap.push(left);
    heap.push(right);
    ++subdivisions;
  }

  // Re-sum to shed the running-update rounding.
  total = 0.0;
  total_error = 0.0;
  while (!heap.empty()) {
    total += heap.top().value;
    total_error += heap.top().error;
    heap.pop();
  }
  result.value = total;
  result.error = total_error;
  result.converged = total_error <= std::max(options.abs_tol, options.rel_tol * std::abs(total));
  return result;
}

}  // namespace qcrsim
