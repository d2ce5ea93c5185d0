#include "obscura/bessel.hpp"

#include <cmath>
#include <numbers>

namespace obscura {
namespace {

// Power series; cancellation stays below ~1e-13 for |x| < 8.
double j1_series(double x) {
  const double half = 0.5 * x;
  const double q = -half * half;
  double term = half;
  double sum = term;
  for (int k = 1; k < 60; ++k) {
    term *= q / (static_cast<double>(k) * (k + 1));
    sum += term;
    if (std::abs(term) < 1e-17 * std::abs(sum)) break;
  }
  return sum;
}

// J1(x) = 1/(2 pi) * integral over one period of cos(t - x sin t). The
// integrand is smooth and periodic, so the trapezoid rule converges
// geometrically once the node count exceeds |x| by a few dozen.
double j1_periodic_trapezoid(double x) {
  const int nodes = static_cast<int>(std::ceil(x)) + 64;
  const double step = 2.0 * std::numbers::pi / nodes;
  double sum = 0.0;
  for (int i = 0; i < nodes; ++i) {
    const double t = step * i;
    sum += std::cos(t - x * std::sin(t));
  }
  return sum / nodes;
}

}  // namespace

double bessel_j1(double x) {
  const double ax = std::abs(x);
  const double value = ax < 8.0 ? j1_series(ax) : j1_periodic_trapezoid(ax);
  return x < 0 ? -value : value;
}

}  // namespace obscura
