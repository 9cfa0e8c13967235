#include "abd/contact/barrier.hpp"

#include <cmath>
#include <string>

#include "abd/error.hpp"

namespace abd {

BarrierEval barrier(double d_sq, double d_hat) {
  if (!(d_sq > 0.0)) throw IntersectionError("barrier: non-positive squared distance " + std::to_string(d_sq));
  if (d_sq >= d_hat * d_hat) return {};
  const double d = std::sqrt(d_sq);
  const double r = d - d_hat;
  const double l = std::log(d / d_hat);
  const double b = -r * r * l;
  const double b1 = -2.0 * r * l - r * r / d;
  const double b2 = -2.0 * l - 4.0 * r / d + r * r / d_sq;
  return {b, b1 / (2.0 * d), (b2 - b1 / d) / (4.0 * d_sq)};
}

double barrier_derivative_in_distance(double d, double d_hat) {
  if (d >= d_hat) return 0.0;
  const double r = d - d_hat;
  return -2.0 * r * std::log(d / d_hat) - r * r / d;
}

}  // namespace abd
