#pragma once

namespace abd {

/// Value and derivatives of a scalar function of the squared distance x = d^2.
struct BarrierEval {
  double value = 0.0;
  double d1 = 0.0;  // d/dx
  double d2 = 0.0;  // d^2/dx^2
};

/// Clamped log barrier -(d - d_hat)^2 ln(d / d_hat) for 0 < d < d_hat, else 0, evaluated from
/// d_sq = d^2 with derivatives taken with respect to d_sq. Throws IntersectionError for d_sq <= 0.
BarrierEval barrier(double d_sq, double d_hat);

/// Derivative of the barrier with respect to the unsigned distance d (not d^2). Non-positive.
double barrier_derivative_in_distance(double d, double d_hat);

}  // namespace abd
