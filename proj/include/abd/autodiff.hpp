#pragma once

#include <cmath>

#include <Eigen/Core>

namespace abd {

/// Forward-mode scalar carrying value, gradient and Hessian with respect to N seed variables.
/// Used for the small closed-form distance and mollifier expressions, where hand-expanded
/// second derivatives are long and easy to get wrong.
template <int N>
struct Dual2 {
  using Grad = Eigen::Matrix<double, N, 1>;
  using Hess = Eigen::Matrix<double, N, N>;

  double v = 0.0;
  Grad g = Grad::Zero();
  Hess h = Hess::Zero();

  static Dual2 constant(double c) {
    Dual2 r;
    r.v = c;
    return r;
  }
  static Dual2 variable(double x, int i) {
    Dual2 r;
    r.v = x;
    r.g[i] = 1.0;
    return r;
  }
};

/// f(a) given f, f', f'' at a.v.
template <int N>
Dual2<N> chain(const Dual2<N>& a, double f, double df, double d2f) {
  Dual2<N> r;
  r.v = f;
  r.g = df * a.g;
  r.h = df * a.h;
  r.h.noalias() += d2f * a.g * a.g.transpose();
  return r;
}

template <int N>
Dual2<N> operator+(const Dual2<N>& a, const Dual2<N>& b) {
  Dual2<N> r;
  r.v = a.v + b.v;
  r.g = a.g + b.g;
  r.h = a.h + b.h;
  return r;
}

template <int N>
Dual2<N> operator-(const Dual2<N>& a, const Dual2<N>& b) {
  Dual2<N> r;
  r.v = a.v - b.v;
  r.g = a.g - b.g;
  r.h = a.h - b.h;
  return r;
}

template <int N>
Dual2<N> operator*(const Dual2<N>& a, const Dual2<N>& b) {
  Dual2<N> r;
  r.v = a.v * b.v;
  r.g = a.v * b.g + b.v * a.g;
  r.h = a.v * b.h + b.v * a.h;
  r.h.noalias() += a.g * b.g.transpose();
  r.h.noalias() += b.g * a.g.transpose();
  return r;
}

template <int N>
Dual2<N> operator*(double s, const Dual2<N>& a) {
  Dual2<N> r;
  r.v = s * a.v;
  r.g = s * a.g;
  r.h = s * a.h;
  return r;
}

template <int N>
Dual2<N> reciprocal(const Dual2<N>& a) {
  const double inv = 1.0 / a.v;
  return chain(a, inv, -inv * inv, 2.0 * inv * inv * inv);
}

template <int N>
Dual2<N> operator/(const Dual2<N>& a, const Dual2<N>& b) {
  return a * reciprocal(b);
}

template <int N>
Dual2<N> square(const Dual2<N>& a) {
  return a * a;
}

/// 3-vector of dual scalars.
template <int N>
struct DualVec3 {
  Dual2<N> x, y, z;

  static DualVec3 variable(const Eigen::Vector3d& p, int first_index) {
    return {Dual2<N>::variable(p[0], first_index), Dual2<N>::variable(p[1], first_index + 1),
            Dual2<N>::variable(p[2], first_index + 2)};
  }
};

template <int N>
DualVec3<N> operator-(const DualVec3<N>& a, const DualVec3<N>& b) {
  return {a.x - b.x, a.y - b.y, a.z - b.z};
}

template <int N>
Dual2<N> dot(const DualVec3<N>& a, const DualVec3<N>& b) {
  return a.x * b.x + a.y * b.y + a.z * b.z;
}

template <int N>
DualVec3<N> cross(const DualVec3<N>& a, const DualVec3<N>& b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

}  // namespace abd
