#pragma once

#include <limits>
#include <optional>
#include <span>

#include "abd/types.hpp"

namespace abd {

struct Aabb {
  Vec3 lo = Vec3::Constant(std::numeric_limits<double>::infinity());
  Vec3 hi = Vec3::Constant(-std::numeric_limits<double>::infinity());

  bool empty() const { return (lo.array() > hi.array()).any(); }
  void expand(const Vec3& p) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  void expand(const Aabb& b) {
    lo = lo.cwiseMin(b.lo);
    hi = hi.cwiseMax(b.hi);
  }
  void inflate(double r) {
    lo.array() -= r;
    hi.array() += r;
  }
  Vec3 center() const { return 0.5 * (lo + hi); }
  Vec3 extent() const { return hi - lo; }
  bool contains(const Vec3& p) const { return (p.array() >= lo.array()).all() && (p.array() <= hi.array()).all(); }
};

/// Componentwise bounds of `points`, each face pushed out by `inflation`.
Aabb aabb_of(std::span<const Vec3> points, double inflation);

/// Closed-interval overlap test: boxes that only touch still overlap (zero-thickness result).
inline bool aabb_intersects(const Aabb& a, const Aabb& b) {
  return (a.lo.array() <= b.hi.array()).all() && (b.lo.array() <= a.hi.array()).all();
}

std::optional<Aabb> aabb_overlap(const Aabb& a, const Aabb& b);

/// Squared Euclidean gap between two boxes (0 when they overlap).
double aabb_distance_sq(const Aabb& a, const Aabb& b);

}  // namespace abd
