#include "abd/geometry/aabb.hpp"

#include <algorithm>

namespace abd {

Aabb aabb_of(std::span<const Vec3> points, double inflation) {
  Aabb box;
  for (const Vec3& p : points) box.expand(p);
  box.inflate(inflation);
  return box;
}

std::optional<Aabb> aabb_overlap(const Aabb& a, const Aabb& b) {
  if (!aabb_intersects(a, b)) return std::nullopt;
  return Aabb{a.lo.cwiseMax(b.lo), a.hi.cwiseMin(b.hi)};
}

double aabb_distance_sq(const Aabb& a, const Aabb& b) {
  double d = 0.0;
  for (int k = 0; k < 3; ++k) {
    const double gap = std::max({0.0, a.lo[k] - b.hi[k], b.lo[k] - a.hi[k]});
    d += gap * gap;
  }
  return d;
}

}  // namespace abd
