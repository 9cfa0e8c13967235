#include "abd/geometry/primitives.hpp"

#include <cmath>
#include <map>
#include <numbers>
#include <utility>

#include "abd/error.hpp"

namespace abd {

SurfaceMesh make_box(const Vec3& h) {
  std::vector<Vec3> v;
  for (int i = 0; i < 8; ++i) {
    v.emplace_back((i & 1) ? h.x() : -h.x(), (i & 2) ? h.y() : -h.y(), (i & 4) ? h.z() : -h.z());
  }
  std::vector<Triangle> t = {
      {0, 2, 1}, {1, 2, 3},  // z-
      {4, 5, 6}, {5, 7, 6},  // z+
      {0, 1, 4}, {1, 5, 4},  // y-
      {2, 6, 3}, {3, 6, 7},  // y+
      {0, 4, 2}, {2, 4, 6},  // x-
      {1, 3, 5}, {3, 7, 5},  // x+
  };
  return SurfaceMesh(std::move(v), std::move(t));
}

SurfaceMesh make_icosphere(double radius, int subdivisions) {
  const double g = (1.0 + std::sqrt(5.0)) / 2.0;
  std::vector<Vec3> v = {{-1, g, 0}, {1, g, 0}, {-1, -g, 0}, {1, -g, 0}, {0, -1, g}, {0, 1, g},
                         {0, -1, -g}, {0, 1, -g}, {g, 0, -1}, {g, 0, 1}, {-g, 0, -1}, {-g, 0, 1}};
  for (auto& p : v) p.normalize();
  std::vector<Triangle> t = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11}, {1, 5, 9}, {5, 11, 4},
                             {11, 10, 2}, {10, 7, 6}, {7, 1, 8},  {3, 9, 4},  {3, 4, 2},   {3, 2, 6}, {3, 6, 8},
                             {3, 8, 9},  {4, 9, 5},  {2, 4, 11}, {6, 2, 10}, {8, 6, 7},   {9, 8, 1}};
  for (int s = 0; s < subdivisions; ++s) {
    std::map<std::pair<int, int>, int> midpoint;
    auto mid = [&](int a, int b) {
      const auto key = std::minmax(a, b);
      auto it = midpoint.find(key);
      if (it != midpoint.end()) return it->second;
      v.push_back((v[a] + v[b]).normalized());
      const int id = static_cast<int>(v.size()) - 1;
      midpoint.emplace(key, id);
      return id;
    };
    std::vector<Triangle> next;
    next.reserve(t.size() * 4);
    for (const auto& f : t) {
      const int a = mid(f[0], f[1]);
      const int b = mid(f[1], f[2]);
      const int c = mid(f[2], f[0]);
      next.push_back({f[0], a, c});
      next.push_back({f[1], b, a});
      next.push_back({f[2], c, b});
      next.push_back({a, b, c});
    }
    t = std::move(next);
  }
  for (auto& p : v) p *= radius;
  return SurfaceMesh(std::move(v), std::move(t));
}

SurfaceMesh make_prism(const std::vector<Vec2>& outline, double half_thickness) {
  const int n = static_cast<int>(outline.size());
  if (n < 3) throw GeometryError("make_prism: outline needs at least 3 points");
  std::vector<Vec3> v;
  v.reserve(2 * n + 2);
  for (const auto& p : outline) v.emplace_back(p.x(), p.y(), -half_thickness);
  for (const auto& p : outline) v.emplace_back(p.x(), p.y(), half_thickness);
  Vec2 c = Vec2::Zero();
  for (const auto& p : outline) c += p;
  c /= n;
  const int bottom = 2 * n;
  const int top = 2 * n + 1;
  v.emplace_back(c.x(), c.y(), -half_thickness);
  v.emplace_back(c.x(), c.y(), half_thickness);
  std::vector<Triangle> t;
  for (int i = 0; i < n; ++i) {
    const int j = (i + 1) % n;
    t.push_back({bottom, j, i});
    t.push_back({top, n + i, n + j});
    t.push_back({i, j, n + j});
    t.push_back({i, n + j, n + i});
  }
  return SurfaceMesh(std::move(v), std::move(t));
}

SurfaceMesh make_gear(int teeth, double root_radius, double tip_radius, double half_thickness) {
  if (teeth < 3) throw GeometryError("make_gear: at least 3 teeth required");
  std::vector<Vec2> outline;
  const double step = 2.0 * std::numbers::pi / teeth;
  for (int k = 0; k < teeth; ++k) {
    const double a = k * step;
    outline.emplace_back(root_radius * std::cos(a), root_radius * std::sin(a));
    outline.emplace_back(tip_radius * std::cos(a + 0.3 * step), tip_radius * std::sin(a + 0.3 * step));
    outline.emplace_back(tip_radius * std::cos(a + 0.5 * step), tip_radius * std::sin(a + 0.5 * step));
    outline.emplace_back(root_radius * std::cos(a + 0.8 * step), root_radius * std::sin(a + 0.8 * step));
  }
  return make_prism(outline, half_thickness);
}

}  // namespace abd
