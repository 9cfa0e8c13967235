#include "abd/geometry/intersect.hpp"

#include <cmath>

namespace abd {

namespace {

double orient3d(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d) {
  return (b - a).cross(c - a).dot(d - a);
}

int sign(double x) { return (x > 0.0) - (x < 0.0); }

bool segment_hits_triangle(const Vec3& p, const Vec3& q, const std::array<Vec3, 3>& t) {
  const int sp = sign(orient3d(t[0], t[1], t[2], p));
  const int sq = sign(orient3d(t[0], t[1], t[2], q));
  if (sp == sq) return false;  // both strictly on one side, or both in plane (handled by caller)
  const int s0 = sign(orient3d(p, q, t[0], t[1]));
  const int s1 = sign(orient3d(p, q, t[1], t[2]));
  const int s2 = sign(orient3d(p, q, t[2], t[0]));
  const bool has_pos = s0 > 0 || s1 > 0 || s2 > 0;
  const bool has_neg = s0 < 0 || s1 < 0 || s2 < 0;
  return !(has_pos && has_neg);
}

double orient2d(const Vec2& a, const Vec2& b, const Vec2& c) {
  return (b - a).x() * (c - a).y() - (b - a).y() * (c - a).x();
}

bool on_segment_2d(const Vec2& a, const Vec2& b, const Vec2& p) {
  return std::min(a.x(), b.x()) <= p.x() && p.x() <= std::max(a.x(), b.x()) && std::min(a.y(), b.y()) <= p.y() &&
         p.y() <= std::max(a.y(), b.y());
}

bool segments_intersect_2d(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d) {
  const int o1 = sign(orient2d(a, b, c));
  const int o2 = sign(orient2d(a, b, d));
  const int o3 = sign(orient2d(c, d, a));
  const int o4 = sign(orient2d(c, d, b));
  if (o1 != o2 && o3 != o4) return true;
  if (o1 == 0 && on_segment_2d(a, b, c)) return true;
  if (o2 == 0 && on_segment_2d(a, b, d)) return true;
  if (o3 == 0 && on_segment_2d(c, d, a)) return true;
  if (o4 == 0 && on_segment_2d(c, d, b)) return true;
  return false;
}

bool point_in_triangle_2d(const Vec2& p, const std::array<Vec2, 3>& t) {
  const int s0 = sign(orient2d(t[0], t[1], p));
  const int s1 = sign(orient2d(t[1], t[2], p));
  const int s2 = sign(orient2d(t[2], t[0], p));
  const bool has_pos = s0 > 0 || s1 > 0 || s2 > 0;
  const bool has_neg = s0 < 0 || s1 < 0 || s2 < 0;
  return !(has_pos && has_neg);
}

bool coplanar_intersect(const std::array<Vec3, 3>& a, const std::array<Vec3, 3>& b) {
  const Vec3 n = (a[1] - a[0]).cross(a[2] - a[0]);
  int drop = 0;
  n.cwiseAbs().maxCoeff(&drop);
  const int u = (drop + 1) % 3;
  const int v = (drop + 2) % 3;
  std::array<Vec2, 3> pa, pb;
  for (int i = 0; i < 3; ++i) {
    pa[i] = Vec2(a[i][u], a[i][v]);
    pb[i] = Vec2(b[i][u], b[i][v]);
  }
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      if (segments_intersect_2d(pa[i], pa[(i + 1) % 3], pb[j], pb[(j + 1) % 3])) return true;
    }
  }
  return point_in_triangle_2d(pa[0], pb) || point_in_triangle_2d(pb[0], pa);
}

}  // namespace

bool triangles_intersect(const std::array<Vec3, 3>& a, const std::array<Vec3, 3>& b) {
  const int sb0 = sign(orient3d(a[0], a[1], a[2], b[0]));
  const int sb1 = sign(orient3d(a[0], a[1], a[2], b[1]));
  const int sb2 = sign(orient3d(a[0], a[1], a[2], b[2]));
  if (sb0 == sb1 && sb1 == sb2) {
    if (sb0 != 0) return false;
    return coplanar_intersect(a, b);
  }
  const int sa0 = sign(orient3d(b[0], b[1], b[2], a[0]));
  const int sa1 = sign(orient3d(b[0], b[1], b[2], a[1]));
  const int sa2 = sign(orient3d(b[0], b[1], b[2], a[2]));
  if (sa0 == sa1 && sa1 == sa2 && sa0 != 0) return false;

  for (int i = 0; i < 3; ++i) {
    if (segment_hits_triangle(a[i], a[(i + 1) % 3], b)) return true;
    if (segment_hits_triangle(b[i], b[(i + 1) % 3], a)) return true;
  }
  return false;
}

}  // namespace abd
