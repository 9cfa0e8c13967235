#include "abd/geometry/distance.hpp"

#include <algorithm>
#include <string>

#include "abd/autodiff.hpp"
#include "abd/error.hpp"

namespace abd {

namespace {

using D = Dual2<12>;
using DV = DualVec3<12>;

// Feature dimension, used to break exact ties toward vertices.
int feature_rank(DistanceRegion r) {
  switch (r) {
    case DistanceRegion::pt_vertex0:
    case DistanceRegion::pt_vertex1:
    case DistanceRegion::pt_vertex2:
    case DistanceRegion::ee_a0_b0:
    case DistanceRegion::ee_a0_b1:
    case DistanceRegion::ee_a1_b0:
    case DistanceRegion::ee_a1_b1:
      return 0;
    case DistanceRegion::pt_face:
    case DistanceRegion::ee_interior:
      return 2;
    default:
      return 1;
  }
}

double point_point_sq(const Vec3& p, const Vec3& q) { return (p - q).squaredNorm(); }

double point_line_sq(const Vec3& p, const Vec3& e0, const Vec3& e1) {
  const Vec3 e = e1 - e0;
  return (p - e0).cross(e).squaredNorm() / e.squaredNorm();
}

double point_plane_sq(const Vec3& p, const Vec3& t0, const Vec3& t1, const Vec3& t2) {
  const Vec3 n = (t1 - t0).cross(t2 - t0);
  const double s = (p - t0).dot(n);
  return s * s / n.squaredNorm();
}

double line_line_sq(const Vec3& a0, const Vec3& a1, const Vec3& b0, const Vec3& b1) {
  const Vec3 n = (a1 - a0).cross(b1 - b0);
  const double s = (a0 - b0).dot(n);
  return s * s / n.squaredNorm();
}

// Segment parameter of the projection of p onto [e0, e1], unclamped.
double segment_param(const Vec3& p, const Vec3& e0, const Vec3& e1) {
  const Vec3 e = e1 - e0;
  return (p - e0).dot(e) / e.squaredNorm();
}

struct Candidate {
  double d_sq;
  DistanceRegion region;
};

void keep_best(Candidate& best, const Candidate& c) {
  if (c.d_sq < best.d_sq || (c.d_sq == best.d_sq && feature_rank(c.region) < feature_rank(best.region))) {
    best = c;
  }
}

// Point vs closed segment, classified as vertex or edge.
Candidate point_segment(const Vec3& p, const Vec3& e0, const Vec3& e1, DistanceRegion at_e0, DistanceRegion at_e1,
                        DistanceRegion on_edge) {
  const double t = segment_param(p, e0, e1);
  if (t <= 0.0) return {point_point_sq(p, e0), at_e0};
  if (t >= 1.0) return {point_point_sq(p, e1), at_e1};
  return {point_line_sq(p, e0, e1), on_edge};
}

// Line-line closest parameters (s on a, t on b); only meaningful for non-parallel lines.
std::pair<double, double> line_line_params(const Vec3& a0, const Vec3& a1, const Vec3& b0, const Vec3& b1) {
  const Vec3 da = a1 - a0;
  const Vec3 db = b1 - b0;
  const Vec3 r = a0 - b0;
  const double A = da.dot(da);
  const double B = da.dot(db);
  const double C = db.dot(db);
  const double Dd = da.dot(r);
  const double E = db.dot(r);
  const double den = A * C - B * B;
  return {(B * E - C * Dd) / den, (A * E - B * Dd) / den};
}

D dual_point_point(const DV& p, const DV& q) {
  const DV d = p - q;
  return dot(d, d);
}

D dual_point_line(const DV& p, const DV& e0, const DV& e1) {
  const DV e = e1 - e0;
  const DV c = cross(p - e0, e);
  return dot(c, c) / dot(e, e);
}

D dual_point_plane(const DV& p, const DV& t0, const DV& t1, const DV& t2) {
  const DV n = cross(t1 - t0, t2 - t0);
  return square(dot(p - t0, n)) / dot(n, n);
}

D dual_line_line(const DV& a0, const DV& a1, const DV& b0, const DV& b1) {
  const DV n = cross(a1 - a0, b1 - b0);
  return square(dot(a0 - b0, n)) / dot(n, n);
}

}  // namespace

bool is_point_triangle_region(DistanceRegion r) { return r <= DistanceRegion::pt_face; }
bool is_edge_edge_region(DistanceRegion r) { return r >= DistanceRegion::ee_a0_b0; }

DistanceResult point_triangle_distance_sq(const Vec3& p, const Vec3& t0, const Vec3& t1, const Vec3& t2) {
  const Vec3 e0 = t1 - t0;
  const Vec3 e1 = t2 - t0;
  const double a = e0.dot(e0);
  const double b = e0.dot(e1);
  const double c = e1.dot(e1);
  const double det = a * c - b * b;
  if (!(det > 1e-24 * a * c) || a == 0.0 || c == 0.0) {
    throw GeometryError("point_triangle_distance_sq: degenerate triangle");
  }
  const Vec3 r = p - t0;
  const double d = e0.dot(r);
  const double e = e1.dot(r);
  const double u = (c * d - b * e) / det;
  const double v = (a * e - b * d) / det;
  if (u > 0.0 && v > 0.0 && u + v < 1.0) {
    return {point_plane_sq(p, t0, t1, t2), DistanceRegion::pt_face, 1.0};
  }

  using R = DistanceRegion;
  Candidate best = point_segment(p, t0, t1, R::pt_vertex0, R::pt_vertex1, R::pt_edge01);
  keep_best(best, point_segment(p, t1, t2, R::pt_vertex1, R::pt_vertex2, R::pt_edge12));
  keep_best(best, point_segment(p, t2, t0, R::pt_vertex2, R::pt_vertex0, R::pt_edge20));
  return {best.d_sq, best.region, 1.0};
}

DistanceResult edge_edge_distance_sq(const Vec3& a0, const Vec3& a1, const Vec3& b0, const Vec3& b1,
                                     double mollifier_eps) {
  const Vec3 da = a1 - a0;
  const Vec3 db = b1 - b0;
  const double la = da.squaredNorm();
  const double lb = db.squaredNorm();
  if (la == 0.0 || lb == 0.0) throw GeometryError("edge_edge_distance_sq: zero-length edge");

  const double cross_sq = da.cross(db).squaredNorm();
  const double mollifier = mollifier_eps > 0.0 ? edge_edge_mollifier(cross_sq, mollifier_eps) : 1.0;

  if (cross_sq > 1e-20 * la * lb) {
    const auto [s, t] = line_line_params(a0, a1, b0, b1);
    if (s > 0.0 && s < 1.0 && t > 0.0 && t < 1.0) {
      return {line_line_sq(a0, a1, b0, b1), DistanceRegion::ee_interior, mollifier};
    }
  }

  // The constrained minimum lies on the boundary of the parameter square.
  using R = DistanceRegion;
  Candidate best = point_segment(a0, b0, b1, R::ee_a0_b0, R::ee_a0_b1, R::ee_a0_edge_b);
  keep_best(best, point_segment(a1, b0, b1, R::ee_a1_b0, R::ee_a1_b1, R::ee_a1_edge_b));
  keep_best(best, point_segment(b0, a0, a1, R::ee_a0_b0, R::ee_a1_b0, R::ee_edge_a_b0));
  keep_best(best, point_segment(b1, a0, a1, R::ee_a0_b1, R::ee_a1_b1, R::ee_edge_a_b1));
  return {best.d_sq, best.region, mollifier};
}

double edge_edge_mollifier_threshold(const Vec3& a0_rest, const Vec3& a1_rest, const Vec3& b0_rest,
                                     const Vec3& b1_rest) {
  return 1e-3 * (a1_rest - a0_rest).squaredNorm() * (b1_rest - b0_rest).squaredNorm();
}

double edge_edge_mollifier(double cross_sq, double eps) {
  if (cross_sq >= eps) return 1.0;
  const double x = cross_sq / eps;
  return x * (2.0 - x);
}

double distance_sq_in_region(const std::array<Vec3, 4>& x, DistanceRegion region) {
  using R = DistanceRegion;
  switch (region) {
    case R::pt_vertex0: return point_point_sq(x[0], x[1]);
    case R::pt_vertex1: return point_point_sq(x[0], x[2]);
    case R::pt_vertex2: return point_point_sq(x[0], x[3]);
    case R::pt_edge01: return point_line_sq(x[0], x[1], x[2]);
    case R::pt_edge12: return point_line_sq(x[0], x[2], x[3]);
    case R::pt_edge20: return point_line_sq(x[0], x[3], x[1]);
    case R::pt_face: return point_plane_sq(x[0], x[1], x[2], x[3]);
    case R::ee_a0_b0: return point_point_sq(x[0], x[2]);
    case R::ee_a0_b1: return point_point_sq(x[0], x[3]);
    case R::ee_a1_b0: return point_point_sq(x[1], x[2]);
    case R::ee_a1_b1: return point_point_sq(x[1], x[3]);
    case R::ee_a0_edge_b: return point_line_sq(x[0], x[2], x[3]);
    case R::ee_a1_edge_b: return point_line_sq(x[1], x[2], x[3]);
    case R::ee_edge_a_b0: return point_line_sq(x[2], x[0], x[1]);
    case R::ee_edge_a_b1: return point_line_sq(x[3], x[0], x[1]);
    case R::ee_interior: return line_line_sq(x[0], x[1], x[2], x[3]);
  }
  return 0.0;
}

PairDerivatives distance_sq_derivatives(const std::array<Vec3, 4>& x, DistanceRegion region) {
  const DV v0 = DV::variable(x[0], 0);
  const DV v1 = DV::variable(x[1], 3);
  const DV v2 = DV::variable(x[2], 6);
  const DV v3 = DV::variable(x[3], 9);

  using R = DistanceRegion;
  D d;
  switch (region) {
    case R::pt_vertex0: d = dual_point_point(v0, v1); break;
    case R::pt_vertex1: d = dual_point_point(v0, v2); break;
    case R::pt_vertex2: d = dual_point_point(v0, v3); break;
    case R::pt_edge01: d = dual_point_line(v0, v1, v2); break;
    case R::pt_edge12: d = dual_point_line(v0, v2, v3); break;
    case R::pt_edge20: d = dual_point_line(v0, v3, v1); break;
    case R::pt_face: d = dual_point_plane(v0, v1, v2, v3); break;
    case R::ee_a0_b0: d = dual_point_point(v0, v2); break;
    case R::ee_a0_b1: d = dual_point_point(v0, v3); break;
    case R::ee_a1_b0: d = dual_point_point(v1, v2); break;
    case R::ee_a1_b1: d = dual_point_point(v1, v3); break;
    case R::ee_a0_edge_b: d = dual_point_line(v0, v2, v3); break;
    case R::ee_a1_edge_b: d = dual_point_line(v1, v2, v3); break;
    case R::ee_edge_a_b0: d = dual_point_line(v2, v0, v1); break;
    case R::ee_edge_a_b1: d = dual_point_line(v3, v0, v1); break;
    case R::ee_interior: d = dual_line_line(v0, v1, v2, v3); break;
  }
  return {d.v, d.g, d.h};
}

PairDerivatives edge_edge_mollifier_derivatives(const std::array<Vec3, 4>& x, double eps) {
  const DV v0 = DV::variable(x[0], 0);
  const DV v1 = DV::variable(x[1], 3);
  const DV v2 = DV::variable(x[2], 6);
  const DV v3 = DV::variable(x[3], 9);
  const DV n = cross(v1 - v0, v3 - v2);
  const D c = dot(n, n);
  if (c.v >= eps) return {1.0, Vec12::Zero(), Mat12::Zero()};
  const double s = c.v / eps;
  const D e = chain(c, s * (2.0 - s), 2.0 / eps - 2.0 * c.v / (eps * eps), -2.0 / (eps * eps));
  return {e.v, e.g, e.h};
}

std::array<double, 4> closest_point_weights(const std::array<Vec3, 4>& x, DistanceRegion region) {
  using R = DistanceRegion;
  auto clamp01 = [](double t) { return std::clamp(t, 0.0, 1.0); };
  switch (region) {
    case R::pt_vertex0: return {1, -1, 0, 0};
    case R::pt_vertex1: return {1, 0, -1, 0};
    case R::pt_vertex2: return {1, 0, 0, -1};
    case R::pt_edge01: {
      const double t = clamp01(segment_param(x[0], x[1], x[2]));
      return {1, -(1 - t), -t, 0};
    }
    case R::pt_edge12: {
      const double t = clamp01(segment_param(x[0], x[2], x[3]));
      return {1, 0, -(1 - t), -t};
    }
    case R::pt_edge20: {
      const double t = clamp01(segment_param(x[0], x[3], x[1]));
      return {1, -t, 0, -(1 - t)};
    }
    case R::pt_face: {
      const Vec3 e0 = x[2] - x[1];
      const Vec3 e1 = x[3] - x[1];
      const Vec3 r = x[0] - x[1];
      const double a = e0.dot(e0), b = e0.dot(e1), c = e1.dot(e1);
      const double d = e0.dot(r), e = e1.dot(r);
      const double det = a * c - b * b;
      const double u = (c * d - b * e) / det;
      const double v = (a * e - b * d) / det;
      return {1, -(1 - u - v), -u, -v};
    }
    case R::ee_a0_b0: return {1, 0, -1, 0};
    case R::ee_a0_b1: return {1, 0, 0, -1};
    case R::ee_a1_b0: return {0, 1, -1, 0};
    case R::ee_a1_b1: return {0, 1, 0, -1};
    case R::ee_a0_edge_b: {
      const double t = clamp01(segment_param(x[0], x[2], x[3]));
      return {1, 0, -(1 - t), -t};
    }
    case R::ee_a1_edge_b: {
      const double t = clamp01(segment_param(x[1], x[2], x[3]));
      return {0, 1, -(1 - t), -t};
    }
    case R::ee_edge_a_b0: {
      const double s = clamp01(segment_param(x[2], x[0], x[1]));
      return {1 - s, s, -1, 0};
    }
    case R::ee_edge_a_b1: {
      const double s = clamp01(segment_param(x[3], x[0], x[1]));
      return {1 - s, s, 0, -1};
    }
    case R::ee_interior: {
      const auto [s, t] = line_line_params(x[0], x[1], x[2], x[3]);
      return {1 - s, s, -(1 - t), -t};
    }
  }
  return {0, 0, 0, 0};
}

}  // namespace abd
