#pragma once

#include <cstdint>

#include "abd/types.hpp"

namespace abd {

/// Closest-feature classification. Point-triangle pairs use the pt_* values (3 vertices,
/// 3 edges, interior); edge-edge pairs use the ee_* values (4 vertex-vertex, 4 vertex-edge,
/// interior). Exact ties resolve toward the lower-dimensional feature.
enum class DistanceRegion : std::uint8_t {
  pt_vertex0,
  pt_vertex1,
  pt_vertex2,
  pt_edge01,
  pt_edge12,
  pt_edge20,
  pt_face,
  ee_a0_b0,
  ee_a0_b1,
  ee_a1_b0,
  ee_a1_b1,
  ee_a0_edge_b,
  ee_a1_edge_b,
  ee_edge_a_b0,
  ee_edge_a_b1,
  ee_interior,
};

bool is_point_triangle_region(DistanceRegion r);
bool is_edge_edge_region(DistanceRegion r);

struct DistanceResult {
  double d_sq = 0.0;
  DistanceRegion region = DistanceRegion::pt_face;
  /// Near-parallel edge-edge mollifier in [0, 1]; 1 for point-triangle pairs.
  double ee_parallel_mollifier = 1.0;
};

/// Squared distance from p to the closed triangle (t0, t1, t2). Throws GeometryError when the
/// triangle has zero area.
DistanceResult point_triangle_distance_sq(const Vec3& p, const Vec3& t0, const Vec3& t1, const Vec3& t2);

/// Squared distance between closed segments [a0, a1] and [b0, b1]. `mollifier_eps` is the
/// activation threshold on |(a1-a0) x (b1-b0)|^2; pass 0 to skip the mollifier (reported as 1).
/// Throws GeometryError on a zero-length edge.
DistanceResult edge_edge_distance_sq(const Vec3& a0, const Vec3& a1, const Vec3& b0, const Vec3& b1,
                                     double mollifier_eps = 0.0);

/// Mollifier threshold 1e-3 * |a1-a0|^2 |b1-b0|^2 from rest-pose edge endpoints.
double edge_edge_mollifier_threshold(const Vec3& a0_rest, const Vec3& a1_rest, const Vec3& b0_rest,
                                     const Vec3& b1_rest);

/// e(c) = (c/eps)(2 - c/eps) for c < eps, else 1.
double edge_edge_mollifier(double cross_sq, double eps);

/// Value, gradient and Hessian of a scalar with respect to the 12 stacked coordinates of the
/// four points of a pair: (p, t0, t1, t2) for point-triangle, (a0, a1, b0, b1) for edge-edge.
struct PairDerivatives {
  double value = 0.0;
  Vec12 grad = Vec12::Zero();
  Mat12 hess = Mat12::Zero();
};

/// Derivatives of the squared distance of the given region. `x` holds the four points.
PairDerivatives distance_sq_derivatives(const std::array<Vec3, 4>& x, DistanceRegion region);

/// Squared distance of the given region, evaluated with the same closed form as the derivatives.
double distance_sq_in_region(const std::array<Vec3, 4>& x, DistanceRegion region);

/// Derivatives of the edge-edge mollifier for edges (x0, x1) and (x2, x3).
PairDerivatives edge_edge_mollifier_derivatives(const std::array<Vec3, 4>& x, double eps);

/// Barycentric weights w with relative vector sum_k w_k x_k pointing from the closest point on
/// the second feature to the closest point on the first (p minus triangle point, or edge a minus
/// edge b). Used to freeze friction closest points.
std::array<double, 4> closest_point_weights(const std::array<Vec3, 4>& x, DistanceRegion region);

}  // namespace abd
