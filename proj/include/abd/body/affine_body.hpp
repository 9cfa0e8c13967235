#pragma once

#include <span>

#include "abd/geometry/mesh.hpp"
#include "abd/types.hpp"

namespace abd {

/// q = (p, a1, a2, a3) with the a_i the rows of A; x = A x_bar + p.
inline Vec3 translation(const Vec12& q) { return q.head<3>(); }
Mat3 linear_part(const Vec12& q);
Vec12 make_coords(const Vec3& p, const Mat3& a);
inline Vec12 identity_coords() { return make_coords(Vec3::Zero(), Mat3::Identity()); }

Vec3 world_position(const Vec12& q, const Vec3& x_bar);
Mat3x12 jacobian(const Vec3& x_bar);

/// J(x_bar)^T v without forming J.
Vec12 jacobian_transpose_times(const Vec3& x_bar, const Vec3& v);

/// ||A A^T - I||_F.
double orthogonality_error(const Vec12& q);

struct GeneralizedMass {
  double mass = 0.0;
  Vec3 first_moment = Vec3::Zero();
  Mat3 second_moment = Mat3::Zero();
  double volume = 0.0;
  Mat12 matrix = Mat12::Zero();
};

/// Exact moments of the solid bounded by a closed, outward-oriented mesh. Throws GeometryError
/// for an open mesh or non-positive enclosed volume.
GeneralizedMass mass_matrix(const SurfaceMesh& mesh, double density);

/// Assembles the 12x12 matrix from the three moments.
Mat12 assemble_mass(double mass, const Vec3& first_moment, const Mat3& second_moment);

/// Orthogonality potential scaled by `stiffness` = kappa * volume.
double ortho_energy(const Vec12& q, double stiffness);
Vec12 ortho_gradient(const Vec12& q, double stiffness);
Mat12 ortho_hessian(const Vec12& q, double stiffness, bool project_psd);

struct PointForce {
  Vec3 x_bar = Vec3::Zero();
  Vec3 force = Vec3::Zero();
};

/// Gravity on the whole body plus J(x_bar)^T f for every point force.
Vec12 external_generalized_force(const GeneralizedMass& m, const Vec3& gravity, std::span<const PointForce> forces);

/// Torque tau applied as an antisymmetric pair of point forces around `center` (rest frame).
std::array<PointForce, 2> torque_as_point_forces(const Vec3& center, const Vec3& torque);

}  // namespace abd
