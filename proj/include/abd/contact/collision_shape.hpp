#pragma once

#include <vector>

#include "abd/geometry/mesh.hpp"
#include "abd/types.hpp"

namespace abd {

/// What contact code needs to know about a body: its rest mesh and whether it carries unknowns.
struct CollisionShape {
  const SurfaceMesh* mesh = nullptr;
  bool kinematic = false;
};

/// World-space vertex positions, one vector per body.
using Positions = std::vector<std::vector<Vec3>>;

std::vector<Vec3> world_vertices(const SurfaceMesh& mesh, const Vec12& q);

/// Per-vertex displacement J(x_bar) dq; linear in dq so positions along a search are exact.
std::vector<Vec3> vertex_displacements(const SurfaceMesh& mesh, const Vec12& dq);

}  // namespace abd
