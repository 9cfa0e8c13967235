#include "abd/contact/collision_shape.hpp"

#include "abd/body/affine_body.hpp"

namespace abd {

std::vector<Vec3> world_vertices(const SurfaceMesh& mesh, const Vec12& q) {
  std::vector<Vec3> out;
  out.reserve(mesh.vertices().size());
  for (const auto& v : mesh.vertices()) out.push_back(world_position(q, v));
  return out;
}

std::vector<Vec3> vertex_displacements(const SurfaceMesh& mesh, const Vec12& dq) {
  return world_vertices(mesh, dq);
}

}  // namespace abd
