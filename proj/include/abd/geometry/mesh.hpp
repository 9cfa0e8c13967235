#pragma once

#include <span>
#include <string>
#include <vector>

#include "abd/types.hpp"

namespace abd {

/// Sorted unique undirected edges, each stored as (min, max). Edges shared by more than two
/// triangles are logged and counted in `non_manifold`.
struct EdgeSet {
  std::vector<Edge> edges;
  int non_manifold = 0;
};

EdgeSet build_edges(std::span<const Triangle> triangles);

/// Rest-pose triangulated boundary of one body. Immutable once constructed.
class SurfaceMesh {
 public:
  SurfaceMesh() = default;
  /// Validates indices and rejects zero-area triangles.
  SurfaceMesh(std::vector<Vec3> vertices, std::vector<Triangle> triangles);

  const std::vector<Vec3>& vertices() const { return vertices_; }
  const std::vector<Triangle>& triangles() const { return triangles_; }
  const std::vector<Edge>& edges() const { return edges_; }
  bool manifold() const { return non_manifold_edges_ == 0; }

  int num_vertices() const { return static_cast<int>(vertices_.size()); }
  int num_triangles() const { return static_cast<int>(triangles_.size()); }
  int num_edges() const { return static_cast<int>(edges_.size()); }

  /// Throws GeometryError unless every edge is shared by exactly two triangles with opposite
  /// orientation. Required before integrating mass moments.
  void require_closed() const;

  /// Copy with every rest vertex mapped by x -> scale * x + offset.
  SurfaceMesh transformed(double scale, const Vec3& offset) const;

 private:
  std::vector<Vec3> vertices_;
  std::vector<Triangle> triangles_;
  std::vector<Edge> edges_;
  int non_manifold_edges_ = 0;
};

}  // namespace abd
