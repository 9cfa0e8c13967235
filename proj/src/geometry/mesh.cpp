#include "abd/geometry/mesh.hpp"

#include <algorithm>
#include <map>

#include <spdlog/spdlog.h>

#include "abd/error.hpp"

namespace abd {

EdgeSet build_edges(std::span<const Triangle> triangles) {
  std::vector<Edge> all;
  all.reserve(triangles.size() * 3);
  for (const Triangle& t : triangles) {
    for (int k = 0; k < 3; ++k) {
      int a = t[k];
      int b = t[(k + 1) % 3];
      all.push_back({std::min(a, b), std::max(a, b)});
    }
  }
  std::sort(all.begin(), all.end());

  EdgeSet out;
  for (std::size_t i = 0; i < all.size();) {
    std::size_t j = i;
    while (j < all.size() && all[j] == all[i]) ++j;
    if (j - i > 2) {
      ++out.non_manifold;
      spdlog::warn("non-manifold edge ({}, {}) shared by {} triangles", all[i][0], all[i][1], j - i);
    }
    out.edges.push_back(all[i]);
    i = j;
  }
  return out;
}

SurfaceMesh::SurfaceMesh(std::vector<Vec3> vertices, std::vector<Triangle> triangles)
    : vertices_(std::move(vertices)), triangles_(std::move(triangles)) {
  const int n = num_vertices();
  for (std::size_t i = 0; i < triangles_.size(); ++i) {
    const Triangle& t = triangles_[i];
    for (int v : t) {
      if (v < 0 || v >= n) {
        throw GeometryError("triangle " + std::to_string(i) + " references vertex " + std::to_string(v) +
                            " outside [0, " + std::to_string(n) + ")");
      }
    }
    const Vec3 e0 = vertices_[t[1]] - vertices_[t[0]];
    const Vec3 e1 = vertices_[t[2]] - vertices_[t[0]];
    const double scale = e0.squaredNorm() * e1.squaredNorm();
    if (!(e0.cross(e1).squaredNorm() > 1e-24 * scale) || scale == 0.0) {
      throw GeometryError("triangle " + std::to_string(i) + " is degenerate (zero area)");
    }
  }
  EdgeSet es = build_edges(triangles_);
  edges_ = std::move(es.edges);
  non_manifold_edges_ = es.non_manifold;
}

void SurfaceMesh::require_closed() const {
  // Each directed half-edge must appear once and be matched by its reverse.
  std::map<std::pair<int, int>, int> directed;
  for (const Triangle& t : triangles_) {
    for (int k = 0; k < 3; ++k) ++directed[{t[k], t[(k + 1) % 3]}];
  }
  for (const auto& [e, count] : directed) {
    if (count != 1) {
      throw GeometryError("mesh is not orientable: half-edge (" + std::to_string(e.first) + ", " +
                          std::to_string(e.second) + ") used " + std::to_string(count) + " times");
    }
    auto it = directed.find({e.second, e.first});
    if (it == directed.end()) {
      throw GeometryError("mesh is open: edge (" + std::to_string(e.first) + ", " + std::to_string(e.second) +
                          ") has no opposite triangle");
    }
  }
}

SurfaceMesh SurfaceMesh::transformed(double scale, const Vec3& offset) const {
  std::vector<Vec3> v = vertices_;
  for (Vec3& x : v) x = scale * x + offset;
  return SurfaceMesh(std::move(v), triangles_);
}

}  // namespace abd
