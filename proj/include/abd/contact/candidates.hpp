#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <span>
#include <tuple>
#include <vector>

#include "abd/contact/collision_shape.hpp"
#include "abd/geometry/aabb.hpp"
#include "abd/parallel.hpp"

namespace abd {

enum class PairKind : std::uint8_t {
  vertex_face,  // vertex prim_a of body_a against triangle prim_b of body_b
  face_vertex,  // triangle prim_a of body_a against vertex prim_b of body_b
  edge_edge,
};

struct ContactPair {
  PairKind kind = PairKind::vertex_face;
  int body_a = 0;
  int body_b = 0;
  int prim_a = 0;
  int prim_b = 0;

  bool operator==(const ContactPair&) const = default;
  auto operator<=>(const ContactPair& o) const {
    return std::tie(body_a, body_b, kind, prim_a, prim_b) <=> std::tie(o.body_a, o.body_b, o.kind, o.prim_a, o.prim_b);
  }
};

bool is_edge_edge(const ContactPair& p);

/// Contiguous run of pairs sharing one body pair.
struct BodyPairGroup {
  int body_a = 0;
  int body_b = 0;
  int begin = 0;
  int end = 0;
};

struct CandidateSet {
  /// Sorted by (body_a, body_b, kind, prim_a, prim_b); no duplicates.
  std::vector<ContactPair> pairs;
  std::vector<BodyPairGroup> groups;
  /// Body pairs whose inflated boxes overlap (the i-AABB set), sorted.
  std::vector<std::array<int, 2>> overlapping_bodies;

  std::size_t size() const { return pairs.size(); }
  bool empty() const { return pairs.empty(); }
};

/// i-AABB culling over the search interval from `start` to `end` positions. Body boxes cover the
/// union of both endpoints inflated by d_hat; inside each pairwise overlap a three-level binary
/// tree per side yields vertex-face and edge-edge candidates. Pairs of two kinematic bodies are
/// skipped.
CandidateSet broad_phase(std::span<const CollisionShape> shapes, const Positions& start, const Positions& end,
                         double d_hat, const Executor& exec = Executor());

/// Primitive-pair count produced by a regular full-body BVH over rest-frame triangles (leaf size
/// 8, leaf boxes from transformed corners), used as the comparison baseline for culling.
std::size_t full_bvh_pair_count(std::span<const CollisionShape> shapes, std::span<const Vec12> q, double d_hat);

/// Box of the union of start and end positions of the given vertex indices.
Aabb swept_box(std::span<const int> vertex_ids, const std::vector<Vec3>& start, const std::vector<Vec3>& end,
               double inflation);

}  // namespace abd
