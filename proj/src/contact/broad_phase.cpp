#include "abd/contact/candidates.hpp"

#include <algorithm>
#include <functional>

#include "abd/body/affine_body.hpp"

namespace abd {

bool is_edge_edge(const ContactPair& p) { return p.kind == PairKind::edge_edge; }

Aabb swept_box(std::span<const int> vertex_ids, const std::vector<Vec3>& start, const std::vector<Vec3>& end,
               double inflation) {
  Aabb box;
  for (int v : vertex_ids) {
    box.expand(start[v]);
    box.expand(end[v]);
  }
  box.inflate(inflation);
  return box;
}

namespace {

enum class ItemKind : std::uint8_t { vertex, edge, face };

struct Item {
  ItemKind kind;
  int index;
  Aabb box;
  Vec3 centroid;
};

struct Leaf {
  Aabb box;
  std::vector<Item> items;
};

// Three-level binary tree: the root splits in two, each child splits again, four leaves remain.
struct ShallowTree {
  Aabb root;
  std::array<Aabb, 2> mid;
  std::array<Leaf, 4> leaves;
};

Aabb box_of_items(std::span<const Item> items) {
  Aabb b;
  for (const auto& it : items) b.expand(it.box);
  return b;
}

void split_median(std::span<Item> items, std::span<Item>& left, std::span<Item>& right) {
  Aabb cb;
  for (const auto& it : items) cb.expand(it.centroid);
  int axis = 0;
  if (!items.empty()) cb.extent().maxCoeff(&axis);
  const auto mid = items.begin() + static_cast<std::ptrdiff_t>(items.size() / 2);
  std::nth_element(items.begin(), mid, items.end(), [axis](const Item& x, const Item& y) {
    if (x.centroid[axis] != y.centroid[axis]) return x.centroid[axis] < y.centroid[axis];
    if (x.kind != y.kind) return x.kind < y.kind;
    return x.index < y.index;
  });
  left = items.first(items.size() / 2);
  right = items.subspan(items.size() / 2);
}

ShallowTree build_tree(std::vector<Item>& items) {
  ShallowTree t;
  t.root = box_of_items(items);
  std::span<Item> all(items);
  std::array<std::span<Item>, 2> half;
  split_median(all, half[0], half[1]);
  for (int c = 0; c < 2; ++c) {
    t.mid[c] = box_of_items(half[c]);
    std::span<Item> l, r;
    split_median(half[c], l, r);
    t.leaves[2 * c].items.assign(l.begin(), l.end());
    t.leaves[2 * c + 1].items.assign(r.begin(), r.end());
    t.leaves[2 * c].box = box_of_items(l);
    t.leaves[2 * c + 1].box = box_of_items(r);
  }
  return t;
}

std::vector<Item> clip_items(const SurfaceMesh& mesh, const std::vector<Vec3>& start, const std::vector<Vec3>& end,
                             const Aabb& overlap, double half_inflation) {
  std::vector<Item> items;
  auto add = [&](ItemKind kind, int index, std::span<const int> ids) {
    Aabb box = swept_box(ids, start, end, half_inflation);
    if (!aabb_intersects(box, overlap)) return;
    items.push_back({kind, index, box, box.center()});
  };
  for (int v = 0; v < mesh.num_vertices(); ++v) {
    const int ids[1] = {v};
    add(ItemKind::vertex, v, ids);
  }
  const auto& edges = mesh.edges();
  for (int e = 0; e < mesh.num_edges(); ++e) add(ItemKind::edge, e, edges[e]);
  const auto& tris = mesh.triangles();
  for (int f = 0; f < mesh.num_triangles(); ++f) add(ItemKind::face, f, tris[f]);
  return items;
}

void leaf_pairs(const Leaf& la, const Leaf& lb, int body_a, int body_b, std::vector<ContactPair>& out) {
  for (const auto& x : la.items) {
    for (const auto& y : lb.items) {
      PairKind kind;
      if (x.kind == ItemKind::vertex && y.kind == ItemKind::face) {
        kind = PairKind::vertex_face;
      } else if (x.kind == ItemKind::face && y.kind == ItemKind::vertex) {
        kind = PairKind::face_vertex;
      } else if (x.kind == ItemKind::edge && y.kind == ItemKind::edge) {
        kind = PairKind::edge_edge;
      } else {
        continue;
      }
      if (aabb_intersects(x.box, y.box)) out.push_back({kind, body_a, body_b, x.index, y.index});
    }
  }
}

std::vector<ContactPair> body_pair_candidates(const CollisionShape& sa, const CollisionShape& sb, int a, int b,
                                              const Positions& start, const Positions& end, const Aabb& overlap,
                                              double d_hat) {
  std::vector<Item> ia = clip_items(*sa.mesh, start[a], end[a], overlap, 0.5 * d_hat);
  std::vector<Item> ib = clip_items(*sb.mesh, start[b], end[b], overlap, 0.5 * d_hat);
  std::vector<ContactPair> out;
  if (ia.empty() || ib.empty()) return out;
  const ShallowTree ta = build_tree(ia);
  const ShallowTree tb = build_tree(ib);
  if (!aabb_intersects(ta.root, tb.root)) return out;
  for (int ca = 0; ca < 2; ++ca) {
    for (int cb = 0; cb < 2; ++cb) {
      if (!aabb_intersects(ta.mid[ca], tb.mid[cb])) continue;
      for (int la = 2 * ca; la < 2 * ca + 2; ++la) {
        for (int lb = 2 * cb; lb < 2 * cb + 2; ++lb) {
          if (ta.leaves[la].items.empty() || tb.leaves[lb].items.empty()) continue;
          if (!aabb_intersects(ta.leaves[la].box, tb.leaves[lb].box)) continue;
          leaf_pairs(ta.leaves[la], tb.leaves[lb], a, b, out);
        }
      }
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

CandidateSet broad_phase(std::span<const CollisionShape> shapes, const Positions& start, const Positions& end,
                         double d_hat, const Executor& exec) {
  const int n = static_cast<int>(shapes.size());
  std::vector<Aabb> boxes(n);
  for (int b = 0; b < n; ++b) {
    Aabb box = aabb_of(start[b], 0.0);
    box.expand(aabb_of(end[b], 0.0));
    box.inflate(d_hat);
    boxes[b] = box;
  }

  CandidateSet set;
  std::vector<Aabb> overlaps;
  for (int a = 0; a < n; ++a) {
    for (int b = a + 1; b < n; ++b) {
      if (shapes[a].kinematic && shapes[b].kinematic) continue;
      if (auto o = aabb_overlap(boxes[a], boxes[b])) {
        set.overlapping_bodies.push_back({a, b});
        overlaps.push_back(*o);
      }
    }
  }

  std::vector<std::vector<ContactPair>> per_pair(overlaps.size());
  exec.for_each(overlaps.size(), [&](std::size_t k) {
    const auto [a, b] = set.overlapping_bodies[k];
    per_pair[k] = body_pair_candidates(shapes[a], shapes[b], a, b, start, end, overlaps[k], d_hat);
  });

  for (std::size_t k = 0; k < per_pair.size(); ++k) {
    if (per_pair[k].empty()) continue;
    const int begin = static_cast<int>(set.pairs.size());
    set.pairs.insert(set.pairs.end(), per_pair[k].begin(), per_pair[k].end());
    set.groups.push_back({set.overlapping_bodies[k][0], set.overlapping_bodies[k][1], begin,
                          static_cast<int>(set.pairs.size())});
  }
  return set;
}

namespace {

struct BvhNode {
  Aabb box;  // rest frame
  int left = -1;
  int right = -1;
  std::vector<int> tris;
  int unique_vertices = 0;
  int unique_edges = 0;
};

struct Bvh {
  std::vector<BvhNode> nodes;
};

int build_bvh(Bvh& bvh, const SurfaceMesh& mesh, std::vector<int>& tris, std::size_t lo, std::size_t hi) {
  const auto& v = mesh.vertices();
  const auto& t = mesh.triangles();
  BvhNode node;
  Aabb cb;
  for (std::size_t i = lo; i < hi; ++i) {
    for (int k = 0; k < 3; ++k) node.box.expand(v[t[tris[i]][k]]);
    cb.expand((v[t[tris[i]][0]] + v[t[tris[i]][1]] + v[t[tris[i]][2]]) / 3.0);
  }
  const int id = static_cast<int>(bvh.nodes.size());
  bvh.nodes.push_back(node);
  if (hi - lo <= 8) {
    std::vector<int> vs;
    std::vector<long long> es;
    for (std::size_t i = lo; i < hi; ++i) {
      const auto& f = t[tris[i]];
      for (int k = 0; k < 3; ++k) {
        vs.push_back(f[k]);
        es.push_back(static_cast<long long>(std::min(f[k], f[(k + 1) % 3])) * mesh.num_vertices() +
                     std::max(f[k], f[(k + 1) % 3]));
      }
    }
    std::sort(vs.begin(), vs.end());
    std::sort(es.begin(), es.end());
    auto& leaf = bvh.nodes[id];
    leaf.tris.assign(tris.begin() + lo, tris.begin() + hi);
    leaf.unique_vertices = static_cast<int>(std::unique(vs.begin(), vs.end()) - vs.begin());
    leaf.unique_edges = static_cast<int>(std::unique(es.begin(), es.end()) - es.begin());
    return id;
  }
  int axis = 0;
  cb.extent().maxCoeff(&axis);
  const std::size_t mid = (lo + hi) / 2;
  auto centroid = [&](int f) { return v[t[f][0]][axis] + v[t[f][1]][axis] + v[t[f][2]][axis]; };
  std::nth_element(tris.begin() + lo, tris.begin() + mid, tris.begin() + hi, [&](int x, int y) {
    const double cx = centroid(x), cy = centroid(y);
    return cx != cy ? cx < cy : x < y;
  });
  const int l = build_bvh(bvh, mesh, tris, lo, mid);
  const int r = build_bvh(bvh, mesh, tris, mid, hi);
  bvh.nodes[id].left = l;
  bvh.nodes[id].right = r;
  return id;
}

Aabb transformed_box(const Aabb& rest, const Vec12& q, double inflation) {
  Aabb out;
  for (int c = 0; c < 8; ++c) {
    const Vec3 corner((c & 1) ? rest.hi.x() : rest.lo.x(), (c & 2) ? rest.hi.y() : rest.lo.y(),
                      (c & 4) ? rest.hi.z() : rest.lo.z());
    out.expand(world_position(q, corner));
  }
  out.inflate(inflation);
  return out;
}

}  // namespace

std::size_t full_bvh_pair_count(std::span<const CollisionShape> shapes, std::span<const Vec12> q, double d_hat) {
  const int n = static_cast<int>(shapes.size());
  std::vector<Bvh> bvhs(n);
  std::vector<std::vector<Aabb>> world(n);
  for (int b = 0; b < n; ++b) {
    std::vector<int> tris(shapes[b].mesh->num_triangles());
    for (std::size_t i = 0; i < tris.size(); ++i) tris[i] = static_cast<int>(i);
    build_bvh(bvhs[b], *shapes[b].mesh, tris, 0, tris.size());
    for (const auto& node : bvhs[b].nodes) world[b].push_back(transformed_box(node.box, q[b], 0.5 * d_hat));
  }
  std::size_t count = 0;
  for (int a = 0; a < n; ++a) {
    for (int b = a + 1; b < n; ++b) {
      if (shapes[a].kinematic && shapes[b].kinematic) continue;
      std::function<void(int, int)> visit = [&](int x, int y) {
        if (!aabb_intersects(world[a][x], world[b][y])) return;
        const auto& nx = bvhs[a].nodes[x];
        const auto& ny = bvhs[b].nodes[y];
        const bool lx = nx.left < 0;
        const bool ly = ny.left < 0;
        if (lx && ly) {
          count += static_cast<std::size_t>(nx.unique_vertices) * ny.tris.size() +
                   nx.tris.size() * static_cast<std::size_t>(ny.unique_vertices) +
                   static_cast<std::size_t>(nx.unique_edges) * ny.unique_edges;
          return;
        }
        if (ly || (!lx && world[a][x].extent().maxCoeff() >= world[b][y].extent().maxCoeff())) {
          visit(nx.left, y);
          visit(nx.right, y);
        } else {
          visit(x, ny.left);
          visit(x, ny.right);
        }
      };
      visit(0, 0);
    }
  }
  return count;
}

}  // namespace abd
