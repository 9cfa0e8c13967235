#include "abd/contact/contact.hpp"

#include <algorithm>
#include <limits>

#include "abd/body/affine_body.hpp"
#include "abd/contact/barrier.hpp"
#include "abd/error.hpp"
#include "abd/psd.hpp"

namespace abd {

PairStencil make_stencil(const ContactPair& pair, std::span<const CollisionShape> shapes, const Positions& pos) {
  PairStencil s;
  auto put = [&](int k, int side, int vertex) {
    const int body = side == 0 ? pair.body_a : pair.body_b;
    s.x[k] = pos[body][vertex];
    s.x_bar[k] = shapes[body].mesh->vertices()[vertex];
    s.side[k] = side;
  };
  switch (pair.kind) {
    case PairKind::vertex_face: {
      const auto& f = shapes[pair.body_b].mesh->triangles()[pair.prim_b];
      put(0, 0, pair.prim_a);
      for (int k = 0; k < 3; ++k) put(k + 1, 1, f[k]);
      break;
    }
    case PairKind::face_vertex: {
      const auto& f = shapes[pair.body_a].mesh->triangles()[pair.prim_a];
      put(0, 1, pair.prim_b);
      for (int k = 0; k < 3; ++k) put(k + 1, 0, f[k]);
      break;
    }
    case PairKind::edge_edge: {
      const auto& ea = shapes[pair.body_a].mesh->edges()[pair.prim_a];
      const auto& eb = shapes[pair.body_b].mesh->edges()[pair.prim_b];
      put(0, 0, ea[0]);
      put(1, 0, ea[1]);
      put(2, 1, eb[0]);
      put(3, 1, eb[1]);
      s.edge_edge = true;
      break;
    }
  }
  return s;
}

double pair_mollifier_eps(const ContactPair& pair, std::span<const CollisionShape> shapes) {
  const auto& ma = *shapes[pair.body_a].mesh;
  const auto& mb = *shapes[pair.body_b].mesh;
  const auto& ea = ma.edges()[pair.prim_a];
  const auto& eb = mb.edges()[pair.prim_b];
  return edge_edge_mollifier_threshold(ma.vertices()[ea[0]], ma.vertices()[ea[1]], mb.vertices()[eb[0]],
                                       mb.vertices()[eb[1]]);
}

DistanceResult pair_distance(const ContactPair& pair, std::span<const CollisionShape> shapes, const Positions& pos) {
  const PairStencil s = make_stencil(pair, shapes, pos);
  if (s.edge_edge) return edge_edge_distance_sq(s.x[0], s.x[1], s.x[2], s.x[3], pair_mollifier_eps(pair, shapes));
  return point_triangle_distance_sq(s.x[0], s.x[1], s.x[2], s.x[3]);
}

Vec24 stencil_gradient(const PairStencil& s, const Vec12& g) {
  Vec24 out = Vec24::Zero();
  for (int k = 0; k < 4; ++k) {
    out.segment<12>(12 * s.side[k]) += jacobian_transpose_times(s.x_bar[k], g.segment<3>(3 * k));
  }
  return out;
}

Mat24 stencil_hessian(const PairStencil& s, const Mat12& h) {
  Eigen::Matrix<double, 12, 24> j = Eigen::Matrix<double, 12, 24>::Zero();
  for (int k = 0; k < 4; ++k) j.block<3, 12>(3 * k, 12 * s.side[k]) = jacobian(s.x_bar[k]);
  return j.transpose() * h * j;
}

void project_pair_hessian(Mat24& h, bool kinematic_a, bool kinematic_b) {
  if (kinematic_a) {
    h.topRows<12>().setZero();
    h.leftCols<12>().setZero();
  }
  if (kinematic_b) {
    h.bottomRows<12>().setZero();
    h.rightCols<12>().setZero();
  }
  if (kinematic_a && !kinematic_b) {
    auto block = h.bottomRightCorner<12, 12>();
    project_psd(block);
  } else if (kinematic_b && !kinematic_a) {
    auto block = h.topLeftCorner<12, 12>();
    project_psd(block);
  } else if (!kinematic_a) {
    project_psd(h);
  }
}

bool evaluate_contact_pair(const ContactPair& pair, std::span<const CollisionShape> shapes, const Positions& pos,
                           const ContactParams& params, bool with_hessian, bool project, PairContribution& out) {
  out = PairContribution{};
  const PairStencil s = make_stencil(pair, shapes, pos);
  DistanceResult dr = s.edge_edge ? edge_edge_distance_sq(s.x[0], s.x[1], s.x[2], s.x[3])
                                  : point_triangle_distance_sq(s.x[0], s.x[1], s.x[2], s.x[3]);
  const PairDerivatives dd = distance_sq_derivatives(s.x, dr.region);
  if (dd.value >= params.d_hat * params.d_hat) return false;
  const BarrierEval b = barrier(dd.value, params.d_hat);

  Vec12 g = b.d1 * dd.grad;
  Mat12 h = Mat12::Zero();
  if (with_hessian) h = b.d2 * dd.grad * dd.grad.transpose() + b.d1 * dd.hess;
  double energy = b.value;

  if (s.edge_edge) {
    const PairDerivatives m = edge_edge_mollifier_derivatives(s.x, pair_mollifier_eps(pair, shapes));
    if (m.value < 1.0) {
      if (with_hessian) {
        h = m.value * h + b.value * m.hess;
        h.noalias() += m.grad * g.transpose();
        h.noalias() += g * m.grad.transpose();
      }
      g = m.value * g + b.value * m.grad;
      energy *= m.value;
    }
  }

  out.energy = params.kappa * energy;
  out.grad = stencil_gradient(s, params.kappa * g);
  const bool kin_a = shapes[pair.body_a].kinematic;
  const bool kin_b = shapes[pair.body_b].kinematic;
  if (kin_a) out.grad.head<12>().setZero();
  if (kin_b) out.grad.tail<12>().setZero();
  if (with_hessian) {
    out.hess = stencil_hessian(s, params.kappa * h);
    if (project) {
      project_pair_hessian(out.hess, kin_a, kin_b);
    } else {
      if (kin_a) {
        out.hess.topRows<12>().setZero();
        out.hess.leftCols<12>().setZero();
      }
      if (kin_b) {
        out.hess.bottomRows<12>().setZero();
        out.hess.rightCols<12>().setZero();
      }
    }
  }
  return true;
}

double contact_pair_energy(const ContactPair& pair, std::span<const CollisionShape> shapes, const Positions& pos,
                           const ContactParams& params) {
  const PairStencil s = make_stencil(pair, shapes, pos);
  DistanceResult dr = s.edge_edge ? edge_edge_distance_sq(s.x[0], s.x[1], s.x[2], s.x[3])
                                  : point_triangle_distance_sq(s.x[0], s.x[1], s.x[2], s.x[3]);
  const double d_sq = distance_sq_in_region(s.x, dr.region);
  if (d_sq >= params.d_hat * params.d_hat) return 0.0;
  double e = barrier(d_sq, params.d_hat).value;
  if (s.edge_edge) {
    const Vec3 c = (s.x[1] - s.x[0]).cross(s.x[3] - s.x[2]);
    e *= edge_edge_mollifier(c.squaredNorm(), pair_mollifier_eps(pair, shapes));
  }
  return params.kappa * e;
}

double contact_energy(std::span<const CollisionShape> shapes, const Positions& pos, const CandidateSet& candidates,
                      const ContactParams& params) {
  double e = 0.0;
  for (const auto& p : candidates.pairs) e += contact_pair_energy(p, shapes, pos, params);
  return e;
}

namespace {

struct PrimitiveBoxes {
  std::vector<Aabb> vertices, edges, faces;
  Aabb body;
};

PrimitiveBoxes primitive_boxes(const SurfaceMesh& mesh, const std::vector<Vec3>& x) {
  PrimitiveBoxes b;
  for (const auto& p : x) {
    Aabb box;
    box.expand(p);
    b.vertices.push_back(box);
    b.body.expand(p);
  }
  for (const auto& e : mesh.edges()) {
    Aabb box;
    box.expand(x[e[0]]);
    box.expand(x[e[1]]);
    b.edges.push_back(box);
  }
  for (const auto& f : mesh.triangles()) {
    Aabb box;
    for (int k = 0; k < 3; ++k) box.expand(x[f[k]]);
    b.faces.push_back(box);
  }
  return b;
}

}  // namespace

double min_distance_sq(std::span<const CollisionShape> shapes, const Positions& pos) {
  const int n = static_cast<int>(shapes.size());
  std::vector<PrimitiveBoxes> boxes;
  boxes.reserve(n);
  for (int b = 0; b < n; ++b) boxes.push_back(primitive_boxes(*shapes[b].mesh, pos[b]));

  struct BodyPair {
    double gap_sq;
    int a, b;
  };
  std::vector<BodyPair> order;
  for (int a = 0; a < n; ++a) {
    for (int b = a + 1; b < n; ++b) {
      if (shapes[a].kinematic && shapes[b].kinematic) continue;
      order.push_back({aabb_distance_sq(boxes[a].body, boxes[b].body), a, b});
    }
  }
  std::sort(order.begin(), order.end(), [](const BodyPair& x, const BodyPair& y) {
    return x.gap_sq != y.gap_sq ? x.gap_sq < y.gap_sq : (x.a != y.a ? x.a < y.a : x.b < y.b);
  });

  double best = std::numeric_limits<double>::infinity();
  for (const auto& bp : order) {
    if (bp.gap_sq >= best) break;
    const auto& ma = *shapes[bp.a].mesh;
    const auto& mb = *shapes[bp.b].mesh;
    const auto& xa = pos[bp.a];
    const auto& xb = pos[bp.b];
    const auto& ba = boxes[bp.a];
    const auto& bb = boxes[bp.b];
    for (int v = 0; v < ma.num_vertices(); ++v) {
      if (aabb_distance_sq(ba.vertices[v], bb.body) >= best) continue;
      for (int f = 0; f < mb.num_triangles(); ++f) {
        if (aabb_distance_sq(ba.vertices[v], bb.faces[f]) >= best) continue;
        const auto& t = mb.triangles()[f];
        best = std::min(best, point_triangle_distance_sq(xa[v], xb[t[0]], xb[t[1]], xb[t[2]]).d_sq);
      }
    }
    for (int v = 0; v < mb.num_vertices(); ++v) {
      if (aabb_distance_sq(bb.vertices[v], ba.body) >= best) continue;
      for (int f = 0; f < ma.num_triangles(); ++f) {
        if (aabb_distance_sq(bb.vertices[v], ba.faces[f]) >= best) continue;
        const auto& t = ma.triangles()[f];
        best = std::min(best, point_triangle_distance_sq(xb[v], xa[t[0]], xa[t[1]], xa[t[2]]).d_sq);
      }
    }
    for (int i = 0; i < ma.num_edges(); ++i) {
      if (aabb_distance_sq(ba.edges[i], bb.body) >= best) continue;
      const auto& ea = ma.edges()[i];
      for (int j = 0; j < mb.num_edges(); ++j) {
        if (aabb_distance_sq(ba.edges[i], bb.edges[j]) >= best) continue;
        const auto& eb = mb.edges()[j];
        best = std::min(best, edge_edge_distance_sq(xa[ea[0]], xa[ea[1]], xb[eb[0]], xb[eb[1]]).d_sq);
      }
    }
  }
  return best;
}

}  // namespace abd
