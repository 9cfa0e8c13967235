#include "abd/ccd/accd.hpp"

#include <algorithm>
#include <cmath>

#include "abd/contact/contact.hpp"
#include "abd/error.hpp"
#include "abd/geometry/distance.hpp"

namespace abd {

namespace {

double query_distance(const CcdQuery& q, const std::array<Vec3, 4>& x) {
  const DistanceResult r = q.edge_edge ? edge_edge_distance_sq(x[0], x[1], x[2], x[3])
                                       : point_triangle_distance_sq(x[0], x[1], x[2], x[3]);
  return std::sqrt(r.d_sq);
}

}  // namespace

double accd_toi(const CcdQuery& query) {
  std::array<Vec3, 4> dx = query.dx;
  Vec3 mean = Vec3::Zero();
  for (const auto& d : dx) mean += d;
  mean /= 4.0;
  for (auto& d : dx) d -= mean;

  double l_p;
  if (query.edge_edge) {
    l_p = std::max(dx[0].norm(), dx[1].norm()) + std::max(dx[2].norm(), dx[3].norm());
  } else {
    l_p = dx[0].norm() + std::max({dx[1].norm(), dx[2].norm(), dx[3].norm()});
  }

  const double d0 = query_distance(query, query.x);
  if (!(d0 > 0.0)) throw ContractViolation("accd_toi: query starts at zero distance");
  if (l_p == 0.0) return query.t_max;

  const double gap = query.slack * d0;
  std::array<Vec3, 4> x = query.x;
  double d = d0;
  double t = 0.0;
  for (int iter = 0; iter < 512; ++iter) {
    const double inc = (d - gap) / l_p;
    if (t + inc >= query.t_max) return query.t_max;
    t += inc;
    for (int k = 0; k < 4; ++k) x[k] = query.x[k] + t * dx[k];
    d = query_distance(query, x);
    if (d - gap < 1e-12 * d0) break;
  }
  return t;
}

double step_filter(std::span<const CollisionShape> shapes, const Positions& pos, const Positions& disp,
                   const CandidateSet& candidates, double slack, const Executor& exec) {
  std::vector<double> toi(candidates.size(), 1.0);
  exec.for_each(candidates.size(), [&](std::size_t i) {
    const ContactPair& p = candidates.pairs[i];
    const PairStencil s = make_stencil(p, shapes, pos);
    const PairStencil ds = make_stencil(p, shapes, disp);
    CcdQuery q;
    q.edge_edge = s.edge_edge;
    q.x = s.x;
    q.dx = ds.x;
    q.slack = slack;
    toi[i] = accd_toi(q);
  });
  double alpha = 1.0;
  for (double t : toi) alpha = std::min(alpha, t);
  return alpha;
}

}  // namespace abd
