#pragma once

#include <span>

#include "abd/contact/candidates.hpp"
#include "abd/parallel.hpp"
#include "abd/types.hpp"

namespace abd {

struct CcdQuery {
  bool edge_edge = false;
  /// (p, t0, t1, t2) for vertex-face, (a0, a1, b0, b1) for edge-edge.
  std::array<Vec3, 4> x;
  std::array<Vec3, 4> dx;
  double slack = 0.1;
  double t_max = 1.0;
};

/// Additive conservative advancement. Returns t in (0, t_max] such that the distance stays at
/// least slack * d0 over [0, t]. Throws ContractViolation when the start distance is not positive.
double accd_toi(const CcdQuery& query);

/// Largest certified fraction of the step `disp` (per-vertex displacements) over all candidates;
/// 1 for an empty set.
double step_filter(std::span<const CollisionShape> shapes, const Positions& pos, const Positions& disp,
                   const CandidateSet& candidates, double slack, const Executor& exec = Executor());

}  // namespace abd
