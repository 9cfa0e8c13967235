#pragma once

#include <span>
#include <vector>

#include "abd/contact/candidates.hpp"
#include "abd/geometry/distance.hpp"

namespace abd {

/// The four points of a pair in distance-kernel order, with their rest positions and the side
/// (0 = body_a, 1 = body_b) each point belongs to.
struct PairStencil {
  std::array<Vec3, 4> x;
  std::array<Vec3, 4> x_bar;
  std::array<int, 4> side;
  bool edge_edge = false;
};

PairStencil make_stencil(const ContactPair& pair, std::span<const CollisionShape> shapes, const Positions& pos);

/// Exact squared distance and region of a pair; edge-edge pairs carry their mollifier.
DistanceResult pair_distance(const ContactPair& pair, std::span<const CollisionShape> shapes, const Positions& pos);

/// Rest-pose mollifier threshold of an edge-edge pair.
double pair_mollifier_eps(const ContactPair& pair, std::span<const CollisionShape> shapes);

/// Maps a gradient over the four stencil points to the stacked coordinates (q_a, q_b).
Vec24 stencil_gradient(const PairStencil& s, const Vec12& g);
Mat24 stencil_hessian(const PairStencil& s, const Mat12& h);

/// Zeroes the kinematic side and clamps negative eigenvalues of the remaining block.
void project_pair_hessian(Mat24& h, bool kinematic_a, bool kinematic_b);

struct ContactParams {
  double kappa = 1e4;
  double d_hat = 1e-3;
};

/// Energy, gradient and Hessian of one pair in the stacked coordinates of its two bodies.
struct PairContribution {
  double energy = 0.0;
  Vec24 grad = Vec24::Zero();
  Mat24 hess = Mat24::Zero();
};

/// kappa * e * B(d^2) of one pair (e = 1 except for edge-edge). Returns false and leaves `out`
/// zero when d >= d_hat.
bool evaluate_contact_pair(const ContactPair& pair, std::span<const CollisionShape> shapes, const Positions& pos,
                           const ContactParams& params, bool with_hessian, bool project, PairContribution& out);

double contact_pair_energy(const ContactPair& pair, std::span<const CollisionShape> shapes, const Positions& pos,
                           const ContactParams& params);

/// Sum over candidates, in candidate order.
double contact_energy(std::span<const CollisionShape> shapes, const Positions& pos, const CandidateSet& candidates,
                      const ContactParams& params);

/// Exact minimum squared distance over all inter-body primitive pairs that involve at least one
/// dynamic body. +inf with fewer than two bodies.
double min_distance_sq(std::span<const CollisionShape> shapes, const Positions& pos);

}  // namespace abd
