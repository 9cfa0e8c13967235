#pragma once

#include <span>
#include <vector>

#include "abd/contact/contact.hpp"

namespace abd {

/// Friction quantities frozen at the start of a step.
struct FrictionDatum {
  ContactPair pair;
  double lambda = 0.0;
  Mat32 basis = Mat32::Zero();
  std::array<double, 4> weights{};
};

/// Active pairs (d < d_hat at `pos`) with their lagged normal force magnitude
/// lambda = -kappa * e * dB/dd, an orthonormal tangent basis and closest-point weights.
std::vector<FrictionDatum> friction_precompute(std::span<const CollisionShape> shapes, const Positions& pos,
                                               const CandidateSet& candidates, const ContactParams& params);

/// C1 mollifier f0 and its derivative f1; f0(y) = y for y >= eps.
double friction_f0(double y, double eps);
double friction_f1(double y, double eps);

/// mu * lambda * (f0(|u|) - eps/3), u the tangential relative displacement since `prev`.
bool evaluate_friction_pair(const FrictionDatum& datum, std::span<const CollisionShape> shapes, const Positions& pos,
                            const Positions& prev, double mu, double eps, bool with_hessian, bool project,
                            PairContribution& out);

double friction_energy(std::span<const CollisionShape> shapes, const Positions& pos, const Positions& prev,
                       std::span<const FrictionDatum> data, double mu, double eps);

}  // namespace abd
