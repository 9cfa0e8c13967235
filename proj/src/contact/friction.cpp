#include "abd/contact/friction.hpp"

#include <cmath>

#include "abd/contact/barrier.hpp"
#include "abd/psd.hpp"

namespace abd {

namespace {

Mat32 tangent_basis(const Vec3& normal) {
  const Vec3 n = normal.normalized();
  const Vec3 helper = std::abs(n.x()) < 0.9 ? Vec3::UnitX() : Vec3::UnitY();
  const Vec3 t1 = n.cross(helper).normalized();
  const Vec3 t2 = n.cross(t1);
  Mat32 b;
  b << t1, t2;
  return b;
}

}  // namespace

double friction_f0(double y, double eps) {
  if (y >= eps) return y;
  return y * y * (-y / (3.0 * eps) + 1.0) / eps + eps / 3.0;
}

double friction_f1(double y, double eps) {
  if (y >= eps) return 1.0;
  return 2.0 * y / eps - y * y / (eps * eps);
}

std::vector<FrictionDatum> friction_precompute(std::span<const CollisionShape> shapes, const Positions& pos,
                                               const CandidateSet& candidates, const ContactParams& params) {
  std::vector<FrictionDatum> out;
  for (const auto& pair : candidates.pairs) {
    const PairStencil s = make_stencil(pair, shapes, pos);
    const DistanceResult dr = s.edge_edge ? edge_edge_distance_sq(s.x[0], s.x[1], s.x[2], s.x[3],
                                                                  pair_mollifier_eps(pair, shapes))
                                          : point_triangle_distance_sq(s.x[0], s.x[1], s.x[2], s.x[3]);
    if (dr.d_sq >= params.d_hat * params.d_hat) continue;
    const double d = std::sqrt(dr.d_sq);
    const double lambda = -params.kappa * dr.ee_parallel_mollifier * barrier_derivative_in_distance(d, params.d_hat);
    if (!(lambda > 0.0)) continue;
    FrictionDatum fd;
    fd.pair = pair;
    fd.lambda = lambda;
    fd.weights = closest_point_weights(s.x, dr.region);
    Vec3 normal = Vec3::Zero();
    for (int k = 0; k < 4; ++k) normal += fd.weights[k] * s.x[k];
    if (normal.squaredNorm() == 0.0) continue;
    fd.basis = tangent_basis(normal);
    out.push_back(fd);
  }
  return out;
}

bool evaluate_friction_pair(const FrictionDatum& datum, std::span<const CollisionShape> shapes, const Positions& pos,
                            const Positions& prev, double mu, double eps, bool with_hessian, bool project,
                            PairContribution& out) {
  out = PairContribution{};
  if (mu == 0.0 || datum.lambda == 0.0) return false;
  const PairStencil s = make_stencil(datum.pair, shapes, pos);
  const PairStencil s0 = make_stencil(datum.pair, shapes, prev);
  Vec3 rel = Vec3::Zero();
  for (int k = 0; k < 4; ++k) rel += datum.weights[k] * (s.x[k] - s0.x[k]);
  const Vec2 u = datum.basis.transpose() * rel;
  const double y = u.norm();
  const double scale = mu * datum.lambda;
  out.energy = scale * (friction_f0(y, eps) - eps / 3.0);

  // f1(y) / y, finite at y = 0
  const double f1_over_y = y >= eps ? 1.0 / y : 2.0 / eps - y / (eps * eps);
  const Vec3 force = scale * f1_over_y * (datum.basis * u);
  Vec12 g;
  for (int k = 0; k < 4; ++k) g.segment<3>(3 * k) = datum.weights[k] * force;
  out.grad = stencil_gradient(s, g);

  const bool kin_a = shapes[datum.pair.body_a].kinematic;
  const bool kin_b = shapes[datum.pair.body_b].kinematic;
  if (kin_a) out.grad.head<12>().setZero();
  if (kin_b) out.grad.tail<12>().setZero();

  if (with_hessian) {
    Mat2 hu = f1_over_y * Mat2::Identity();
    if (y >= eps) {
      hu -= u * u.transpose() / (y * y * y);
    } else if (y > 0.0) {
      hu -= u * u.transpose() / (eps * eps * y);
    }
    hu *= scale;
    if (project) project_psd(hu);
    const Mat3 h3 = datum.basis * hu * datum.basis.transpose();
    Mat12 h;
    for (int k = 0; k < 4; ++k) {
      for (int l = 0; l < 4; ++l) h.block<3, 3>(3 * k, 3 * l) = datum.weights[k] * datum.weights[l] * h3;
    }
    out.hess = stencil_hessian(s, h);
    if (kin_a) {
      out.hess.topRows<12>().setZero();
      out.hess.leftCols<12>().setZero();
    }
    if (kin_b) {
      out.hess.bottomRows<12>().setZero();
      out.hess.rightCols<12>().setZero();
    }
  }
  return true;
}

double friction_energy(std::span<const CollisionShape> shapes, const Positions& pos, const Positions& prev,
                       std::span<const FrictionDatum> data, double mu, double eps) {
  double e = 0.0;
  PairContribution c;
  for (const auto& d : data) {
    if (evaluate_friction_pair(d, shapes, pos, prev, mu, eps, false, false, c)) e += c.energy;
  }
  return e;
}

}  // namespace abd
