#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>
#include <gtest/gtest.h>

#include "abd/body/affine_body.hpp"
#include "abd/contact/barrier.hpp"
#include "abd/contact/contact.hpp"
#include "abd/contact/friction.hpp"
#include "abd/error.hpp"
#include "abd/geometry/primitives.hpp"
#include "oracles.hpp"

using namespace abd;

namespace {

SurfaceMesh make_tet() {
  return SurfaceMesh({Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(0, 0, 1)},
                     {{0, 2, 1}, {0, 1, 3}, {0, 3, 2}, {1, 2, 3}});
}

Mat3 random_rotation(std::mt19937_64& rng) {
  std::normal_distribution<double> n;
  return Eigen::Quaterniond(n(rng), n(rng), n(rng), n(rng)).normalized().toRotationMatrix();
}

Vec12 random_near_rigid(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Mat3 a = random_rotation(rng);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) a(i, j) += 0.05 * u(rng);
  return make_coords(Vec3(u(rng), u(rng), u(rng)), a);
}

Positions positions_of(std::span<const CollisionShape> shapes, const Vec12& qa, const Vec12& qb) {
  return {world_vertices(*shapes[0].mesh, qa), world_vertices(*shapes[1].mesh, qb)};
}

// Translates body a so the pair sits at distance d along its current closest direction.
Vec12 place_at_distance(const ContactPair& pair, std::span<const CollisionShape> shapes, Vec12 qa, const Vec12& qb,
                        double d) {
  const Positions pos = positions_of(shapes, qa, qb);
  const PairStencil s = make_stencil(pair, shapes, pos);
  const DistanceResult dr = pair_distance(pair, shapes, pos);
  const auto w = closest_point_weights(s.x, dr.region);
  Vec3 r = Vec3::Zero();
  for (int k = 0; k < 4; ++k) r += w[k] * s.x[k];
  // r points from the body_b feature toward the body_a feature except for face_vertex pairs.
  const double sign = pair.kind == PairKind::face_vertex ? -1.0 : 1.0;
  qa.head<3>() += sign * r * (d / r.norm() - 1.0);
  return qa;
}

struct Fixture {
  SurfaceMesh a = make_tet();
  SurfaceMesh b = make_tet().transformed(1.3, Vec3(0.1, -0.2, 0.05));
  std::array<CollisionShape, 2> shapes{CollisionShape{&a, false}, CollisionShape{&b, false}};
};

ContactPair random_pair(std::mt19937_64& rng, const Fixture& f) {
  std::uniform_int_distribution<int> kind(0, 2), v(0, 3), e(0, 5);
  switch (kind(rng)) {
    case 0: return {PairKind::vertex_face, 0, 1, v(rng), v(rng)};
    case 1: return {PairKind::face_vertex, 0, 1, v(rng), v(rng)};
    default: return {PairKind::edge_edge, 0, 1, e(rng) % f.a.num_edges(), e(rng) % f.b.num_edges()};
  }
}

Eigen::VectorXd stack(const Vec12& a, const Vec12& b) {
  Eigen::VectorXd z(24);
  z << a, b;
  return z;
}

}  // namespace

TEST(Barrier, Examples) {
  const double d_hat = 1e-3;
  EXPECT_EQ(barrier(d_hat * d_hat, d_hat).value, 0.0);
  EXPECT_EQ(barrier(4.0 * d_hat * d_hat, d_hat).value, 0.0);
  const double v = barrier(0.25 * d_hat * d_hat, d_hat).value;
  EXPECT_NEAR(v, 0.25 * d_hat * d_hat * std::log(2.0), 1e-20);
  EXPECT_NEAR(v, 1.7329e-7, 1e-11);
  EXPECT_THROW(barrier(0.0, d_hat), IntersectionError);
  EXPECT_THROW(barrier(-1.0, d_hat), IntersectionError);
  double prev = 0.0;
  for (double d = 0.5 * d_hat; d > 1e-12; d *= 0.5) {
    const double b = barrier(d * d, d_hat).value;
    EXPECT_GT(b, prev);
    prev = b;
  }
}

TEST(Barrier, SmoothClampAtDhat) {
  const double d_hat = 1e-3;
  double last_v = INFINITY, last_d1 = INFINITY, last_d2 = INFINITY;
  for (double gap = 1e-1; gap > 1e-7; gap *= 0.1) {
    const double d = d_hat * (1.0 - gap);
    const BarrierEval b = barrier(d * d, d_hat);
    EXPECT_LT(std::abs(b.value), last_v);
    EXPECT_LT(std::abs(b.d1), last_d1);
    EXPECT_LT(std::abs(b.d2), last_d2);
    last_v = std::abs(b.value);
    last_d1 = std::abs(b.d1);
    last_d2 = std::abs(b.d2);
  }
  EXPECT_LT(last_v, 1e-20);
  EXPECT_LT(last_d1 * d_hat * d_hat, 1e-12);
  EXPECT_LT(last_d2 * d_hat * d_hat * d_hat * d_hat, 1e-6);
}

TEST(Barrier, ChainRuleMatchesFiniteDifferences) {
  const double d_hat = 1e-3;
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.05, 0.98);
  for (int i = 0; i < 1000; ++i) {
    const double d = u(rng) * d_hat;
    const double x = d * d;
    const double h = 1e-6 * x;
    const BarrierEval b = barrier(x, d_hat);
    const double fd1 = (barrier(x + h, d_hat).value - barrier(x - h, d_hat).value) / (2 * h);
    const double fd2 = (barrier(x + h, d_hat).d1 - barrier(x - h, d_hat).d1) / (2 * h);
    ASSERT_NEAR(b.d1, fd1, 1e-5 * std::abs(fd1));
    ASSERT_NEAR(b.d2, fd2, 1e-4 * std::abs(fd2));
    ASSERT_NEAR(barrier_derivative_in_distance(d, d_hat), 2.0 * d * b.d1, 1e-10 * std::abs(2.0 * d * b.d1));
    ASSERT_LE(b.d1, 0.0);
  }
}

TEST(Contact, SinglePairAtHalfDhat) {
  Fixture f;
  const ContactParams params{1e4, 1e-3};
  const ContactPair pair{PairKind::vertex_face, 0, 1, 3, 0};
  Vec12 qb = identity_coords();
  // Face 0 of b lies in the plane z = 0.05 with outward normal -z; put a's apex below it.
  Vec12 qa = make_coords(Vec3(0.3, 0.0, 0.05 - 1.0 - 0.5e-3), Mat3::Identity());
  const Positions pos = positions_of(f.shapes, qa, qb);
  EXPECT_NEAR(std::sqrt(pair_distance(pair, f.shapes, pos).d_sq), 0.5e-3, 1e-12);
  const double expected = params.kappa * 0.25e-6 * std::log(2.0);
  EXPECT_NEAR(contact_pair_energy(pair, f.shapes, pos, params), expected, 1e-9 * expected);

  CandidateSet with_far;
  with_far.pairs = {pair, ContactPair{PairKind::vertex_face, 0, 1, 0, 3}};
  CandidateSet only;
  only.pairs = {pair};
  EXPECT_EQ(contact_energy(f.shapes, pos, with_far, params), contact_energy(f.shapes, pos, only, params));

  PairContribution far;
  EXPECT_FALSE(evaluate_contact_pair(with_far.pairs[1], f.shapes, pos, params, true, true, far));
  EXPECT_EQ(far.grad, Vec24::Zero());
  EXPECT_EQ(far.hess, Mat24::Zero());
}

TEST(Contact, DerivativesMatchFiniteDifferences) {
  Fixture f;
  const ContactParams params{1e4, 1e-3};
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> frac(0.2, 0.9);
  int checked = 0;
  while (checked < 1000) {
    const ContactPair pair = random_pair(rng, f);
    const Vec12 qb = random_near_rigid(rng);
    Vec12 qa = random_near_rigid(rng);
    qa = place_at_distance(pair, f.shapes, qa, qb, frac(rng) * params.d_hat);
    const Eigen::VectorXd z = stack(qa, qb);
    auto energy = [&](const Eigen::VectorXd& w) {
      return contact_pair_energy(pair, f.shapes, positions_of(f.shapes, w.head<12>(), w.tail<12>()), params);
    };
    auto grad = [&](const Eigen::VectorXd& w) -> Eigen::VectorXd {
      PairContribution c;
      evaluate_contact_pair(pair, f.shapes, positions_of(f.shapes, w.head<12>(), w.tail<12>()), params, false,
                            false, c);
      return c.grad;
    };
    PairContribution c;
    ASSERT_TRUE(evaluate_contact_pair(pair, f.shapes, positions_of(f.shapes, qa, qb), params, true, false, c));
    ASSERT_LT(oracle::rel_error(c.grad, oracle::fd_gradient(energy, z, 1e-8)), 1e-5) << checked;
    ASSERT_LT(oracle::rel_error(c.hess, oracle::fd_jacobian(grad, z, 1e-8)), 1e-4) << checked;
    ++checked;
  }
}

TEST(Contact, NearParallelEdgesUseMollifier) {
  Fixture f;
  const ContactParams params{1e4, 1e-3};
  const auto& ea = f.a.edges()[0];
  std::mt19937_64 rng(13);
  int mollified = 0;
  for (int i = 0; i < 200; ++i) {
    const ContactPair pair{PairKind::edge_edge, 0, 1, 0, static_cast<int>(rng() % f.b.num_edges())};
    const auto& eb = f.b.edges()[pair.prim_b];
    // Rotate a so its edge is almost parallel to b's edge.
    const Vec3 da = (f.a.vertices()[ea[1]] - f.a.vertices()[ea[0]]).normalized();
    const Vec3 db = (f.b.vertices()[eb[1]] - f.b.vertices()[eb[0]]).normalized();
    Mat3 r = Eigen::Quaterniond::FromTwoVectors(da, db).toRotationMatrix();
    std::normal_distribution<double> n(0.0, 0.02);
    const Vec3 axis = db.cross(Vec3(n(rng), n(rng), n(rng))).normalized();
    r = Eigen::AngleAxisd(n(rng), axis).toRotationMatrix() * r;
    Vec12 qa = make_coords(Vec3(0.3, 0.2, -0.1), r);
    const Vec12 qb = identity_coords();
    qa = place_at_distance(pair, f.shapes, qa, qb, 0.5e-3);
    const Positions pos = positions_of(f.shapes, qa, qb);
    const double e = pair_distance(pair, f.shapes, pos).ee_parallel_mollifier;
    if (e >= 1.0 || e < 0.05) continue;
    ++mollified;
    const Eigen::VectorXd z = stack(qa, qb);
    auto energy = [&](const Eigen::VectorXd& w) {
      return contact_pair_energy(pair, f.shapes, positions_of(f.shapes, w.head<12>(), w.tail<12>()), params);
    };
    PairContribution c;
    ASSERT_TRUE(evaluate_contact_pair(pair, f.shapes, pos, params, true, false, c));
    ASSERT_LT(oracle::rel_error(c.grad, oracle::fd_gradient(energy, z, 1e-8)), 1e-5);
  }
  EXPECT_GT(mollified, 20);
}

TEST(Contact, EnergyMonotoneInDistance) {
  Fixture f;
  const ContactParams params{1e4, 1e-3};
  std::mt19937_64 rng(14);
  for (int i = 0; i < 200; ++i) {
    const ContactPair pair = random_pair(rng, f);
    const Vec12 qb = random_near_rigid(rng);
    Vec12 qa = random_near_rigid(rng);
    double prev = std::numeric_limits<double>::infinity();
    for (double d = 0.1e-3; d < 1.2e-3; d += 0.1e-3) {
      qa = place_at_distance(pair, f.shapes, qa, qb, d);
      const double e = contact_pair_energy(pair, f.shapes, positions_of(f.shapes, qa, qb), params);
      EXPECT_LE(e, prev);
      prev = e;
    }
  }
}

TEST(Contact, ProjectedHessianIsPsd) {
  Fixture f;
  const ContactParams params{1e4, 1e-3};
  std::mt19937_64 rng(15);
  for (int i = 0; i < 300; ++i) {
    const ContactPair pair = random_pair(rng, f);
    const Vec12 qb = random_near_rigid(rng);
    const Vec12 qa = place_at_distance(pair, f.shapes, random_near_rigid(rng), qb, 0.4e-3);
    PairContribution c;
    ASSERT_TRUE(evaluate_contact_pair(pair, f.shapes, positions_of(f.shapes, qa, qb), params, true, true, c));
    Eigen::SelfAdjointEigenSolver<Mat24> eig(c.hess);
    EXPECT_GE(eig.eigenvalues().minCoeff(), -1e-10 * c.hess.norm());
  }
}

TEST(BroadPhase, SeparatedBodiesGiveNothing) {
  const SurfaceMesh a = make_box(Vec3(0.5, 0.5, 0.5));
  const std::array<CollisionShape, 2> shapes{CollisionShape{&a, false}, CollisionShape{&a, false}};
  const Positions start = positions_of(shapes, identity_coords(), make_coords(Vec3(1.01, 0, 0), Mat3::Identity()));
  const Positions end = positions_of(shapes, identity_coords(), make_coords(Vec3(1.02, 0.3, 0), Mat3::Identity()));
  EXPECT_TRUE(broad_phase(shapes, start, end, 1e-3).empty());
}

TEST(BroadPhase, StationaryCubesMatchBruteForce) {
  const SurfaceMesh a = make_box(Vec3(0.5, 0.5, 0.5));
  const std::array<CollisionShape, 2> shapes{CollisionShape{&a, false}, CollisionShape{&a, false}};
  const Positions pos = positions_of(shapes, identity_coords(), make_coords(Vec3(1.0005, 0.2, 0.1), Mat3::Identity()));
  const CandidateSet c = broad_phase(shapes, pos, pos, 1e-3);
  const auto brute = oracle::brute_force_pairs(shapes, pos, pos, 1e-3, 0);
  ASSERT_FALSE(brute.empty());
  for (const auto& p : brute) EXPECT_TRUE(std::binary_search(c.pairs.begin(), c.pairs.end(), p));
}

TEST(BroadPhase, SupersetOfBruteForceOnRandomIntervals) {
  const SurfaceMesh ball = make_icosphere(0.5, 1);
  const SurfaceMesh box = make_box(Vec3(0.4, 0.3, 0.5));
  const std::array<CollisionShape, 3> shapes{CollisionShape{&ball, false}, CollisionShape{&box, false},
                                             CollisionShape{&box, true}};
  std::mt19937_64 rng(16);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  int nonempty = 0;
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<Vec12> q0, q1;
    for (int b = 0; b < 3; ++b) {
      const Vec3 c = 0.55 * Vec3(u(rng), u(rng), u(rng)) + Vec3(b * 0.9, 0, 0);
      const Mat3 r = random_rotation(rng);
      q0.push_back(make_coords(c, r));
      q1.push_back(make_coords(c + 0.02 * Vec3(u(rng), u(rng), u(rng)), r));
    }
    Positions start, end;
    for (int b = 0; b < 3; ++b) {
      start.push_back(world_vertices(*shapes[b].mesh, q0[b]));
      end.push_back(world_vertices(*shapes[b].mesh, q1[b]));
    }
    const double d_hat = 0.02;
    const CandidateSet c = broad_phase(shapes, start, end, d_hat, Executor(3));
    const auto brute = oracle::brute_force_pairs(shapes, start, end, d_hat, 8);
    nonempty += !brute.empty();
    for (const auto& p : brute) ASSERT_TRUE(std::binary_search(c.pairs.begin(), c.pairs.end(), p));
    EXPECT_TRUE(std::is_sorted(c.pairs.begin(), c.pairs.end()));
    EXPECT_EQ(std::adjacent_find(c.pairs.begin(), c.pairs.end()), c.pairs.end());
    const CandidateSet serial = broad_phase(shapes, start, end, d_hat);
    EXPECT_EQ(serial.pairs, c.pairs);
    for (const auto& p : c.pairs) EXPECT_FALSE(shapes[p.body_a].kinematic && shapes[p.body_b].kinematic);
  }
  EXPECT_GT(nonempty, 0);
}

TEST(BroadPhase, FewerCandidatesThanBvh) {
  const SurfaceMesh ball = make_icosphere(0.5, 3);
  const std::array<CollisionShape, 2> shapes{CollisionShape{&ball, false}, CollisionShape{&ball, false}};
  const std::array<Vec12, 2> q{identity_coords(), make_coords(Vec3(0.95, 0.1, 0), Mat3::Identity())};
  const Positions pos = positions_of(shapes, q[0], q[1]);
  const CandidateSet c = broad_phase(shapes, pos, pos, 1e-3);
  EXPECT_LT(c.size(), full_bvh_pair_count(shapes, q, 1e-3));
}

TEST(Friction, ZeroCases) {
  Fixture f;
  const ContactParams params{1e4, 1e-3};
  const ContactPair pair{PairKind::vertex_face, 0, 1, 3, 0};
  const Vec12 qb = identity_coords();
  const Vec12 qa = make_coords(Vec3(0.3, 0.0, 0.05 - 1.0 - 0.5e-3), Mat3::Identity());
  const Positions pos = positions_of(f.shapes, qa, qb);
  CandidateSet cs;
  cs.pairs = {pair};
  const auto data = friction_precompute(f.shapes, pos, cs, params);
  ASSERT_EQ(data.size(), 1u);
  EXPECT_GT(data[0].lambda, 0.0);
  EXPECT_LT((data[0].basis.transpose() * data[0].basis - Mat2::Identity()).norm(), 1e-12);
  EXPECT_LT((data[0].basis.transpose() * Vec3::UnitZ()).norm(), 1e-12);

  PairContribution c;
  evaluate_friction_pair(data[0], f.shapes, pos, pos, 0.5, 1e-5, true, true, c);
  EXPECT_EQ(c.energy, 0.0);
  EXPECT_EQ(c.grad, Vec24::Zero());

  const Positions moved = positions_of(f.shapes, make_coords(qa.head<3>() + Vec3(0.01, 0, 0), Mat3::Identity()), qb);
  EXPECT_EQ(friction_energy(f.shapes, moved, pos, data, 0.0, 1e-5), 0.0);
  auto zero = data;
  zero[0].lambda = 0.0;
  EXPECT_EQ(friction_energy(f.shapes, moved, pos, zero, 0.5, 1e-5), 0.0);

  const Positions far = positions_of(f.shapes, make_coords(qa.head<3>() - Vec3(0, 0, 0.1), Mat3::Identity()), qb);
  EXPECT_TRUE(friction_precompute(f.shapes, far, cs, params).empty());
}

TEST(Friction, MollifierIsC1) {
  const double eps = 1e-4;
  EXPECT_NEAR(friction_f0(eps, eps), eps, 1e-18);
  EXPECT_NEAR(friction_f0(eps * (1 - 1e-9), eps), eps, 1e-12);
  EXPECT_NEAR(friction_f1(eps * (1 - 1e-9), eps), 1.0, 1e-6);
  EXPECT_EQ(friction_f1(2 * eps, eps), 1.0);
  EXPECT_NEAR(friction_f0(0.0, eps), eps / 3.0, 1e-18);
  EXPECT_EQ(friction_f1(0.0, eps), 0.0);
}

TEST(Friction, CoulombLimit) {
  Fixture f;
  const ContactParams params{1e4, 1e-3};
  const ContactPair pair{PairKind::vertex_face, 0, 1, 3, 0};
  const Vec12 qb = identity_coords();
  const Vec12 qa = make_coords(Vec3(0.3, 0.0, 0.05 - 1.0 - 0.5e-3), Mat3::Identity());
  const Positions prev = positions_of(f.shapes, qa, qb);
  CandidateSet cs;
  cs.pairs = {pair};
  const auto data = friction_precompute(f.shapes, prev, cs, params);
  const double mu = 0.4, eps = 1e-6;
  const Positions moved = positions_of(f.shapes, make_coords(qa.head<3>() + Vec3(1e-3, 2e-3, 0), Mat3::Identity()), qb);
  PairContribution c;
  ASSERT_TRUE(evaluate_friction_pair(data[0], f.shapes, moved, prev, mu, eps, false, false, c));
  const double force = c.grad.head<3>().norm();
  EXPECT_NEAR(force, mu * data[0].lambda, 0.01 * mu * data[0].lambda);
}

TEST(Friction, DerivativesMatchFiniteDifferences) {
  Fixture f;
  const ContactParams params{1e4, 1e-3};
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> frac(0.2, 0.9), u(-1.0, 1.0);
  std::uniform_real_distribution<double> log_mag(-7.0, -3.0);
  const double mu = 0.3, eps = 1e-5;
  int checked = 0;
  while (checked < 1000) {
    const ContactPair pair = random_pair(rng, f);
    const Vec12 qb = random_near_rigid(rng);
    const Vec12 qa = place_at_distance(pair, f.shapes, random_near_rigid(rng), qb, frac(rng) * params.d_hat);
    CandidateSet cs;
    cs.pairs = {pair};
    const auto data = friction_precompute(f.shapes, positions_of(f.shapes, qa, qb), cs, params);
    ASSERT_EQ(data.size(), 1u);
    Vec12 da, db;
    for (int i = 0; i < 12; ++i) {
      da[i] = u(rng);
      db[i] = u(rng);
    }
    const double mag = std::pow(10.0, log_mag(rng));
    const Eigen::VectorXd z = stack(qa + mag * da.normalized(), qb + mag * db.normalized());
    const Positions prev = positions_of(f.shapes, qa, qb);
    auto energy = [&](const Eigen::VectorXd& w) {
      return friction_energy(f.shapes, positions_of(f.shapes, w.head<12>(), w.tail<12>()), prev, data, mu, eps);
    };
    auto grad = [&](const Eigen::VectorXd& w) -> Eigen::VectorXd {
      PairContribution c;
      evaluate_friction_pair(data[0], f.shapes, positions_of(f.shapes, w.head<12>(), w.tail<12>()), prev, mu, eps,
                             false, false, c);
      return c.grad;
    };
    PairContribution c;
    evaluate_friction_pair(data[0], f.shapes, positions_of(f.shapes, z.head<12>(), z.tail<12>()), prev, mu, eps, true,
                           false, c);
    if (c.grad.norm() == 0.0) continue;
    const double h = 1e-3 * std::min(mag, eps);
    ASSERT_LT(oracle::rel_error(c.grad, oracle::fd_gradient(energy, z, h)), 1e-5) << checked;
    ASSERT_LT(oracle::rel_error(c.hess, oracle::fd_jacobian(grad, z, h)), 1e-4) << checked;
    ++checked;
  }
}
