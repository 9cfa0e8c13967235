#include <random>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <gtest/gtest.h>

#include "abd/body/affine_body.hpp"
#include "abd/error.hpp"
#include "abd/geometry/primitives.hpp"
#include "oracles.hpp"

using namespace abd;

namespace {

Vec12 random_coords(std::mt19937_64& rng, double r = 2.0) {
  std::uniform_real_distribution<double> u(-r, r);
  Vec12 q;
  for (int i = 0; i < 12; ++i) q[i] = u(rng);
  return q;
}

Mat3 random_rotation(std::mt19937_64& rng) {
  std::normal_distribution<double> n;
  Eigen::Quaterniond qt(n(rng), n(rng), n(rng), n(rng));
  return qt.normalized().toRotationMatrix();
}

}  // namespace

TEST(Kinematics, WorldPosition) {
  EXPECT_EQ(world_position(identity_coords(), Vec3(1, 2, 3)), Vec3(1, 2, 3));
  EXPECT_EQ(world_position(make_coords(Vec3(1, 0, 0), Mat3::Identity()), Vec3::Zero()), Vec3(1, 0, 0));
  EXPECT_EQ(world_position(make_coords(Vec3::Zero(), Vec3(2, 1, 1).asDiagonal()), Vec3(1, 1, 1)), Vec3(2, 1, 1));
}

TEST(Kinematics, Jacobian) {
  Mat3x12 j0 = Mat3x12::Zero();
  j0.leftCols<3>().setIdentity();
  EXPECT_EQ(jacobian(Vec3::Zero()), j0);

  std::mt19937_64 rng(1);
  for (int i = 0; i < 100; ++i) {
    const Vec12 q = random_coords(rng);
    const Vec3 x = random_coords(rng).head<3>();
    EXPECT_LT((jacobian(x) * q - world_position(q, x)).norm(), 1e-12);
    EXPECT_LT((jacobian(x).transpose() * x - jacobian_transpose_times(x, x)).norm(), 1e-12);
    const auto f = [&](const Eigen::VectorXd& z) -> Eigen::VectorXd { return world_position(Vec12(z), x); };
    EXPECT_LT((oracle::fd_jacobian(f, q, 1e-5) - jacobian(x)).cwiseAbs().maxCoeff(), 1e-8);
  }
}

TEST(Mass, UnitCube) {
  const SurfaceMesh cube = make_box(Vec3(0.5, 0.5, 0.5));
  const GeneralizedMass m = mass_matrix(cube, 1.0);
  EXPECT_NEAR(m.mass, 1.0, 1e-12);
  EXPECT_NEAR(m.volume, 1.0, 1e-12);
  EXPECT_LT(m.first_moment.norm(), 1e-12);
  Mat12 expected = Mat12::Identity() / 12.0;
  expected.topLeftCorner<3, 3>() = Mat3::Identity();
  EXPECT_LT((m.matrix - expected).cwiseAbs().maxCoeff(), 1e-12);

  // Monte Carlo oracle: sample the cube interior.
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  Mat12 mc = Mat12::Zero();
  const int n = 1000000;
  for (int i = 0; i < n; ++i) {
    const Vec3 x(u(rng), u(rng), u(rng));
    const Mat3x12 j = jacobian(x);
    mc += j.transpose() * j;
  }
  mc /= n;
  EXPECT_LT((mc - m.matrix).cwiseAbs().maxCoeff() / m.matrix.cwiseAbs().maxCoeff(), 1e-3);
}

TEST(Mass, TranslationCovariance) {
  const Vec3 t(0.3, -1.2, 2.0);
  const GeneralizedMass a = mass_matrix(make_box(Vec3(0.5, 0.5, 0.5)), 1.0);
  const GeneralizedMass b = mass_matrix(make_box(Vec3(0.5, 0.5, 0.5)).transformed(1.0, t), 1.0);
  EXPECT_NEAR(b.mass, a.mass, 1e-12);
  EXPECT_LT((b.first_moment - t).norm(), 1e-12);
}

TEST(Mass, PositiveDefiniteAndErrors) {
  for (const SurfaceMesh& mesh : {make_icosphere(0.7, 2), make_gear(10, 0.5, 0.7, 0.1),
                                  make_box(Vec3(1, 0.2, 0.3)).transformed(1.0, Vec3(2, 3, 4))}) {
    const GeneralizedMass m = mass_matrix(mesh, 3.0);
    EXPECT_EQ(m.matrix.llt().info(), Eigen::Success);
  }
  const SurfaceMesh open({Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0)}, {{0, 1, 2}});
  EXPECT_THROW(mass_matrix(open, 1.0), GeometryError);
  const SurfaceMesh cube = make_box(Vec3(0.5, 0.5, 0.5));
  std::vector<Triangle> flipped = cube.triangles();
  for (auto& t : flipped) std::swap(t[1], t[2]);
  EXPECT_THROW(mass_matrix(SurfaceMesh(cube.vertices(), flipped), 1.0), GeometryError);
}

TEST(Ortho, EnergyExamples) {
  EXPECT_EQ(ortho_energy(identity_coords(), 1.0), 0.0);
  std::mt19937_64 rng(3);
  for (int i = 0; i < 100; ++i) {
    EXPECT_NEAR(ortho_energy(make_coords(Vec3::Zero(), random_rotation(rng)), 1.0), 0.0, 1e-12);
  }
  EXPECT_DOUBLE_EQ(ortho_energy(make_coords(Vec3::Zero(), Vec3(2, 1, 1).asDiagonal()), 1.0), 9.0);
}

TEST(Ortho, PolynomialEqualsFrobenius) {
  std::mt19937_64 rng(4);
  for (int i = 0; i < 1000; ++i) {
    const Vec12 q = random_coords(rng);
    const Mat3 a = linear_part(q);
    const double frob = (a * a.transpose() - Mat3::Identity()).squaredNorm();
    EXPECT_NEAR(ortho_energy(q, 1.0), frob, 1e-12 * frob);
  }
}

TEST(Ortho, DerivativesMatchFiniteDifferences) {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 1000; ++i) {
    const Vec12 q = random_coords(rng);
    const double k = 0.7;
    const auto f = [&](const Eigen::VectorXd& z) { return ortho_energy(Vec12(z), k); };
    const auto g = [&](const Eigen::VectorXd& z) -> Eigen::VectorXd { return ortho_gradient(Vec12(z), k); };
    const Vec12 grad = ortho_gradient(q, k);
    ASSERT_LT(oracle::rel_error(grad, oracle::fd_gradient(f, q, 1e-5)), 1e-6);
    ASSERT_LT(oracle::rel_error(ortho_hessian(q, k, false), oracle::fd_jacobian(g, q, 1e-5)), 1e-5);
    EXPECT_EQ(grad.head<3>(), Vec3::Zero());
  }
}

TEST(Ortho, HessianAtIdentity) {
  const Mat12 h = ortho_hessian(identity_coords(), 1.0, false);
  for (int i = 0; i < 3; ++i) {
    Mat3 expected = 8.0 * Vec3::Unit(i) * Vec3::Unit(i).transpose();
    for (int j = 0; j < 3; ++j) {
      if (j != i) expected += 4.0 * Vec3::Unit(j) * Vec3::Unit(j).transpose();
    }
    EXPECT_LT((h.block<3, 3>(3 + 3 * i, 3 + 3 * i) - expected).norm(), 1e-14);
  }
  Eigen::SelfAdjointEigenSolver<Mat12> eig(h);
  EXPECT_GE(eig.eigenvalues().minCoeff(), -1e-12);
}

TEST(Ortho, ProjectionOnlyRaisesEigenvalues) {
  std::mt19937_64 rng(6);
  for (int i = 0; i < 200; ++i) {
    const Vec12 q = random_coords(rng, 0.6);
    const Mat12 raw = ortho_hessian(q, 1.0, false);
    const Mat12 proj = ortho_hessian(q, 1.0, true);
    Eigen::SelfAdjointEigenSolver<Mat12> diff(proj - raw);
    EXPECT_GE(diff.eigenvalues().minCoeff(), -1e-9 * raw.norm());
    Eigen::SelfAdjointEigenSolver<Mat12> p(proj);
    EXPECT_GE(p.eigenvalues().minCoeff(), -1e-10 * raw.norm());
  }
}

TEST(ExternalForce, Examples) {
  const GeneralizedMass m = mass_matrix(make_box(Vec3(0.5, 0.5, 0.5)), 1.0);
  Vec12 expected = Vec12::Zero();
  expected[2] = -9.8;
  EXPECT_LT((external_generalized_force(m, Vec3(0, 0, -9.8), {}) - expected).norm(), 1e-12);

  const std::vector<PointForce> one = {{Vec3::Zero(), Vec3(1, 2, 3)}};
  Vec12 f1 = Vec12::Zero();
  f1.head<3>() = Vec3(1, 2, 3);
  EXPECT_EQ(external_generalized_force(m, Vec3::Zero(), one), f1);

  const std::vector<PointForce> pair = {{Vec3(0.3, 0.1, 0), Vec3(0, 1, 0)}, {Vec3(-0.3, -0.1, 0), Vec3(0, -1, 0)}};
  EXPECT_EQ(external_generalized_force(m, Vec3::Zero(), pair).head<3>(), Vec3::Zero());

  const auto torque = torque_as_point_forces(Vec3::Zero(), Vec3(0, 0, 2));
  Vec3 tau = Vec3::Zero(), net = Vec3::Zero();
  for (const auto& pf : torque) {
    tau += pf.x_bar.cross(pf.force);
    net += pf.force;
  }
  EXPECT_LT((tau - Vec3(0, 0, 2)).norm(), 1e-12);
  EXPECT_LT(net.norm(), 1e-12);
}
