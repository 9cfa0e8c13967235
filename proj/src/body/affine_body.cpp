#include "abd/body/affine_body.hpp"

#include <cmath>

#include "abd/error.hpp"
#include "abd/psd.hpp"

namespace abd {

Mat3 linear_part(const Vec12& q) {
  Mat3 a;
  a.row(0) = q.segment<3>(3).transpose();
  a.row(1) = q.segment<3>(6).transpose();
  a.row(2) = q.segment<3>(9).transpose();
  return a;
}

Vec12 make_coords(const Vec3& p, const Mat3& a) {
  Vec12 q;
  q << p, a.row(0).transpose(), a.row(1).transpose(), a.row(2).transpose();
  return q;
}

Vec3 world_position(const Vec12& q, const Vec3& x_bar) {
  return Vec3(q.segment<3>(3).dot(x_bar), q.segment<3>(6).dot(x_bar), q.segment<3>(9).dot(x_bar)) + q.head<3>();
}

Mat3x12 jacobian(const Vec3& x_bar) {
  Mat3x12 j = Mat3x12::Zero();
  j.leftCols<3>().setIdentity();
  for (int i = 0; i < 3; ++i) j.block<1, 3>(i, 3 + 3 * i) = x_bar.transpose();
  return j;
}

Vec12 jacobian_transpose_times(const Vec3& x_bar, const Vec3& v) {
  Vec12 r;
  r << v, v[0] * x_bar, v[1] * x_bar, v[2] * x_bar;
  return r;
}

double orthogonality_error(const Vec12& q) {
  const Mat3 a = linear_part(q);
  return (a * a.transpose() - Mat3::Identity()).norm();
}

Mat12 assemble_mass(double mass, const Vec3& c, const Mat3& s) {
  Mat12 m = Mat12::Zero();
  m.topLeftCorner<3, 3>() = mass * Mat3::Identity();
  for (int i = 0; i < 3; ++i) {
    m.block<1, 3>(i, 3 + 3 * i) = c.transpose();
    m.block<3, 1>(3 + 3 * i, i) = c;
    m.block<3, 3>(3 + 3 * i, 3 + 3 * i) = s;
  }
  return m;
}

GeneralizedMass mass_matrix(const SurfaceMesh& mesh, double density) {
  if (!(density > 0.0)) throw GeometryError("mass_matrix: density must be positive");
  mesh.require_closed();
  double vol = 0.0;
  Vec3 first = Vec3::Zero();
  Mat3 second = Mat3::Zero();
  const auto& v = mesh.vertices();
  for (const auto& t : mesh.triangles()) {
    const Vec3& a = v[t[0]];
    const Vec3& b = v[t[1]];
    const Vec3& c = v[t[2]];
    const double tv = a.dot(b.cross(c)) / 6.0;
    const Vec3 sum = a + b + c;
    vol += tv;
    first += tv * sum / 4.0;
    second += tv / 20.0 * (a * a.transpose() + b * b.transpose() + c * c.transpose() + sum * sum.transpose());
  }
  if (!(vol > 0.0)) throw GeometryError("mass_matrix: enclosed volume is not positive (inverted orientation?)");
  GeneralizedMass m;
  m.volume = vol;
  m.mass = density * vol;
  m.first_moment = density * first;
  m.second_moment = density * second;
  m.matrix = assemble_mass(m.mass, m.first_moment, m.second_moment);
  return m;
}

double ortho_energy(const Vec12& q, double stiffness) {
  double e = 0.0;
  for (int i = 0; i < 3; ++i) {
    const auto ai = q.segment<3>(3 + 3 * i);
    const double d = ai.dot(ai) - 1.0;
    e += d * d;
    for (int j = 0; j < 3; ++j) {
      if (j == i) continue;
      const double c = ai.dot(q.segment<3>(3 + 3 * j));
      e += c * c;
    }
  }
  return stiffness * e;
}

Vec12 ortho_gradient(const Vec12& q, double stiffness) {
  Vec12 g = Vec12::Zero();
  for (int i = 0; i < 3; ++i) {
    const Vec3 ai = q.segment<3>(3 + 3 * i);
    Vec3 gi = 4.0 * (ai.dot(ai) - 1.0) * ai;
    for (int j = 0; j < 3; ++j) {
      if (j == i) continue;
      const Vec3 aj = q.segment<3>(3 + 3 * j);
      gi += 4.0 * ai.dot(aj) * aj;
    }
    g.segment<3>(3 + 3 * i) = stiffness * gi;
  }
  return g;
}

Mat12 ortho_hessian(const Vec12& q, double stiffness, bool project) {
  Mat12 h = Mat12::Zero();
  for (int i = 0; i < 3; ++i) {
    const Vec3 ai = q.segment<3>(3 + 3 * i);
    Mat3 hii = 4.0 * (ai.dot(ai) - 1.0) * Mat3::Identity() + 8.0 * ai * ai.transpose();
    for (int j = 0; j < 3; ++j) {
      if (j == i) continue;
      const Vec3 aj = q.segment<3>(3 + 3 * j);
      hii += 4.0 * aj * aj.transpose();
      h.block<3, 3>(3 + 3 * i, 3 + 3 * j) = stiffness * 4.0 * (aj * ai.transpose() + ai.dot(aj) * Mat3::Identity());
    }
    h.block<3, 3>(3 + 3 * i, 3 + 3 * i) = stiffness * hii;
  }
  if (project) {
    auto lower = h.bottomRightCorner<9, 9>();
    project_psd(lower);
  }
  return h;
}

Vec12 external_generalized_force(const GeneralizedMass& m, const Vec3& gravity, std::span<const PointForce> forces) {
  Vec12 f;
  f << m.mass * gravity, gravity[0] * m.first_moment, gravity[1] * m.first_moment, gravity[2] * m.first_moment;
  for (const auto& pf : forces) f += jacobian_transpose_times(pf.x_bar, pf.force);
  return f;
}

std::array<PointForce, 2> torque_as_point_forces(const Vec3& center, const Vec3& torque) {
  const double t = torque.norm();
  if (t == 0.0) return {PointForce{center, Vec3::Zero()}, PointForce{center, Vec3::Zero()}};
  const Vec3 axis = torque / t;
  const Vec3 helper = std::abs(axis.x()) < 0.9 ? Vec3::UnitX() : Vec3::UnitY();
  const Vec3 r = axis.cross(helper).normalized();
  const Vec3 f = axis.cross(r) * (t / 2.0);
  // r x f + (-r) x (-f) = 2 r x f = t * axis
  return {PointForce{center + r, f}, PointForce{center - r, -f}};
}

}  // namespace abd
