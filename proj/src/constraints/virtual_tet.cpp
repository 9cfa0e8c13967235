#include "abd/constraints/virtual_tet.hpp"

#include <cmath>

#include <Eigen/LU>

#include "abd/body/affine_body.hpp"
#include "abd/error.hpp"

namespace abd {

Vec12 phi(const Mat34& p, const Mat34& p_bar) {
  const Mat3 gram = p_bar * p_bar.transpose();
  Eigen::FullPivLU<Mat3> lu(gram);
  if (!lu.isInvertible()) throw GeometryError("phi: rest tetrahedron is degenerate");
  const Vec3 t = (p - p_bar).rowwise().sum() / 4.0;
  const Mat3 a = p * p_bar.transpose() * lu.inverse();
  return make_coords(t, a);
}

VirtualTet::VirtualTet(const Mat34& rest) {
  centroid_ = rest.rowwise().sum() / 4.0;
  centered_ = rest.colwise() - centroid_;
  const Mat3 gram = centered_ * centered_.transpose();
  const double scale = centered_.squaredNorm();
  Eigen::FullPivLU<Mat3> lu(gram);
  lu.setThreshold(1e-10);
  if (!(scale > 0.0) || !lu.isInvertible() || std::abs(gram.determinant()) < 1e-12 * scale * scale * scale) {
    throw GeometryError("VirtualTet: degenerate rest tetrahedron");
  }
  inv_gram_ = gram.inverse();

  // q = K phi(P) with p_body = p_tet - A * centroid; phi is linear, so G = K dphi/dvec(P).
  Mat12 dphi = Mat12::Zero();
  const Eigen::Matrix<double, 3, 4> w = inv_gram_ * centered_;  // A = P w^T
  for (int k = 0; k < 4; ++k) {
    dphi.block<3, 3>(0, 3 * k) = 0.25 * Mat3::Identity();
    for (int i = 0; i < 3; ++i) {
      // a_i = sum_k P(i, k) w(:, k)
      dphi.block<3, 1>(3 + 3 * i, 3 * k + i) = w.col(k);
    }
  }
  Mat12 k = Mat12::Identity();
  for (int i = 0; i < 3; ++i) k.block<1, 3>(i, 3 + 3 * i) = -centroid_.transpose();
  g_ = k * dphi;
}

VirtualTet VirtualTet::regular(const Vec3& center, const Vec3& axis, double edge) {
  const Vec3 u = axis.normalized();
  const Vec3 helper = std::abs(u.x()) < 0.9 ? Vec3::UnitX() : Vec3::UnitY();
  const Vec3 w = u.cross(helper).normalized();
  const Vec3 v = u.cross(w);
  const double h = edge / std::sqrt(2.0);
  Mat34 p;
  // Opposite edges of a regular tetrahedron are perpendicular, at distance edge / sqrt(2).
  p.col(0) = center - 0.5 * edge * u;
  p.col(1) = center + 0.5 * edge * u;
  p.col(2) = center + h * w - 0.5 * edge * v;
  p.col(3) = center + h * w + 0.5 * edge * v;
  return VirtualTet(p);
}

Mat34 VirtualTet::rest() const { return centered_.colwise() + centroid_; }

Vec12 VirtualTet::to_coords(const Mat34& p) const { return g_ * vec(p); }

Mat34 VirtualTet::from_coords(const Vec12& q) const {
  const Mat3 a = linear_part(q);
  return (a * rest()).colwise() + translation(q);
}

}  // namespace abd
