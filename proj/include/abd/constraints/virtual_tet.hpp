#pragma once

#include "abd/types.hpp"

namespace abd {

/// Proxy tetrahedron in a body's rest frame. Its vertices P (3x4, one column per vertex) define
/// the body's affine coordinates linearly.
class VirtualTet {
 public:
  VirtualTet() = default;
  /// `rest` holds the four rest-frame vertices as columns. Throws GeometryError when degenerate.
  explicit VirtualTet(const Mat34& rest);

  /// Regular tetrahedron with edge length `edge` whose edge (0, 1) lies on the line through
  /// `center` along `axis`, with its midpoint at `center`.
  static VirtualTet regular(const Vec3& center, const Vec3& axis, double edge);

  /// Rest vertices with the centroid removed.
  const Mat34& centered_rest() const { return centered_; }
  /// Centroid of the rest vertices (body frame).
  const Vec3& centroid() const { return centroid_; }
  Mat34 rest() const;

  /// Body coordinates from world vertex positions. Linear in P.
  Vec12 to_coords(const Mat34& p) const;
  /// World vertex positions of the tet for body coordinates q.
  Mat34 from_coords(const Vec12& q) const;

  /// Constant 12x12 map G with q = G vec(P), vec stacking the columns (vertex by vertex).
  const Mat12& map() const { return g_; }

 private:
  Mat34 centered_ = Mat34::Zero();
  Vec3 centroid_ = Vec3::Zero();
  Mat3 inv_gram_ = Mat3::Identity();
  Mat12 g_ = Mat12::Identity();
};

/// Tet-centroid translation and A recovered from P relative to a centered rest tet:
/// p = mean of the columns of P - P_bar, A = P P_bar^T (P_bar P_bar^T)^{-1}.
Vec12 phi(const Mat34& p, const Mat34& p_bar_centered);

inline Vec12 vec(const Mat34& p) { return Eigen::Map<const Vec12>(p.data()); }
inline Mat34 unvec(const Vec12& v) { return Eigen::Map<const Mat34>(v.data()); }

}  // namespace abd
