#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <array>
#include <vector>

namespace abd {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat2 = Eigen::Matrix2d;
using Mat3 = Eigen::Matrix3d;
using Mat32 = Eigen::Matrix<double, 3, 2>;
using Mat34 = Eigen::Matrix<double, 3, 4>;
using Mat3x12 = Eigen::Matrix<double, 3, 12>;

/// Generalized coordinates of one affine body: (p, a1, a2, a3), rows of A stored in order.
using Vec12 = Eigen::Matrix<double, 12, 1>;
using Mat12 = Eigen::Matrix<double, 12, 12>;

/// Stacked coordinates of the two bodies touched by a contact pair.
using Vec24 = Eigen::Matrix<double, 24, 1>;
using Mat24 = Eigen::Matrix<double, 24, 24>;

using Triangle = std::array<int, 3>;
using Edge = std::array<int, 2>;

}  // namespace abd
