#pragma once

#include "abd/types.hpp"

namespace abd {

/// Exact-predicate style test for two closed triangles sharing at least one point. Touching
/// counts as intersecting.
bool triangles_intersect(const std::array<Vec3, 3>& a, const std::array<Vec3, 3>& b);

}  // namespace abd
