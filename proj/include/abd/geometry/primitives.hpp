#pragma once

#include <vector>

#include "abd/geometry/mesh.hpp"

namespace abd {

/// Axis-aligned box centered at the origin, 8 vertices and 12 outward triangles.
SurfaceMesh make_box(const Vec3& half_extents);

/// Subdivided icosahedron projected onto the sphere of the given radius.
SurfaceMesh make_icosphere(double radius, int subdivisions);

/// Extrusion along z of a polygon that is star-shaped about the origin (counter-clockwise).
/// Each cap is fanned around a center vertex; z spans [-half_thickness, half_thickness].
SurfaceMesh make_prism(const std::vector<Vec2>& outline, double half_thickness);

/// Spur gear outline: `teeth` trapezoidal teeth between root and tip radius.
SurfaceMesh make_gear(int teeth, double root_radius, double tip_radius, double half_thickness);

}  // namespace abd
