#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "abd/geometry/mesh.hpp"

namespace abd {

/// One `o` group of an OBJ file with its own 0-based vertex numbering.
struct ObjObject {
  std::string name;
  std::vector<Vec3> vertices;
  std::vector<Triangle> triangles;
};

/// Reads `v` and `f` records; polygons are fan-triangulated, texture/normal indices ignored,
/// negative indices resolved. Faces are assigned to the object that was open when they appeared.
/// Throws SceneError on malformed input.
std::vector<ObjObject> read_obj(const std::filesystem::path& path);

/// All objects merged into one mesh.
SurfaceMesh read_obj_mesh(const std::filesystem::path& path);

void write_obj(const std::filesystem::path& path, const std::vector<ObjObject>& objects);

}  // namespace abd
