#include "abd/io/audit.hpp"

#include <algorithm>
#include <regex>

#include "abd/error.hpp"
#include "abd/geometry/aabb.hpp"
#include "abd/geometry/intersect.hpp"

namespace abd {

std::vector<IntersectionRecord> audit_intersections(const std::vector<ObjObject>& bodies, int frame) {
  const int n = static_cast<int>(bodies.size());
  std::vector<Aabb> body_box(n);
  std::vector<std::vector<Aabb>> tri_box(n);
  for (int b = 0; b < n; ++b) {
    body_box[b] = aabb_of(bodies[b].vertices, 0.0);
    for (const auto& t : bodies[b].triangles) {
      Aabb box;
      for (int k = 0; k < 3; ++k) box.expand(bodies[b].vertices[t[k]]);
      tri_box[b].push_back(box);
    }
  }
  std::vector<IntersectionRecord> out;
  for (int a = 0; a < n; ++a) {
    for (int b = a + 1; b < n; ++b) {
      if (!aabb_intersects(body_box[a], body_box[b])) continue;
      const auto& ma = bodies[a];
      const auto& mb = bodies[b];
      for (std::size_t i = 0; i < ma.triangles.size(); ++i) {
        if (!aabb_intersects(tri_box[a][i], body_box[b])) continue;
        const std::array<Vec3, 3> ta{ma.vertices[ma.triangles[i][0]], ma.vertices[ma.triangles[i][1]],
                                     ma.vertices[ma.triangles[i][2]]};
        for (std::size_t j = 0; j < mb.triangles.size(); ++j) {
          if (!aabb_intersects(tri_box[a][i], tri_box[b][j])) continue;
          const std::array<Vec3, 3> tb{mb.vertices[mb.triangles[j][0]], mb.vertices[mb.triangles[j][1]],
                                       mb.vertices[mb.triangles[j][2]]};
          if (triangles_intersect(ta, tb)) {
            out.push_back({frame, ma.name, mb.name, static_cast<int>(i), static_cast<int>(j)});
          }
        }
      }
    }
  }
  return out;
}

AuditReport audit_directory(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw Error("not a directory: " + dir.string());
  const std::regex pattern(R"(frame_(\d+)\.obj)");
  std::vector<std::pair<int, std::filesystem::path>> frames;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    std::smatch m;
    const std::string name = entry.path().filename().string();
    if (std::regex_match(name, m, pattern)) frames.emplace_back(std::stoi(m[1]), entry.path());
  }
  std::sort(frames.begin(), frames.end());
  AuditReport report;
  for (const auto& [index, path] : frames) {
    auto found = audit_intersections(read_obj(path), index);
    report.intersections.insert(report.intersections.end(), found.begin(), found.end());
    ++report.frames;
  }
  return report;
}

}  // namespace abd
