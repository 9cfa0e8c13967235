#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "abd/io/obj.hpp"

namespace abd {

struct IntersectionRecord {
  int frame = 0;
  std::string body_a;
  std::string body_b;
  int tri_a = 0;
  int tri_b = 0;
};

/// Exhaustive inter-body triangle-triangle test (bounding boxes only skip provably disjoint
/// pairs). Records carry `frame`.
std::vector<IntersectionRecord> audit_intersections(const std::vector<ObjObject>& bodies, int frame = 0);

struct AuditReport {
  int frames = 0;
  std::vector<IntersectionRecord> intersections;
};

/// Audits every frame_NNNNN.obj in `dir`, in frame order.
AuditReport audit_directory(const std::filesystem::path& dir);

}  // namespace abd
