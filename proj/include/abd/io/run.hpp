#pragma once

#include <filesystem>
#include <optional>
#include <vector>

#include "abd/io/audit.hpp"
#include "abd/io/scene.hpp"

namespace abd {

/// One row of stats.csv. Distances are in scene units.
struct FrameStats {
  int step = 0;
  double time = 0.0;
  int newton_iters = 0;
  bool converged = true;
  double residual = 0.0;
  double min_distance = 0.0;
  std::size_t candidate_pairs = 0;
  std::size_t friction_pairs = 0;
  double ip_value = 0.0;
  double max_ortho_error = 0.0;
  StepTimings timings;
};

struct RunOptions {
  int steps = 0;
  /// Frames, stats.csv and timings.csv go here; nothing is written when empty.
  std::optional<std::filesystem::path> out_dir;
  bool audit = false;
  /// Record the exact minimum distance after every accepted Newton iterate.
  bool audit_iterates = false;
};

struct RunResult {
  std::vector<FrameStats> stats;
  int nonconverged_steps = 0;
  int frames_written = 0;
  std::vector<IntersectionRecord> intersections;
  /// Minimum over accepted iterates (normalized units) when audit_iterates is set.
  double min_iterate_distance = std::numeric_limits<double>::infinity();
};

/// World-space meshes of all bodies in scene units, one object per body.
std::vector<ObjObject> frame_objects(const Scene& scene);

/// Advances the scene, writing frame_00000.obj for the initial state and frame_NNNNN.obj (NNNNN
/// the step index) every `frame_every` steps after it.
RunResult run(Scene& scene, const RunOptions& options);

extern const char* const kStatsHeader;
extern const char* const kTimingsHeader;

}  // namespace abd
