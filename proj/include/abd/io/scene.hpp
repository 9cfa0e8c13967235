#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "abd/solver/world.hpp"

namespace abd {

/// Point force on a body, active for start <= t < end. Point in the body's rest frame.
struct TimedForce {
  int body = 0;
  Vec3 point = Vec3::Zero();
  Vec3 force = Vec3::Zero();
  double start = 0.0;
  double end = std::numeric_limits<double>::infinity();
};

/// Torque about the body's center of mass, active for start <= t < end.
struct TimedTorque {
  int body = 0;
  Vec3 torque = Vec3::Zero();
  double start = 0.0;
  double end = std::numeric_limits<double>::infinity();
};

/// Maps scene units to the normalized unit box: x_n = scale * (x - origin).
struct Normalization {
  double scale = 1.0;
  Vec3 origin = Vec3::Zero();

  Vec3 to_normalized(const Vec3& x) const { return scale * (x - origin); }
  Vec3 to_scene(const Vec3& x) const { return x / scale + origin; }
};

struct OutputConfig {
  int frame_every = 1;
  int workers = 1;
  bool audit = false;
};

/// A loaded scene; everything inside `world`, `params`, `gravity`, `forces` and `torques` is in
/// normalized units.
struct Scene {
  World world;
  StepParams params;
  Vec3 gravity = Vec3::Zero();
  std::vector<TimedForce> forces;
  std::vector<TimedTorque> torques;
  Normalization normalization;
  int steps = 100;
  std::uint64_t seed = 0;
  OutputConfig output;
};

/// Parses a scene document. Relative mesh paths resolve against `base_dir`. `workers` overrides
/// the scene's worker count when positive. Throws SceneError with a precise message on schema
/// violations, missing meshes, open meshes or initially intersecting bodies.
Scene parse_scene(const nlohmann::json& doc, const std::filesystem::path& base_dir, int workers = 0);

Scene load_scene(const std::filesystem::path& path, int workers = 0);

/// Generalized external forces (gravity, point forces, torques) acting at time t. Torque lever
/// arms are placed with the bodies' current linear parts.
std::vector<Vec12> generalized_forces(const Scene& scene, double t);

}  // namespace abd
