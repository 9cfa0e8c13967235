#include "abd/io/run.hpp"

#include <fstream>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "abd/error.hpp"

namespace abd {

const char* const kStatsHeader =
    "step,time,newton_iters,converged,residual,min_distance,candidate_pairs,friction_pairs,ip_value,max_ortho_error";
const char* const kTimingsHeader = "step,broad_phase,narrow_phase,assembly,solve,ccd,line_search";

std::vector<ObjObject> frame_objects(const Scene& scene) {
  std::vector<ObjObject> out;
  const Normalization& nz = scene.normalization;
  for (const auto& b : scene.world.bodies()) {
    ObjObject o{b.name, world_vertices(b.mesh, b.q), b.mesh.triangles()};
    for (auto& v : o.vertices) v = nz.to_scene(v);
    out.push_back(std::move(o));
  }
  return out;
}

namespace {

double max_ortho_error(const World& w) {
  double e = 0.0;
  for (const auto& b : w.bodies()) {
    if (!b.kinematic) e = std::max(e, orthogonality_error(b.q));
  }
  return e;
}

std::string stats_row(const FrameStats& s) {
  return fmt::format("{},{:.17g},{},{},{:.17g},{:.17g},{},{},{:.17g},{:.17g}", s.step, s.time, s.newton_iters,
                     s.converged ? 1 : 0, s.residual, s.min_distance, s.candidate_pairs, s.friction_pairs, s.ip_value,
                     s.max_ortho_error);
}

std::string timings_row(const FrameStats& s) {
  const StepTimings& t = s.timings;
  return fmt::format("{},{:.6e},{:.6e},{:.6e},{:.6e},{:.6e},{:.6e}", s.step, t.broad_phase, t.narrow_phase,
                     t.assembly, t.solve, t.ccd, t.line_search);
}

std::ofstream open_out(const std::filesystem::path& p) {
  std::ofstream f(p);
  if (!f) throw Error("cannot write " + p.string());
  return f;
}

}  // namespace

RunResult run(Scene& scene, const RunOptions& options) {
  RunResult result;
  std::ofstream stats_file, timings_file;
  if (options.out_dir) {
    std::filesystem::create_directories(*options.out_dir);
    stats_file = open_out(*options.out_dir / "stats.csv");
    timings_file = open_out(*options.out_dir / "timings.csv");
    stats_file << kStatsHeader << '\n';
    timings_file << kTimingsHeader << '\n';
  }

  auto emit_frame = [&](int step) {
    const bool write = options.out_dir.has_value();
    const bool audit = options.audit;
    if (!write && !audit) return;
    const auto objects = frame_objects(scene);
    if (write) {
      write_obj(*options.out_dir / fmt::format("frame_{:05d}.obj", step), objects);
      ++result.frames_written;
    }
    if (audit) {
      auto hits = audit_intersections(objects, step);
      for (const auto& h : hits) {
        spdlog::error("step {}: bodies '{}' and '{}' intersect (triangles {} and {})", step, h.body_a, h.body_b,
                      h.tri_a, h.tri_b);
      }
      result.intersections.insert(result.intersections.end(), hits.begin(), hits.end());
    }
  };

  emit_frame(0);
  StepParams params = scene.params;
  params.audit_iterates = options.audit_iterates;
  const double inv_scale = 1.0 / scene.normalization.scale;
  for (int step = 1; step <= options.steps; ++step) {
    const double t = step * params.dt;
    const StepStats st = scene.world.advance_step(params, generalized_forces(scene, t));
    FrameStats fs;
    fs.step = step;
    fs.time = t;
    fs.newton_iters = st.newton_iters;
    fs.converged = st.converged;
    fs.residual = st.residual;
    fs.min_distance = st.min_distance * inv_scale;
    fs.candidate_pairs = st.candidate_pairs;
    fs.friction_pairs = st.friction_pairs;
    fs.ip_value = st.ip_value;
    fs.max_ortho_error = max_ortho_error(scene.world);
    fs.timings = st.timings;
    if (!st.converged) ++result.nonconverged_steps;
    if (options.audit_iterates) result.min_iterate_distance = std::min(result.min_iterate_distance, st.min_iterate_distance);
    if (options.out_dir) {
      stats_file << stats_row(fs) << '\n';
      timings_file << timings_row(fs) << '\n';
    }
    result.stats.push_back(fs);
    if (step % scene.output.frame_every == 0) emit_frame(step);
  }
  if (options.out_dir && (!stats_file || !timings_file)) throw Error("failed writing statistics");
  return result;
}

}  // namespace abd
