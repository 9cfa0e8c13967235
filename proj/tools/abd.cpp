#include <filesystem>
#include <iostream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "abd/error.hpp"
#include "abd/io/audit.hpp"
#include "abd/io/run.hpp"
#include "abd/io/scene.hpp"

namespace {

// Exit codes
constexpr int kOk = 0;
constexpr int kFailure = 1;
constexpr int kNotConverged = 2;
constexpr int kIntersection = 3;

int simulate(const std::string& scene_path, int steps, const std::string& out, int workers, bool strict,
             bool audit) {
  abd::Scene scene = abd::load_scene(scene_path, workers);
  abd::RunOptions opts;
  opts.steps = steps >= 0 ? steps : scene.steps;
  if (!out.empty()) opts.out_dir = out;
  opts.audit = audit || scene.output.audit;
  spdlog::info("{}: {} bodies, {} unknowns, {} steps of {} s, {} worker(s)", scene_path, scene.world.num_bodies(),
               scene.world.layout().num_unknowns(), opts.steps, scene.params.dt, scene.output.workers);

  const abd::RunResult r = abd::run(scene, opts);
  double iters = 0.0;
  for (const auto& s : r.stats) iters += s.newton_iters;
  spdlog::info("done: mean Newton iterations {:.3f}, {} non-converged step(s), {} frame(s) written",
               r.stats.empty() ? 0.0 : iters / r.stats.size(), r.nonconverged_steps, r.frames_written);
  if (opts.audit) {
    spdlog::info("audit: {} intersecting triangle pair(s)", r.intersections.size());
    if (!r.intersections.empty()) return kIntersection;
  }
  if (strict && r.nonconverged_steps > 0) return kNotConverged;
  return kOk;
}

int audit(const std::string& dir) {
  const abd::AuditReport report = abd::audit_directory(dir);
  for (const auto& h : report.intersections) {
    std::cout << fmt::format("frame {}: {} x {} (triangles {}, {})\n", h.frame, h.body_a, h.body_b, h.tri_a, h.tri_b);
  }
  std::cout << fmt::format("{} frame(s) audited, {} intersecting triangle pair(s)\n", report.frames,
                           report.intersections.size());
  if (report.frames == 0) {
    spdlog::error("no frame_*.obj files in {}", dir);
    return kFailure;
  }
  return report.intersections.empty() ? kOk : kIntersection;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Affine body dynamics simulator"};
  app.require_subcommand(1);

  std::string scene_path, out, audit_dir;
  int steps = -1;
  int workers = 0;
  bool strict = false, audit_flag = false;
  int verbose = 0;
  app.add_flag("-v,--verbose", verbose, "Debug logging; repeat for per-iteration traces");

  auto* sim = app.add_subcommand("simulate", "Run a scene");
  sim->add_option("scene", scene_path, "Scene file (JSON)")->required()->check(CLI::ExistingFile);
  sim->add_option("--steps", steps, "Number of steps (default: the scene's)");
  sim->add_option("--out", out, "Output directory for frames and statistics");
  sim->add_option("--workers", workers, "Worker threads (default: the scene's)")->check(CLI::NonNegativeNumber);
  sim->add_flag("--strict", strict, "Exit with status 2 if any step did not converge");
  sim->add_flag("--audit", audit_flag, "Check every frame for intersections");

  auto* aud = app.add_subcommand("audit", "Check frame_*.obj files for intersecting bodies");
  aud->add_option("dir", audit_dir, "Directory with frames")->required()->check(CLI::ExistingDirectory);

  CLI11_PARSE(app, argc, argv);
  if (verbose > 0) spdlog::set_level(verbose > 1 ? spdlog::level::trace : spdlog::level::debug);

  try {
    if (*sim) return simulate(scene_path, steps, out, workers, strict, audit_flag);
    return audit(audit_dir);
  } catch (const abd::Error& e) {
    spdlog::error("{}", e.what());
    return kFailure;
  }
}
