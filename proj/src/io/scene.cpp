#include "abd/io/scene.hpp"

#include <fstream>
#include <map>
#include <random>

#include <fmt/format.h>
#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "abd/error.hpp"
#include "abd/geometry/aabb.hpp"
#include "abd/geometry/primitives.hpp"
#include "abd/io/audit.hpp"
#include "abd/io/obj.hpp"

namespace abd {

namespace {

using nlohmann::json;

[[noreturn]] void schema_error(const std::string& where, const std::string& what) {
  throw SceneError(where + ": " + what);
}

const json& require(const json& j, const char* key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) schema_error(where, std::string("missing field '") + key + "'");
  return j.at(key);
}

double number(const json& j, const std::string& where) {
  if (!j.is_number()) schema_error(where, "expected a number");
  return j.get<double>();
}

double number_or(const json& j, const char* key, double fallback, const std::string& where) {
  if (!j.contains(key)) return fallback;
  return number(j.at(key), where + "." + key);
}

Vec3 vec3(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 3) schema_error(where, "expected an array of 3 numbers");
  return Vec3(number(j[0], where), number(j[1], where), number(j[2], where));
}

Vec3 vec3_or(const json& j, const char* key, const Vec3& fallback, const std::string& where) {
  if (!j.contains(key)) return fallback;
  return vec3(j.at(key), where + "." + key);
}

void check_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!j.is_object()) schema_error(where, "expected an object");
  for (const auto& [key, value] : j.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) schema_error(where, "unknown field '" + key + "'");
  }
}

Mat3 skew(const Vec3& w) {
  Mat3 s;
  s << 0, -w.z(), w.y(), w.z(), 0, -w.x(), -w.y(), w.x(), 0;
  return s;
}

SurfaceMesh build_mesh(const json& j, const std::filesystem::path& base_dir, const std::string& where) {
  const std::string type = require(j, "type", where).get<std::string>();
  try {
    if (type == "box") {
      check_keys(j, {"type", "half_extents"}, where);
      return make_box(vec3(require(j, "half_extents", where), where + ".half_extents"));
    }
    if (type == "icosphere") {
      check_keys(j, {"type", "radius", "subdivisions"}, where);
      return make_icosphere(number(require(j, "radius", where), where + ".radius"),
                            j.value("subdivisions", 2));
    }
    if (type == "prism") {
      check_keys(j, {"type", "outline", "half_thickness"}, where);
      std::vector<Vec2> outline;
      for (const auto& p : require(j, "outline", where)) {
        if (!p.is_array() || p.size() != 2) schema_error(where + ".outline", "expected [x, y] points");
        outline.emplace_back(number(p[0], where), number(p[1], where));
      }
      return make_prism(outline, number(require(j, "half_thickness", where), where + ".half_thickness"));
    }
    if (type == "gear") {
      check_keys(j, {"type", "teeth", "root_radius", "tip_radius", "half_thickness"}, where);
      return make_gear(require(j, "teeth", where).get<int>(), number(require(j, "root_radius", where), where),
                       number(require(j, "tip_radius", where), where),
                       number(require(j, "half_thickness", where), where));
    }
    if (type == "obj") {
      check_keys(j, {"type", "path", "scale"}, where);
      std::filesystem::path p = require(j, "path", where).get<std::string>();
      if (p.is_relative()) p = base_dir / p;
      if (!std::filesystem::exists(p)) schema_error(where, "mesh file not found: " + p.string());
      const SurfaceMesh m = read_obj_mesh(p);
      return j.contains("scale") ? m.transformed(number(j["scale"], where + ".scale"), Vec3::Zero()) : m;
    }
  } catch (const GeometryError& e) {
    schema_error(where, e.what());
  } catch (const json::exception& e) {
    schema_error(where, e.what());
  }
  schema_error(where, "unknown mesh type '" + type + "'");
}

Mat3 rotation_of(const json& b, const std::string& where) {
  if (b.contains("linear")) {
    const json& l = b["linear"];
    if (!l.is_array() || l.size() != 3) schema_error(where + ".linear", "expected 3 rows");
    Mat3 a;
    for (int r = 0; r < 3; ++r) a.row(r) = vec3(l[r], where + ".linear").transpose();
    return a;
  }
  if (b.contains("rotation")) {
    const json& r = b["rotation"];
    check_keys(r, {"axis", "angle"}, where + ".rotation");
    const Vec3 axis = vec3(require(r, "axis", where + ".rotation"), where + ".rotation.axis");
    if (axis.norm() == 0.0) schema_error(where + ".rotation", "zero rotation axis");
    return Eigen::AngleAxisd(number(require(r, "angle", where + ".rotation"), where + ".rotation.angle"),
                             axis.normalized())
        .toRotationMatrix();
  }
  return Mat3::Identity();
}

struct RawBody {
  std::string name;
  SurfaceMesh mesh;  // scene units
  double density = 1000.0;
  double kappa_ortho = 1e11;
  bool kinematic = false;
  Vec3 p = Vec3::Zero();
  Mat3 a = Mat3::Identity();
  Vec3 v = Vec3::Zero();
  Vec3 omega = Vec3::Zero();
};

// Tet vertices a joint pins down, in world (normalized) coordinates.
struct TetSlot {
  std::vector<Vec3> points;
  bool fixed = false;
  int partner = -1;  // other body of a hinge
  int joint = 0;
};

Mat34 complete_tet(const std::vector<Vec3>& given, const Vec3& centroid, double size) {
  Mat34 p;
  const int k = static_cast<int>(given.size());
  for (int i = 0; i < k; ++i) p.col(i) = given[i];
  if (k == 0 || k == 1) {
    const Vec3 c = k == 0 ? centroid : given[0] + 0.5 * size * Vec3::UnitX();
    const VirtualTet t = VirtualTet::regular(c, Vec3::UnitX(), size);
    const Mat34 r = t.rest();
    for (int i = k; i < 4; ++i) p.col(i) = r.col(i);
  } else if (k == 2) {
    const Vec3 mid = 0.5 * (given[0] + given[1]);
    const double edge = (given[1] - given[0]).norm();
    const Mat34 r = VirtualTet::regular(mid, given[1] - given[0], edge).rest();
    p.col(2) = r.col(2);
    p.col(3) = r.col(3);
  } else if (k == 3) {
    const Vec3 n = (given[1] - given[0]).cross(given[2] - given[0]);
    const double edge = (given[1] - given[0]).norm();
    p.col(3) = (given[0] + given[1] + given[2]) / 3.0 + edge * n.normalized();
  }
  return p;
}

}  // namespace

Scene parse_scene(const json& doc, const std::filesystem::path& base_dir, int workers) {
  check_keys(doc, {"params", "gravity", "steps", "output", "seed", "bodies", "joints", "forces", "torques",
                   "description"},
             "scene");
  Scene scene{World(std::vector<Body>{}, 1), {}, {}, {}, {}, {}, 100, 0, {}};

  // Step parameters (normalized units).
  StepParams& sp = scene.params;
  if (doc.contains("params")) {
    const json& p = doc["params"];
    check_keys(p,
               {"dt", "d_hat", "kappa_barrier", "mu", "epsilon_v", "newton_tol", "max_newton_iters",
                "friction_outer_iters", "ccd_slack", "project_psd"},
               "params");
    sp.dt = number_or(p, "dt", sp.dt, "params");
    sp.d_hat = number_or(p, "d_hat", sp.d_hat, "params");
    sp.kappa_barrier = number_or(p, "kappa_barrier", sp.kappa_barrier, "params");
    sp.mu = number_or(p, "mu", sp.mu, "params");
    sp.epsilon_v = number_or(p, "epsilon_v", sp.epsilon_v, "params");
    sp.newton_tol = number_or(p, "newton_tol", sp.newton_tol, "params");
    sp.max_newton_iters = p.value("max_newton_iters", sp.max_newton_iters);
    sp.friction_outer_iters = p.value("friction_outer_iters", sp.friction_outer_iters);
    sp.ccd_slack = number_or(p, "ccd_slack", sp.ccd_slack, "params");
    sp.project_psd = p.value("project_psd", sp.project_psd);
  }
  if (!(sp.dt > 0.0)) schema_error("params.dt", "must be positive");
  if (!(sp.d_hat > 0.0)) schema_error("params.d_hat", "must be positive");
  if (!(sp.newton_tol > 0.0)) schema_error("params.newton_tol", "must be positive");
  if (sp.mu < 0.0) schema_error("params.mu", "must be non-negative");
  if (!(sp.ccd_slack > 0.0 && sp.ccd_slack < 1.0)) schema_error("params.ccd_slack", "must lie in (0, 1)");

  scene.steps = doc.value("steps", 100);
  scene.seed = doc.value("seed", std::uint64_t{0});
  if (doc.contains("output")) {
    const json& o = doc["output"];
    check_keys(o, {"frame_every", "workers", "audit"}, "output");
    scene.output.frame_every = std::max(1, o.value("frame_every", 1));
    scene.output.workers = std::max(1, o.value("workers", 1));
    scene.output.audit = o.value("audit", false);
  }
  if (workers > 0) scene.output.workers = workers;

  // Bodies in scene units.
  const json& jb = require(doc, "bodies", "scene");
  if (!jb.is_array() || jb.empty()) schema_error("bodies", "expected a non-empty array");
  std::vector<RawBody> raw;
  std::map<std::string, int> index;
  std::mt19937_64 rng(scene.seed);
  for (std::size_t i = 0; i < jb.size(); ++i) {
    const json& b = jb[i];
    const std::string where = fmt::format("bodies[{}]", i);
    check_keys(b,
               {"name", "mesh", "density", "kappa_ortho", "kinematic", "position", "rotation", "linear", "velocity",
                "angular_velocity", "perturb"},
               where);
    RawBody r;
    r.name = b.value("name", fmt::format("body{}", i));
    if (!index.emplace(r.name, static_cast<int>(i)).second) schema_error(where, "duplicate body name '" + r.name + "'");
    r.mesh = build_mesh(require(b, "mesh", where), base_dir, where + ".mesh");
    r.density = number_or(b, "density", r.density, where);
    if (!(r.density > 0.0)) schema_error(where + ".density", "must be positive");
    r.kappa_ortho = number_or(b, "kappa_ortho", r.kappa_ortho, where);
    r.kinematic = b.value("kinematic", false);
    r.p = vec3_or(b, "position", Vec3::Zero(), where);
    r.a = rotation_of(b, where);
    r.v = vec3_or(b, "velocity", Vec3::Zero(), where);
    r.omega = vec3_or(b, "angular_velocity", Vec3::Zero(), where);
    if (b.contains("perturb")) {
      const json& pj = b["perturb"];
      check_keys(pj, {"translation", "rotation"}, where + ".perturb");
      std::normal_distribution<double> n01;
      const double st = number_or(pj, "translation", 0.0, where + ".perturb");
      const double sr = number_or(pj, "rotation", 0.0, where + ".perturb");
      const Vec3 dt(n01(rng), n01(rng), n01(rng));
      const Vec3 dr(n01(rng), n01(rng), n01(rng));
      r.p += st * dt;
      if (sr > 0.0) r.a = Eigen::AngleAxisd(sr * dr.norm(), dr.normalized()).toRotationMatrix() * r.a;
    }
    const double ortho = (r.a * r.a.transpose() - Mat3::Identity()).norm();
    if (ortho > 1e-6) spdlog::warn("body '{}': initial linear part is not a rotation (|AA^T - I|_F = {:.3e})", r.name, ortho);
    raw.push_back(std::move(r));
  }

  // Normalization from the initial world-space bounding box.
  Aabb box;
  for (const auto& r : raw) {
    for (const auto& x : r.mesh.vertices()) box.expand(Vec3(r.a * x + r.p));
  }
  const double extent = box.extent().maxCoeff();
  if (!(extent > 0.0)) schema_error("bodies", "scene has zero extent");
  Normalization& nz = scene.normalization;
  nz.scale = 1.0 / extent;
  nz.origin = box.lo;
  const double s = nz.scale;

  std::vector<Body> bodies;
  for (auto& r : raw) {
    Body b;
    b.name = r.name;
    b.mesh = r.mesh.transformed(s, Vec3::Zero());
    b.kappa_ortho = r.kappa_ortho;
    b.kinematic = r.kinematic;
    // Mass is preserved: density scales with 1/s^3.
    const double density = r.density / (s * s * s);
    if (!r.kinematic) {
      try {
        b.mass = mass_matrix(b.mesh, density);
      } catch (const GeometryError& e) {
        schema_error("body '" + r.name + "'", e.what());
      }
    } else {
      b.mass.volume = 1.0;
    }
    b.q = make_coords(nz.to_normalized(r.p), r.a);
    if (!r.kinematic) {
      // x = A x_bar + p, so dA/dt = [omega] A about the frame origin; the center of mass adds
      // omega x (A c) to the translation rate so that `velocity` is the center-of-mass velocity.
      const Vec3 com_rest = b.mass.first_moment / b.mass.mass;
      const Vec3 pdot = s * r.v - r.omega.cross(r.a * com_rest);
      b.q_dot = make_coords(pdot, skew(r.omega) * r.a);
    }
    bodies.push_back(std::move(b));
  }

  scene.gravity = s * vec3_or(doc, "gravity", Vec3::Zero(), "gravity");

  auto body_index = [&](const json& j, const std::string& where) {
    const std::string name = j.get<std::string>();
    auto it = index.find(name);
    if (it == index.end()) schema_error(where, "unknown body '" + name + "'");
    return it->second;
  };

  if (doc.contains("forces")) {
    for (std::size_t i = 0; i < doc["forces"].size(); ++i) {
      const json& f = doc["forces"][i];
      const std::string where = fmt::format("forces[{}]", i);
      check_keys(f, {"body", "point", "force", "start", "end"}, where);
      TimedForce tf;
      tf.body = body_index(require(f, "body", where), where);
      tf.point = s * vec3_or(f, "point", Vec3::Zero(), where);
      tf.force = s * vec3(require(f, "force", where), where + ".force");
      tf.start = number_or(f, "start", 0.0, where);
      tf.end = number_or(f, "end", tf.end, where);
      scene.forces.push_back(tf);
    }
  }
  if (doc.contains("torques")) {
    for (std::size_t i = 0; i < doc["torques"].size(); ++i) {
      const json& t = doc["torques"][i];
      const std::string where = fmt::format("torques[{}]", i);
      check_keys(t, {"body", "torque", "start", "end"}, where);
      TimedTorque tt;
      tt.body = body_index(require(t, "body", where), where);
      tt.torque = s * s * vec3(require(t, "torque", where), where + ".torque");
      tt.start = number_or(t, "start", 0.0, where);
      tt.end = number_or(t, "end", tt.end, where);
      scene.torques.push_back(tt);
    }
  }

  // Joints: each one claims tet vertices of the bodies it touches, in declaration order.
  std::vector<std::vector<TetSlot>> slots(bodies.size());
  if (doc.contains("joints")) {
    for (std::size_t i = 0; i < doc["joints"].size(); ++i) {
      const json& j = doc["joints"][i];
      const std::string where = fmt::format("joints[{}]", i);
      const std::string type = require(j, "type", where).get<std::string>();
      if (type == "axis" || type == "hinge") {
        check_keys(j, {"type", "body", "bodies", "point", "direction", "length"}, where);
        const Vec3 point = nz.to_normalized(vec3(require(j, "point", where), where + ".point"));
        const Vec3 dir = vec3(require(j, "direction", where), where + ".direction");
        if (dir.norm() == 0.0) schema_error(where, "zero direction");
        const double len = s * number_or(j, "length", 0.25 * extent, where);
        const std::vector<Vec3> edge{point - 0.5 * len * dir.normalized(), point + 0.5 * len * dir.normalized()};
        if (type == "axis") {
          const int b = body_index(require(j, "body", where), where + ".body");
          slots[b].push_back({edge, true, -1, static_cast<int>(i)});
        } else {
          const json& pair = require(j, "bodies", where);
          if (!pair.is_array() || pair.size() != 2) schema_error(where + ".bodies", "expected two body names");
          const int a = body_index(pair[0], where + ".bodies");
          const int b = body_index(pair[1], where + ".bodies");
          if (a == b) schema_error(where, "hinge connects a body to itself");
          slots[a].push_back({edge, false, b, static_cast<int>(i)});
          slots[b].push_back({edge, false, a, static_cast<int>(i)});
        }
      } else if (type == "fixed-vertices") {
        check_keys(j, {"type", "body", "points"}, where);
        const int b = body_index(require(j, "body", where), where + ".body");
        std::vector<Vec3> pts;
        for (const auto& p : require(j, "points", where)) pts.push_back(nz.to_normalized(vec3(p, where + ".points")));
        if (pts.empty() || pts.size() > 4) schema_error(where + ".points", "expected 1 to 4 points");
        slots[b].push_back({pts, true, -1, static_cast<int>(i)});
      } else {
        schema_error(where, "unknown joint type '" + type + "'");
      }
    }
  }

  std::vector<BodyDofInput> inputs = plain_dof_inputs(bodies);
  std::vector<VertexLink> links;
  // Tet vertex index of each body's slot, to wire hinges.
  std::vector<std::map<int, int>> slot_vertex(bodies.size());
  for (std::size_t b = 0; b < bodies.size(); ++b) {
    if (slots[b].empty()) continue;
    const std::string where = "body '" + bodies[b].name + "'";
    if (bodies[b].kinematic) schema_error(where, "joints on kinematic bodies are not supported");
    std::vector<Vec3> world_pts;
    BodyJoints bj;
    for (const auto& sl : slots[b]) {
      slot_vertex[b][sl.joint] = static_cast<int>(world_pts.size());
      for (std::size_t k = 0; k < sl.points.size(); ++k) {
        if (sl.fixed) {
          const int v = static_cast<int>(world_pts.size() + k);
          if (v < 4) bj.fixed[3 * v] = bj.fixed[3 * v + 1] = bj.fixed[3 * v + 2] = true;
        }
      }
      world_pts.insert(world_pts.end(), sl.points.begin(), sl.points.end());
    }
    if (world_pts.size() > 4) schema_error(where, "joints claim more than four virtual tetrahedron vertices");
    // Rest-frame positions from the initial pose.
    const Vec12& q = bodies[b].q;
    const Mat3 a_inv = linear_part(q).inverse();
    std::vector<Vec3> rest_pts;
    for (const auto& x : world_pts) rest_pts.push_back(a_inv * (x - translation(q)));
    const Aabb rest_box = aabb_of(bodies[b].mesh.vertices(), 0.0);
    const Vec3 centroid = bodies[b].mass.first_moment / bodies[b].mass.mass;
    try {
      bj.tet = VirtualTet(complete_tet(rest_pts, centroid, 0.5 * rest_box.extent().maxCoeff()));
    } catch (const GeometryError&) {
      schema_error(where, "joint anchors form a degenerate virtual tetrahedron");
    }
    inputs[b].joints = bj;
  }
  for (std::size_t b = 0; b < bodies.size(); ++b) {
    for (const auto& sl : slots[b]) {
      if (sl.partner < 0 || static_cast<int>(b) > sl.partner) continue;
      const int va = slot_vertex[b].at(sl.joint);
      const int vb = slot_vertex[sl.partner].at(sl.joint);
      for (int k = 0; k < 2; ++k) links.push_back({static_cast<int>(b), va + k, sl.partner, vb + k});
    }
  }

  DofLayout layout;
  try {
    layout = DofLayout(inputs, links);
  } catch (const Error& e) {
    throw SceneError(std::string("joints: ") + e.what());
  }

  // Initial state must be intersection-free.
  std::vector<ObjObject> objects;
  for (const auto& b : bodies) objects.push_back({b.name, world_vertices(b.mesh, b.q), b.mesh.triangles()});
  const auto hits = audit_intersections(objects);
  if (!hits.empty()) {
    throw SceneError("initial configuration intersects: bodies '" + hits[0].body_a + "' and '" + hits[0].body_b +
                     "'");
  }

  scene.world = World(std::move(bodies), std::move(layout), scene.output.workers);
  const double d0 = std::sqrt(min_distance_sq(scene.world.shapes(), scene.world.positions()));
  if (!(d0 > 0.0)) throw SceneError("initial configuration has touching bodies (zero distance)");
  return scene;
}

Scene load_scene(const std::filesystem::path& path, int workers) {
  std::ifstream in(path);
  if (!in) throw SceneError("cannot open scene file " + path.string());
  json doc;
  try {
    doc = json::parse(in, nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw SceneError(path.string() + ": " + e.what());
  }
  try {
    return parse_scene(doc, path.parent_path(), workers);
  } catch (const json::exception& e) {
    throw SceneError(path.string() + ": " + e.what());
  }
}

std::vector<Vec12> generalized_forces(const Scene& scene, double t) {
  const World& w = scene.world;
  std::vector<std::vector<PointForce>> point(w.num_bodies());
  for (const auto& f : scene.forces) {
    if (t >= f.start && t < f.end) point[f.body].push_back({f.point, f.force});
  }
  for (const auto& tq : scene.torques) {
    if (t < tq.start || t >= tq.end) continue;
    // Lever arms are material points, so map the world-space arms back through the current A.
    const GeneralizedMass& m = w.body(tq.body).mass;
    const Mat3 a_inv = linear_part(w.body(tq.body).q).inverse();
    for (const auto& pf : torque_as_point_forces(Vec3::Zero(), tq.torque)) {
      point[tq.body].push_back({Vec3(m.first_moment / m.mass + a_inv * pf.x_bar), pf.force});
    }
  }
  std::vector<Vec12> out(w.num_bodies(), Vec12::Zero());
  for (int b = 0; b < w.num_bodies(); ++b) {
    if (w.body(b).kinematic) continue;
    out[b] = external_generalized_force(w.body(b).mass, scene.gravity, point[b]);
  }
  return out;
}

}  // namespace abd
