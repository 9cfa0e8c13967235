#include "abd/io/obj.hpp"

#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "abd/error.hpp"

namespace abd {

std::vector<ObjObject> read_obj(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw SceneError("cannot open mesh file " + path.string());

  std::vector<Vec3> vertices;
  struct Face {
    int object;
    std::vector<int> ids;
  };
  std::vector<Face> faces;
  std::vector<std::string> names;
  std::vector<int> first_vertex;
  int current = -1;

  std::string line;
  int line_no = 0;
  auto fail = [&](const std::string& what) {
    throw SceneError(fmt::format("{}:{}: {}", path.string(), line_no, what));
  };
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ls(line);
    std::string tag;
    if (!(ls >> tag) || tag[0] == '#') continue;
    if (tag == "v") {
      Vec3 v;
      if (!(ls >> v.x() >> v.y() >> v.z())) fail("bad vertex record");
      vertices.push_back(v);
    } else if (tag == "o" || tag == "g") {
      std::string name;
      std::getline(ls >> std::ws, name);
      names.push_back(name);
      first_vertex.push_back(static_cast<int>(vertices.size()));
      current = static_cast<int>(names.size()) - 1;
    } else if (tag == "f") {
      Face f{current, {}};
      std::string tok;
      while (ls >> tok) {
        int idx = 0;
        try {
          idx = std::stoi(tok.substr(0, tok.find('/')));
        } catch (const std::exception&) {
          fail("bad face index '" + tok + "'");
        }
        if (idx < 0) idx = static_cast<int>(vertices.size()) + idx + 1;
        if (idx < 1 || idx > static_cast<int>(vertices.size())) fail("face index out of range");
        f.ids.push_back(idx - 1);
      }
      if (f.ids.size() < 3) fail("face with fewer than 3 vertices");
      faces.push_back(std::move(f));
    }
  }
  if (names.empty()) {
    names.push_back(path.stem().string());
    first_vertex.push_back(0);
    for (auto& f : faces) f.object = 0;
  }

  // Vertices belong to the object they were declared in; faces may only use their own object's.
  const int n = static_cast<int>(names.size());
  std::vector<ObjObject> out(n);
  for (int o = 0; o < n; ++o) {
    out[o].name = names[o];
    const int end = o + 1 < n ? first_vertex[o + 1] : static_cast<int>(vertices.size());
    out[o].vertices.assign(vertices.begin() + first_vertex[o], vertices.begin() + end);
  }
  for (const auto& f : faces) {
    if (f.object < 0) throw SceneError(path.string() + ": face before the first object record");
    const int base = first_vertex[f.object];
    const int count = static_cast<int>(out[f.object].vertices.size());
    for (int id : f.ids) {
      if (id < base || id >= base + count) {
        throw SceneError(path.string() + ": face of object '" + out[f.object].name +
                         "' uses a vertex of another object");
      }
    }
    for (std::size_t k = 1; k + 1 < f.ids.size(); ++k) {
      out[f.object].triangles.push_back({f.ids[0] - base, f.ids[k] - base, f.ids[k + 1] - base});
    }
  }
  return out;
}

SurfaceMesh read_obj_mesh(const std::filesystem::path& path) {
  std::vector<Vec3> v;
  std::vector<Triangle> t;
  for (const auto& o : read_obj(path)) {
    const int base = static_cast<int>(v.size());
    v.insert(v.end(), o.vertices.begin(), o.vertices.end());
    for (const auto& tri : o.triangles) t.push_back({tri[0] + base, tri[1] + base, tri[2] + base});
  }
  try {
    return SurfaceMesh(std::move(v), std::move(t));
  } catch (const GeometryError& e) {
    throw SceneError(path.string() + ": " + e.what());
  }
}

void write_obj(const std::filesystem::path& path, const std::vector<ObjObject>& objects) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  int base = 1;
  for (const auto& o : objects) {
    out << "o " << o.name << '\n';
    for (const auto& v : o.vertices) out << fmt::format("v {:.17g} {:.17g} {:.17g}\n", v.x(), v.y(), v.z());
    for (const auto& t : o.triangles) out << fmt::format("f {} {} {}\n", t[0] + base, t[1] + base, t[2] + base);
    base += static_cast<int>(o.vertices.size());
  }
  if (!out) throw Error("write failed for " + path.string());
}

}  // namespace abd
