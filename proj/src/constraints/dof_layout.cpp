#include "abd/constraints/dof_layout.hpp"

#include <map>
#include <numeric>
#include <string>

#include <Eigen/LU>

#include "abd/error.hpp"

namespace abd {

namespace {

struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
};

}  // namespace

DofLayout::DofLayout(const std::vector<BodyDofInput>& bodies, const std::vector<VertexLink>& links) {
  const int n = static_cast<int>(bodies.size());
  std::vector<Vec12> p0(n, Vec12::Zero());
  for (int b = 0; b < n; ++b) {
    if (bodies[b].joints) p0[b] = vec(bodies[b].joints->tet.from_coords(bodies[b].q));
  }

  UnionFind uf(4 * n);
  std::vector<std::array<bool, 4>> linked(n, {false, false, false, false});
  for (const auto& l : links) {
    for (auto [body, vertex] : {std::pair{l.body_a, l.vertex_a}, std::pair{l.body_b, l.vertex_b}}) {
      if (body < 0 || body >= n || vertex < 0 || vertex > 3) throw ContractViolation("vertex link out of range");
      if (!bodies[body].joints) throw ContractViolation("vertex link on a body without a virtual tetrahedron");
      if (bodies[body].kinematic) throw ContractViolation("vertex link on a kinematic body");
      for (int c = 0; c < 3; ++c) {
        if (bodies[body].joints->fixed[3 * vertex + c]) {
          throw ContractViolation("tet vertex " + std::to_string(vertex) + " of body " + std::to_string(body) +
                                  " is both fixed and linked");
        }
      }
      linked[body][vertex] = true;
    }
    const Vec3 xa = p0[l.body_a].segment<3>(3 * l.vertex_a);
    const Vec3 xb = p0[l.body_b].segment<3>(3 * l.vertex_b);
    if ((xa - xb).norm() > 1e-9 * (1.0 + xa.norm())) {
      throw ContractViolation("linked tet vertices of bodies " + std::to_string(l.body_a) + " and " +
                              std::to_string(l.body_b) + " do not coincide");
    }
    uf.unite(4 * l.body_a + l.vertex_a, 4 * l.body_b + l.vertex_b);
  }

  std::map<int, int> class_group;
  std::vector<double> y0;
  auto new_group = [&](int size, const Eigen::VectorXd& init) {
    group_size_.push_back(size);
    group_offset_.push_back(total_);
    total_ += size;
    for (int i = 0; i < size; ++i) y0.push_back(init[i]);
    return static_cast<int>(group_size_.size()) - 1;
  };

  bodies_.resize(n);
  for (int b = 0; b < n; ++b) {
    const auto& in = bodies[b];
    BodyMap& m = bodies_[b];
    m.kinematic = in.kinematic;
    if (in.kinematic) {
      m.offset = in.q;
      continue;
    }
    if (!in.joints) {
      m.identity = true;
      m.refs.push_back({new_group(12, in.q), Mat12::Identity(), Eigen::MatrixXd()});
      continue;
    }

    const BodyJoints& j = *in.joints;
    m.tet = j.tet;
    const Mat12& g = j.tet.map();
    std::vector<int> free;
    for (int e = 0; e < 12; ++e) {
      if (!j.fixed[e] && !linked[b][e / 3]) free.push_back(e);
    }
    for (int e = 0; e < 12; ++e) {
      if (j.fixed[e]) m.p_offset[e] = p0[b][e];
    }

    Eigen::MatrixXd s_free = Eigen::MatrixXd::Zero(12, static_cast<int>(free.size()));
    for (std::size_t k = 0; k < free.size(); ++k) {
      s_free(free[k], static_cast<int>(k)) = 1.0;
      m.p_offset[free[k]] = p0[b][free[k]];
    }

    Eigen::MatrixXd basis = Eigen::MatrixXd::Identity(static_cast<int>(free.size()), static_cast<int>(free.size()));
    if (j.rows.rows() > 0) {
      if (j.rows.cols() != 12 || j.rhs.size() != j.rows.rows()) {
        throw ContractViolation("linear joint rows must have 12 columns and one rhs entry per row");
      }
      for (int r = 0; r < j.rows.rows(); ++r) {
        for (int e = 0; e < 12; ++e) {
          if (linked[b][e / 3] && j.rows(r, e) != 0.0) {
            throw ContractViolation("linear joint row touches a linked tet vertex");
          }
        }
      }
      const Eigen::VectorXd residual = j.rows * p0[b] - j.rhs;
      if (residual.norm() > 1e-9 * (1.0 + j.rhs.norm() + p0[b].norm())) {
        throw ContractViolation("linear joint rows are violated by the initial state");
      }
      const Eigen::MatrixXd c_free = j.rows * s_free;
      if (c_free.cols() > 0) {
        Eigen::FullPivLU<Eigen::MatrixXd> lu(c_free);
        lu.setThreshold(1e-12);
        basis = lu.rank() == 0 ? basis : Eigen::MatrixXd(lu.kernel());
        if (lu.rank() == c_free.cols()) basis.resize(c_free.cols(), 0);
      }
    }

    int free_count = 0;
    if (basis.cols() > 0) {
      const Eigen::MatrixXd s = s_free * basis;
      m.refs.push_back({new_group(static_cast<int>(basis.cols()), Eigen::VectorXd::Zero(basis.cols())), g * s, s});
      free_count += static_cast<int>(basis.cols());
    }
    for (int v = 0; v < 4; ++v) {
      if (!linked[b][v]) continue;
      const int cls = uf.find(4 * b + v);
      auto it = class_group.find(cls);
      if (it == class_group.end()) {
        it = class_group.emplace(cls, new_group(3, p0[b].segment<3>(3 * v))).first;
      }
      for (const auto& r : m.refs) {
        if (r.group == it->second) throw ContractViolation("two tet vertices of one body are linked together");
      }
      Eigen::MatrixXd s = Eigen::MatrixXd::Zero(12, 3);
      s.block<3, 3>(3 * v, 0).setIdentity();
      m.refs.push_back({it->second, g * s, s});
      free_count += 3;
    }
    if (free_count == 0) throw Error("body " + std::to_string(b) + " is over-constrained: no free unknown remains");
    m.offset = g * m.p_offset;
  }
  y0_ = Eigen::Map<const Eigen::VectorXd>(y0.data(), static_cast<Eigen::Index>(y0.size()));
}

Vec12 DofLayout::coords(int b, const Eigen::VectorXd& y) const {
  const BodyMap& m = bodies_[b];
  if (m.identity) return y.segment<12>(group_offset_[m.refs[0].group]);
  Vec12 q = m.offset;
  for (const auto& r : m.refs) q.noalias() += r.t * y.segment(group_offset_[r.group], group_size_[r.group]);
  return q;
}

Vec12 DofLayout::coords_delta(int b, const Eigen::VectorXd& dy) const {
  const BodyMap& m = bodies_[b];
  if (m.identity) return dy.segment<12>(group_offset_[m.refs[0].group]);
  Vec12 q = Vec12::Zero();
  for (const auto& r : m.refs) q.noalias() += r.t * dy.segment(group_offset_[r.group], group_size_[r.group]);
  return q;
}

Vec12 DofLayout::virtual_vertices(int b, const Eigen::VectorXd& y) const {
  const BodyMap& m = bodies_[b];
  if (!m.tet) throw ContractViolation("virtual_vertices: body has no virtual tetrahedron");
  Vec12 p = m.p_offset;
  for (const auto& r : m.refs) p.noalias() += r.s * y.segment(group_offset_[r.group], group_size_[r.group]);
  return p;
}

std::vector<int> DofLayout::groups_of(int b) const {
  std::vector<int> g;
  for (const auto& r : bodies_[b].refs) g.push_back(r.group);
  return g;
}

}  // namespace abd
