#pragma once

#include <optional>
#include <vector>

#include <Eigen/Core>

#include "abd/constraints/virtual_tet.hpp"

namespace abd {

/// Joint description of one body, in virtual-tet terms.
struct BodyJoints {
  VirtualTet tet;
  /// Entries of vec(P) held at their initial value.
  std::array<bool, 12> fixed{};
  /// Linear equalities rows * vec(P) = rhs over this body's own free entries.
  Eigen::MatrixXd rows;
  Eigen::VectorXd rhs;
};

/// Tet vertex `vertex_a` of body_a and `vertex_b` of body_b are the same point.
struct VertexLink {
  int body_a = 0;
  int vertex_a = 0;
  int body_b = 0;
  int vertex_b = 0;
};

struct BodyDofInput {
  bool kinematic = false;
  Vec12 q;
  std::optional<BodyJoints> joints;
};

/// Reduced unknowns y, split into groups (blocks of the Newton system). Body b's coordinates are
/// q_b = sum over its refs of T y_group + offset. Plain bodies own one 12-entry group with T = I.
class DofLayout {
 public:
  struct Ref {
    int group = 0;
    Eigen::MatrixXd t;       // 12 x group size, coordinates
    Eigen::MatrixXd s;       // 12 x group size, vec(P) entries (constrained bodies only)
  };
  struct BodyMap {
    bool kinematic = false;
    bool identity = false;   // one group, T = I
    std::vector<Ref> refs;
    Vec12 offset = Vec12::Zero();
    Vec12 p_offset = Vec12::Zero();
    std::optional<VirtualTet> tet;
  };

  DofLayout() = default;
  /// Throws ContractViolation for inconsistent links (fixed and linked entries, vertices that do
  /// not coincide, rows touching linked entries or violated at the initial state) and Error for a
  /// body left with no free unknown.
  DofLayout(const std::vector<BodyDofInput>& bodies, const std::vector<VertexLink>& links);

  int num_groups() const { return static_cast<int>(group_size_.size()); }
  int group_size(int g) const { return group_size_[g]; }
  int group_offset(int g) const { return group_offset_[g]; }
  int num_unknowns() const { return total_; }
  const std::vector<int>& group_sizes() const { return group_size_; }
  const BodyMap& body(int b) const { return bodies_[b]; }
  int num_bodies() const { return static_cast<int>(bodies_.size()); }

  /// Initial value of y reproducing the input coordinates.
  const Eigen::VectorXd& initial() const { return y0_; }

  Vec12 coords(int b, const Eigen::VectorXd& y) const;
  /// q_b differences for a step dy (offsets excluded).
  Vec12 coords_delta(int b, const Eigen::VectorXd& dy) const;
  /// vec(P) of a constrained body; fixed and linked entries are exact copies of stored values.
  Vec12 virtual_vertices(int b, const Eigen::VectorXd& y) const;

  /// Groups referenced by body b, in reference order.
  std::vector<int> groups_of(int b) const;

 private:
  std::vector<int> group_size_;
  std::vector<int> group_offset_;
  int total_ = 0;
  std::vector<BodyMap> bodies_;
  Eigen::VectorXd y0_;
};

}  // namespace abd
