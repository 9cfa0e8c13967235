#pragma once

#include <array>
#include <vector>

#include <Eigen/Core>

namespace abd {

/// Symmetric matrix of dense blocks. Only the diagonal and the upper blocks (i < j) listed in
/// the pattern are stored; block sizes may differ (12 for a free body, fewer for constrained
/// ones).
class BlockSparseMatrix {
 public:
  struct OffDiagonal {
    int i = 0;
    int j = 0;
    Eigen::MatrixXd m;
  };

  BlockSparseMatrix() = default;
  /// `upper` lists block pairs (i < j); it is sorted and deduplicated.
  BlockSparseMatrix(std::vector<int> block_sizes, std::vector<std::array<int, 2>> upper);

  int num_blocks() const { return static_cast<int>(sizes_.size()); }
  int block_size(int i) const { return sizes_[i]; }
  int offset(int i) const { return offsets_[i]; }
  int rows() const { return rows_; }

  Eigen::MatrixXd& diag(int i) { return diag_[i]; }
  const Eigen::MatrixXd& diag(int i) const { return diag_[i]; }
  std::vector<OffDiagonal>& off() { return off_; }
  const std::vector<OffDiagonal>& off() const { return off_; }

  /// Index into off() of block (i, j), i < j; -1 if outside the pattern.
  int find(int i, int j) const;

  void set_zero();
  Eigen::VectorXd multiply(const Eigen::VectorXd& x) const;
  Eigen::MatrixXd to_dense() const;

 private:
  std::vector<int> sizes_;
  std::vector<int> offsets_;
  int rows_ = 0;
  std::vector<Eigen::MatrixXd> diag_;
  std::vector<OffDiagonal> off_;
};

/// Solves H x = rhs by block Cholesky with a minimum-degree block ordering and iterative
/// refinement to ||H x - rhs|| <= 1e-8 ||rhs||. Throws FactorizationError naming the failing
/// block in the caller's numbering.
Eigen::VectorXd solve_spd(const BlockSparseMatrix& h, const Eigen::VectorXd& rhs);

}  // namespace abd
