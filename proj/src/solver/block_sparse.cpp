#include "abd/solver/block_sparse.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <string>

#include <Eigen/Cholesky>

#include "abd/error.hpp"

namespace abd {

BlockSparseMatrix::BlockSparseMatrix(std::vector<int> block_sizes, std::vector<std::array<int, 2>> upper)
    : sizes_(std::move(block_sizes)) {
  offsets_.resize(sizes_.size());
  for (std::size_t i = 0; i < sizes_.size(); ++i) {
    offsets_[i] = rows_;
    rows_ += sizes_[i];
    diag_.push_back(Eigen::MatrixXd::Zero(sizes_[i], sizes_[i]));
  }
  std::sort(upper.begin(), upper.end());
  upper.erase(std::unique(upper.begin(), upper.end()), upper.end());
  for (const auto& [i, j] : upper) {
    if (!(i < j)) throw ContractViolation("BlockSparseMatrix: off-diagonal entries must satisfy i < j");
    off_.push_back({i, j, Eigen::MatrixXd::Zero(sizes_[i], sizes_[j])});
  }
}

int BlockSparseMatrix::find(int i, int j) const {
  auto it = std::lower_bound(off_.begin(), off_.end(), std::array<int, 2>{i, j},
                             [](const OffDiagonal& o, const std::array<int, 2>& k) {
                               return o.i != k[0] ? o.i < k[0] : o.j < k[1];
                             });
  if (it == off_.end() || it->i != i || it->j != j) return -1;
  return static_cast<int>(it - off_.begin());
}

void BlockSparseMatrix::set_zero() {
  for (auto& d : diag_) d.setZero();
  for (auto& o : off_) o.m.setZero();
}

Eigen::VectorXd BlockSparseMatrix::multiply(const Eigen::VectorXd& x) const {
  Eigen::VectorXd y = Eigen::VectorXd::Zero(rows_);
  for (int i = 0; i < num_blocks(); ++i) {
    y.segment(offsets_[i], sizes_[i]).noalias() += diag_[i] * x.segment(offsets_[i], sizes_[i]);
  }
  for (const auto& o : off_) {
    y.segment(offsets_[o.i], sizes_[o.i]).noalias() += o.m * x.segment(offsets_[o.j], sizes_[o.j]);
    y.segment(offsets_[o.j], sizes_[o.j]).noalias() += o.m.transpose() * x.segment(offsets_[o.i], sizes_[o.i]);
  }
  return y;
}

Eigen::MatrixXd BlockSparseMatrix::to_dense() const {
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(rows_, rows_);
  for (int i = 0; i < num_blocks(); ++i) d.block(offsets_[i], offsets_[i], sizes_[i], sizes_[i]) = diag_[i];
  for (const auto& o : off_) {
    d.block(offsets_[o.i], offsets_[o.j], sizes_[o.i], sizes_[o.j]) = o.m;
    d.block(offsets_[o.j], offsets_[o.i], sizes_[o.j], sizes_[o.i]) = o.m.transpose();
  }
  return d;
}

namespace {

// Greedy minimum-degree elimination order on the block adjacency graph.
std::vector<int> minimum_degree_order(int n, const std::vector<std::set<int>>& adjacency) {
  std::vector<std::set<int>> g = adjacency;
  std::vector<bool> done(n, false);
  std::vector<int> order;
  order.reserve(n);
  for (int step = 0; step < n; ++step) {
    int best = -1;
    for (int v = 0; v < n; ++v) {
      if (done[v]) continue;
      if (best < 0 || g[v].size() < g[best].size()) best = v;
    }
    order.push_back(best);
    done[best] = true;
    std::vector<int> nb(g[best].begin(), g[best].end());
    for (int a : nb) {
      g[a].erase(best);
      for (int b : nb) {
        if (a != b) g[a].insert(b);
      }
    }
    g[best].clear();
  }
  return order;
}

struct Factor {
  std::vector<int> perm;      // position -> original block
  std::vector<int> sizes;     // by position
  std::vector<int> offsets;   // original offsets, by position
  std::vector<Eigen::MatrixXd> diag;                   // lower-triangular L_kk
  std::vector<std::map<int, Eigen::MatrixXd>> below;   // column k: row position -> L_ik
};

Factor factorize(const BlockSparseMatrix& h) {
  const int n = h.num_blocks();
  std::vector<std::set<int>> adj(n);
  for (const auto& o : h.off()) {
    adj[o.i].insert(o.j);
    adj[o.j].insert(o.i);
  }
  Factor f;
  f.perm = minimum_degree_order(n, adj);
  std::vector<int> pos(n);
  for (int k = 0; k < n; ++k) pos[f.perm[k]] = k;
  f.sizes.resize(n);
  f.offsets.resize(n);
  f.diag.resize(n);
  f.below.resize(n);
  for (int k = 0; k < n; ++k) {
    f.sizes[k] = h.block_size(f.perm[k]);
    f.offsets[k] = h.offset(f.perm[k]);
    f.diag[k] = h.diag(f.perm[k]);
  }
  // Working copy of the lower part in permuted numbering: below[col][row], row > col.
  for (const auto& o : h.off()) {
    const int pi = pos[o.i];
    const int pj = pos[o.j];
    if (pi > pj) {
      f.below[pj][pi] = o.m;
    } else {
      f.below[pi][pj] = o.m.transpose();
    }
  }

  for (int k = 0; k < n; ++k) {
    Eigen::LLT<Eigen::MatrixXd> llt(f.diag[k]);
    if (llt.info() != Eigen::Success) {
      throw FactorizationError("block Cholesky: pivot block " + std::to_string(f.perm[k]) + " is not positive definite",
                               f.perm[k]);
    }
    f.diag[k] = llt.matrixL();
    const auto lkk = f.diag[k].triangularView<Eigen::Lower>();
    for (auto& [i, lik] : f.below[k]) {
      // L_ik = A_ik L_kk^{-T}
      lik = lkk.solve(lik.transpose()).transpose();
    }
    for (auto it = f.below[k].begin(); it != f.below[k].end(); ++it) {
      const int i = it->first;
      f.diag[i].noalias() -= it->second * it->second.transpose();
      for (auto jt = f.below[k].begin(); jt != it; ++jt) {
        const int j = jt->first;  // j < i
        auto [slot, inserted] = f.below[j].try_emplace(i, Eigen::MatrixXd::Zero(f.sizes[i], f.sizes[j]));
        slot->second.noalias() -= it->second * jt->second.transpose();
      }
    }
  }
  return f;
}

Eigen::VectorXd apply_inverse(const Factor& f, const Eigen::VectorXd& rhs) {
  const int n = static_cast<int>(f.perm.size());
  std::vector<Eigen::VectorXd> z(n);
  for (int k = 0; k < n; ++k) z[k] = rhs.segment(f.offsets[k], f.sizes[k]);
  for (int k = 0; k < n; ++k) {
    z[k] = f.diag[k].triangularView<Eigen::Lower>().solve(z[k]);
    for (const auto& [i, lik] : f.below[k]) z[i].noalias() -= lik * z[k];
  }
  for (int k = n - 1; k >= 0; --k) {
    for (const auto& [i, lik] : f.below[k]) z[k].noalias() -= lik.transpose() * z[i];
    z[k] = f.diag[k].triangularView<Eigen::Lower>().transpose().solve(z[k]);
  }
  Eigen::VectorXd x(rhs.size());
  for (int k = 0; k < n; ++k) x.segment(f.offsets[k], f.sizes[k]) = z[k];
  return x;
}

}  // namespace

Eigen::VectorXd solve_spd(const BlockSparseMatrix& h, const Eigen::VectorXd& rhs) {
  if (h.rows() == 0) return Eigen::VectorXd();
  const Factor f = factorize(h);
  Eigen::VectorXd x = apply_inverse(f, rhs);
  const double target = 1e-8 * rhs.norm();
  for (int refine = 0; refine < 4; ++refine) {
    const Eigen::VectorXd r = rhs - h.multiply(x);
    if (r.norm() <= target) break;
    x += apply_inverse(f, r);
  }
  return x;
}

}  // namespace abd
