#pragma once

#include <Eigen/Eigenvalues>

namespace abd {

/// Clamp the negative eigenvalues of a symmetric matrix to zero in place.
template <class Derived>
void project_psd(Eigen::MatrixBase<Derived>& h) {
  using Matrix = typename Derived::PlainObject;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(h.eval());
  auto lambda = eig.eigenvalues();
  if (lambda.minCoeff() >= 0.0) return;
  for (Eigen::Index i = 0; i < lambda.size(); ++i) lambda[i] = lambda[i] < 0.0 ? 0.0 : lambda[i];
  h = eig.eigenvectors() * lambda.asDiagonal() * eig.eigenvectors().transpose();
}

}  // namespace abd
