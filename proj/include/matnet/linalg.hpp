#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <vector>

#include "matnet/errors.hpp"

namespace matnet {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Kronecker product A (x) B.
inline Matrix kron(const Matrix& A, const Matrix& B) {
  Matrix K(A.rows() * B.rows(), A.cols() * B.cols());
  for (Eigen::Index i = 0; i < A.rows(); ++i)
    for (Eigen::Index j = 0; j < A.cols(); ++j)
      K.block(i * B.rows(), j * B.cols(), B.rows(), B.cols()) = A(i, j) * B;
  return K;
}

/// A (x) I_k without forming the identity.
inline Matrix kron_identity(const Matrix& A, int k) {
  Matrix K = Matrix::Zero(A.rows() * k, A.cols() * k);
  for (Eigen::Index i = 0; i < A.rows(); ++i)
    for (Eigen::Index j = 0; j < A.cols(); ++j) {
      const double a = A(i, j);
      if (a == 0.0) continue;
      for (int s = 0; s < k; ++s) K(i * k + s, j * k + s) = a;
    }
  return K;
}

/// Square blockwise-diagonal matrix of equally sized blocks.
struct BlockDiagonal {
  std::vector<Matrix> blocks;

  int block_dim() const { return blocks.empty() ? 0 : static_cast<int>(blocks.front().rows()); }
  int dim() const { return block_dim() * static_cast<int>(blocks.size()); }

  Matrix assemble() const {
    const int k = block_dim();
    Matrix M = Matrix::Zero(dim(), dim());
    for (std::size_t b = 0; b < blocks.size(); ++b) {
      if (blocks[b].rows() != k || blocks[b].cols() != k)
        throw Error("BlockDiagonal: blocks must all be square of equal size");
      M.block(static_cast<Eigen::Index>(b) * k, static_cast<Eigen::Index>(b) * k, k, k) = blocks[b];
    }
    return M;
  }
};

inline Matrix blkdiag(const std::vector<Matrix>& blocks) {
  return BlockDiagonal{blocks}.assemble();
}

inline Matrix symmetrize(const Matrix& M) { return 0.5 * (M + M.transpose()); }

inline bool is_symmetric(const Matrix& M, double tol) {
  return M.rows() == M.cols() && (M - M.transpose()).cwiseAbs().maxCoeff() <= tol * (1.0 + M.cwiseAbs().maxCoeff());
}

inline double min_eig_sym(const Matrix& S) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrize(S), Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

inline double max_eig_sym(const Matrix& S) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrize(S), Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff();
}

inline bool is_spd(const Matrix& S, double sym_tol = 1e-10) {
  return is_symmetric(S, sym_tol) && min_eig_sym(S) > 0.0;
}

/// Largest real part over the (possibly complex) spectrum of a square matrix.
inline double max_real_eig(const Matrix& A) {
  Eigen::EigenSolver<Matrix> es(A, /*computeEigenvectors=*/false);
  return es.eigenvalues().real().maxCoeff();
}

/// Symmetric square root of a positive semidefinite matrix. Eigenvalues below
/// -tol are rejected, small negatives are clamped to zero.
inline Matrix sym_sqrt(const Matrix& S, double tol = 1e-10) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrize(S));
  Vector lam = es.eigenvalues();
  if (lam.minCoeff() < -tol * (1.0 + lam.cwiseAbs().maxCoeff()))
    throw NonPD("sym_sqrt: matrix is not positive semidefinite");
  Vector root = lam.cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * root.asDiagonal() * es.eigenvectors().transpose();
}

/// S^{-1/2} for symmetric positive definite S.
inline Matrix sym_inv_sqrt(const Matrix& S) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrize(S));
  Vector lam = es.eigenvalues();
  if (lam.minCoeff() <= 0.0)
    throw NonPD("sym_inv_sqrt: matrix is not positive definite");
  Vector root = lam.cwiseSqrt().cwiseInverse();
  return es.eigenvectors() * root.asDiagonal() * es.eigenvectors().transpose();
}

}  // namespace matnet
