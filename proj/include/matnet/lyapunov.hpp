#pragma once

#include <Eigen/Dense>
#include <vector>

#include "matnet/linalg.hpp"
#include "matnet/tolerances.hpp"

namespace matnet {

inline double lyapunov_residual(const Matrix& A, const Matrix& QQ, const Matrix& X) {
  return (A * X + X * A.transpose() + QQ).norm();
}

inline bool is_hurwitz(const Matrix& A, const Tolerances& tol = default_tolerances()) {
  if (A.rows() == 0) return true;
  return max_real_eig(A) < -tol.hurwitz_margin * A.norm();
}

/// Dense vectorized solve of A X + X A' + QQ = 0 through
/// (I (x) A + A (x) I) vec(X) = -vec(QQ). Quadratic memory in the state
/// dimension; serves as the small-problem fallback and as an independent
/// oracle for the Schur-based path.
inline Matrix solve_lyapunov_kron(const Matrix& A, const Matrix& QQ) {
  const Eigen::Index m = A.rows();
  Matrix K = Matrix::Zero(m * m, m * m);
  const Matrix I = Matrix::Identity(m, m);
  // vec(A X) = (I (x) A) vec(X); vec(X A') = (A (x) I) vec(X)
  for (Eigen::Index i = 0; i < m; ++i) K.block(i * m, i * m, m, m) = A;
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < m; ++j)
      if (A(i, j) != 0.0) K.block(i * m, j * m, m, m) += A(i, j) * I;
  Eigen::Map<const Vector> q(QQ.data(), m * m);
  Vector x = K.partialPivLu().solve(-q);
  return Eigen::Map<const Matrix>(x.data(), m, m);
}

namespace detail {

// Quasi-triangular Sylvester back-substitution: T Y + Y T' = C with T in real
// Schur form. Blocks are solved last-to-first; each (i, j) block system is at
// most 4 x 4 after vectorization.
inline Matrix solve_schur_sylvester(const Matrix& T, const Matrix& C) {
  const Eigen::Index m = T.rows();
  // Partition into 1x1 / 2x2 diagonal blocks.
  std::vector<Eigen::Index> starts;
  for (Eigen::Index p = 0; p < m;) {
    starts.push_back(p);
    if (p + 1 < m && T(p + 1, p) != 0.0)
      p += 2;
    else
      p += 1;
  }
  const int nb = static_cast<int>(starts.size());
  auto bsize = [&](int b) {
    return (b + 1 < nb ? starts[b + 1] : m) - starts[b];
  };

  Matrix Y = Matrix::Zero(m, m);
  for (int jb = nb - 1; jb >= 0; --jb) {
    const Eigen::Index j0 = starts[jb], js = bsize(jb);
    for (int ib = nb - 1; ib >= 0; --ib) {
      const Eigen::Index i0 = starts[ib], is = bsize(ib);
      Matrix rhs = C.block(i0, j0, is, js);
      if (i0 + is < m)
        rhs -= T.block(i0, i0 + is, is, m - i0 - is) * Y.block(i0 + is, j0, m - i0 - is, js);
      if (j0 + js < m)
        rhs -= Y.block(i0, j0 + js, is, m - j0 - js) *
               T.block(j0, j0 + js, js, m - j0 - js).transpose();
      // (I (x) T_ii + T_jj (x) I) vec(Y_ij) = vec(rhs)
      const Matrix Tii = T.block(i0, i0, is, is);
      const Matrix Tjj = T.block(j0, j0, js, js);
      Matrix S = kron(Matrix::Identity(js, js), Tii) + kron(Tjj, Matrix::Identity(is, is));
      Eigen::Map<const Vector> r(rhs.data(), is * js);
      Vector y = S.partialPivLu().solve(r);
      Y.block(i0, j0, is, js) = Eigen::Map<const Matrix>(y.data(), is, js);
    }
  }
  return Y;
}

}  // namespace detail

/// Controllability-gramian Lyapunov solve: finds the symmetric X with
/// A X + X A' + QQ = 0 for Hurwitz A and symmetric PSD QQ. Schur-based
/// (Bartels-Stewart); falls back to the vectorized solve on small problems
/// if the residual check fails.
inline Matrix solve_lyapunov(const Matrix& A, const Matrix& QQ,
                             const Tolerances& tol = default_tolerances()) {
  if (A.rows() != A.cols() || QQ.rows() != QQ.cols() || A.rows() != QQ.rows())
    throw ConfigInvalid("solve_lyapunov: A and QQ must be square of equal size");
  if (A.rows() == 0) return Matrix(0, 0);
  if (!is_hurwitz(A, tol)) throw NotHurwitz("solve_lyapunov: A is not Hurwitz");

  Eigen::RealSchur<Matrix> schur(A);
  if (schur.info() != Eigen::Success)
    throw SolveFailed("solve_lyapunov: Schur factorization failed");
  const Matrix& U = schur.matrixU();
  const Matrix& T = schur.matrixT();

  const Matrix C = -U.transpose() * QQ * U;
  Matrix X = U * detail::solve_schur_sylvester(T, C) * U.transpose();
  X = symmetrize(X);

  double res = lyapunov_residual(A, QQ, X);
  if (res > tol.lyap_residual * (1.0 + X.norm()) && A.rows() <= 50) {
    X = symmetrize(solve_lyapunov_kron(A, QQ));
    res = lyapunov_residual(A, QQ, X);
  }
  if (res > tol.lyap_residual * (1.0 + X.norm()))
    throw SolveFailed("solve_lyapunov: residual " + std::to_string(res) + " exceeds tolerance");
  return X;
}

}  // namespace matnet
