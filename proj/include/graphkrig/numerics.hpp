#pragma once

#include <Eigen/Core>
#include <optional>

namespace graphkrig {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Symmetric eigendecomposition A = U' diag(d) U.
///
/// Rows of `vectors` are the orthonormal eigenvectors u_i; `values` are
/// sorted in descending order so the last entry is the smallest.
struct SymEig {
  Matrix vectors;
  Vector values;

  Matrix reconstruct() const;
};

/// (A + A') / 2.
Matrix symmetrized(const Matrix& a);

/// Decomposes the symmetric part of `a`. Rejects non-finite input.
SymEig sym_eig(const Matrix& a);

/// Moore-Penrose inverse of a symmetric matrix. Eigenvalues with
/// |d| <= rank_tol * max|d| are treated as exact zeros.
Matrix pseudo_inverse(const Matrix& a, double rank_tol = 1e-10);
Matrix pseudo_inverse(const SymEig& eig, double rank_tol = 1e-10);

/// Nearest PSD matrix in Frobenius norm (negative eigenvalues clipped to 0).
/// With `rank`, only the `rank` largest clipped eigenvalues are retained.
Matrix psd_project(const Matrix& a, std::optional<Index> rank = std::nullopt);

/// Cholesky factorization of a symmetric positive definite matrix.
///
/// The matrix is equilibrated by its diagonal before factoring, so the
/// conditioning check (smallest pivot^2 > 1e-12 * largest pivot^2) is
/// invariant to a diagonal rescaling of the unknowns. Indefinite or
/// numerically singular input throws ErrorCode::Numeric with the smallest
/// eigenvalue in the message.
class SpdFactor {
 public:
  explicit SpdFactor(const Matrix& a);

  Matrix solve(const Matrix& b) const;
  Vector solve(const Vector& b) const;
  Index size() const { return scale_.size(); }

 private:
  Vector scale_;  // D^{-1/2}
  Matrix lower_;
};

/// Solves A X = B for SPD A.
Matrix spd_solve(const Matrix& a, const Matrix& b);

/// Symmetric square-root scaling diag(d) * A * diag(d).
Matrix scale_symmetric(const Matrix& a, const Vector& d);

double max_abs(const Matrix& a);

}  // namespace graphkrig
