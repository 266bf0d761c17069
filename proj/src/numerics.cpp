#include "graphkrig/numerics.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <sstream>

#include "graphkrig/error.hpp"

namespace graphkrig {

Matrix SymEig::reconstruct() const {
  return vectors.transpose() * values.asDiagonal() * vectors;
}

Matrix symmetrized(const Matrix& a) {
  require(a.rows() == a.cols(), "matrix must be square");
  return 0.5 * (a + a.transpose());
}

double max_abs(const Matrix& a) {
  return a.size() == 0 ? 0.0 : a.cwiseAbs().maxCoeff();
}

SymEig sym_eig(const Matrix& a) {
  require(a.rows() == a.cols(), "sym_eig: matrix must be square");
  if (!a.allFinite()) fail(ErrorCode::InvalidArgument, "sym_eig: non-finite entries");
  const Index n = a.rows();
  SymEig out;
  if (n == 0) return out;
  Eigen::SelfAdjointEigenSolver<Matrix> solver(symmetrized(a));
  if (solver.info() != Eigen::Success) {
    fail(ErrorCode::Numeric, "sym_eig: eigensolver did not converge");
  }
  // Eigen returns ascending eigenvalues with eigenvectors in columns.
  out.values = solver.eigenvalues().reverse();
  out.vectors = solver.eigenvectors().rowwise().reverse().transpose();
  return out;
}

Matrix pseudo_inverse(const SymEig& eig, double rank_tol) {
  const Index n = eig.values.size();
  if (n == 0) return Matrix();
  const double top = eig.values.cwiseAbs().maxCoeff();
  Vector inv = Vector::Zero(n);
  if (top > 0.0) {
    for (Index i = 0; i < n; ++i) {
      if (std::abs(eig.values(i)) > rank_tol * top) inv(i) = 1.0 / eig.values(i);
    }
  }
  return eig.vectors.transpose() * inv.asDiagonal() * eig.vectors;
}

Matrix pseudo_inverse(const Matrix& a, double rank_tol) {
  return pseudo_inverse(sym_eig(a), rank_tol);
}

Matrix psd_project(const Matrix& a, std::optional<Index> rank) {
  const Index n = a.rows();
  if (rank && (*rank < 0 || *rank > n)) {
    std::ostringstream msg;
    msg << "psd_project: rank " << *rank << " outside [0, " << n << "]";
    fail(ErrorCode::InvalidArgument, msg.str());
  }
  SymEig eig = sym_eig(a);
  Vector kept = eig.values.cwiseMax(0.0);
  if (rank) {
    for (Index i = *rank; i < n; ++i) kept(i) = 0.0;
  }
  Matrix out = eig.vectors.transpose() * kept.asDiagonal() * eig.vectors;
  return symmetrized(out);
}

SpdFactor::SpdFactor(const Matrix& a) {
  require(a.rows() == a.cols(), "spd_solve: matrix must be square");
  if (!a.allFinite()) fail(ErrorCode::InvalidArgument, "spd_solve: non-finite entries");
  const Index n = a.rows();
  scale_.resize(n);
  for (Index i = 0; i < n; ++i) {
    const double d = a(i, i);
    if (!(d > 0.0)) {
      std::ostringstream msg;
      msg << "spd_solve: matrix is not positive definite (diagonal entry " << i
          << " is " << d << ")";
      fail(ErrorCode::Numeric, msg.str());
    }
    scale_(i) = 1.0 / std::sqrt(d);
  }
  Matrix equilibrated = scale_.asDiagonal() * symmetrized(a) * scale_.asDiagonal();
  Eigen::LLT<Matrix> llt(equilibrated);
  bool ok = llt.info() == Eigen::Success;
  if (ok && n > 0) {
    const Vector pivots = llt.matrixLLT().diagonal().cwiseAbs2();
    ok = pivots.minCoeff() > 1e-12 * pivots.maxCoeff();
  }
  if (!ok) {
    const SymEig eig = sym_eig(a);
    std::ostringstream msg;
    msg.precision(6);
    msg << "spd_solve: matrix is not numerically positive definite (smallest eigenvalue "
        << eig.values(n - 1) << ", largest " << eig.values(0) << ")";
    fail(ErrorCode::Numeric, msg.str());
  }
  lower_ = llt.matrixL();
}

Matrix SpdFactor::solve(const Matrix& b) const {
  require(b.rows() == scale_.size(), "spd_solve: right-hand side has wrong row count");
  Matrix x = scale_.asDiagonal() * b;
  lower_.triangularView<Eigen::Lower>().solveInPlace(x);
  lower_.transpose().triangularView<Eigen::Upper>().solveInPlace(x);
  return scale_.asDiagonal() * x;
}

Vector SpdFactor::solve(const Vector& b) const {
  Matrix x = solve(Matrix(b));
  return x.col(0);
}

Matrix spd_solve(const Matrix& a, const Matrix& b) { return SpdFactor(a).solve(b); }

Matrix scale_symmetric(const Matrix& a, const Vector& d) {
  return d.asDiagonal() * a * d.asDiagonal();
}

}  // namespace graphkrig
