#pragma once

// Dense symmetric / positive definite kernels. Everything else in blfix is
// written in terms of these.

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <string>

#include "blfix/errors.hpp"

namespace blfix {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

namespace detail {

inline Matrix symmetrized(const Matrix& a) {
  if (a.rows() != a.cols()) {
    throw DimensionMismatch("expected a square matrix, got " + std::to_string(a.rows()) + "x" +
                            std::to_string(a.cols()));
  }
  return 0.5 * (a + a.transpose());
}

}  // namespace detail

/// Real symmetric matrix (tangent vectors, gradients). Symmetrized on construction.
class SymMatrix {
 public:
  SymMatrix() = default;

  explicit SymMatrix(const Matrix& a) : a_(detail::symmetrized(a)) {
    if (!a_.allFinite()) throw InvalidArgument("symmetric matrix has non-finite entries");
  }

  static SymMatrix zero(Index n) { return SymMatrix(Matrix::Zero(n, n)); }
  static SymMatrix identity(Index n) { return SymMatrix(Matrix::Identity(n, n)); }

  Index dim() const noexcept { return a_.rows(); }
  const Matrix& matrix() const noexcept { return a_; }
  double operator()(Index i, Index j) const { return a_(i, j); }

  friend bool operator==(const SymMatrix& x, const SymMatrix& y) { return x.a_ == y.a_; }

 private:
  Matrix a_;
};

/// Symmetric positive definite matrix. The input is symmetrized as (A+A^T)/2 and
/// must admit a Cholesky factorization; the factor is kept for later solves.
class SpdMatrix {
 public:
  explicit SpdMatrix(const Matrix& a) : a_(detail::symmetrized(a)) {
    if (!a_.allFinite()) throw CholeskyFailure("matrix has non-finite entries");
    llt_.compute(a_);
    if (llt_.info() != Eigen::Success) {
      throw CholeskyFailure("matrix of dimension " + std::to_string(a_.rows()) +
                            " is not numerically positive definite");
    }
    // LLT only inspects the diagonal pivots; a zero or denormal pivot slips through.
    const auto diag = llt_.matrixLLT().diagonal();
    if (a_.rows() > 0 && !(diag.minCoeff() > 0.0 && diag.allFinite())) {
      throw CholeskyFailure("Cholesky factor has a non-positive pivot");
    }
  }

  explicit SpdMatrix(const SymMatrix& s) : SpdMatrix(s.matrix()) {}

  static SpdMatrix identity(Index n) { return SpdMatrix(Matrix::Identity(n, n)); }

  Index dim() const noexcept { return a_.rows(); }
  const Matrix& matrix() const noexcept { return a_; }
  double operator()(Index i, Index j) const { return a_(i, j); }
  const Eigen::LLT<Matrix>& cholesky() const noexcept { return llt_; }

  SymMatrix sym() const { return SymMatrix(a_); }

  friend bool operator==(const SpdMatrix& x, const SpdMatrix& y) { return x.a_ == y.a_; }

 private:
  Matrix a_;
  Eigen::LLT<Matrix> llt_;
};

/// Eigendecomposition S = V diag(values) V^T, values ascending.
struct SymEig {
  Vector values;
  Matrix vectors;
};

inline double log_det(const SpdMatrix& x) {
  return 2.0 * x.cholesky().matrixLLT().diagonal().array().log().sum();
}

/// Solves X S = B through the stored Cholesky factor.
inline Matrix spd_solve(const SpdMatrix& x, const Matrix& b) {
  if (b.rows() != x.dim()) {
    throw DimensionMismatch("spd_solve: right-hand side has " + std::to_string(b.rows()) +
                            " rows, expected " + std::to_string(x.dim()));
  }
  return x.cholesky().solve(b);
}

/// Explicit inverse; only for call sites whose result *is* the inverse matrix.
inline SpdMatrix spd_inverse(const SpdMatrix& x) {
  return SpdMatrix(spd_solve(x, Matrix::Identity(x.dim(), x.dim())));
}

inline SymEig sym_eig(const SymMatrix& s) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(s.matrix(), Eigen::ComputeEigenvectors);
  if (es.info() != Eigen::Success) {
    throw ConvergenceFailure("symmetric eigensolver did not converge (dimension " +
                             std::to_string(s.dim()) + ")");
  }
  return {es.eigenvalues(), es.eigenvectors()};
}

inline Vector sym_eigenvalues(const Matrix& symmetric) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(symmetric, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) {
    throw ConvergenceFailure("symmetric eigensolver did not converge");
  }
  return es.eigenvalues();
}

inline double lambda_min(const SymMatrix& s) { return sym_eigenvalues(s.matrix())(0); }
inline double lambda_max(const SymMatrix& s) {
  return sym_eigenvalues(s.matrix())(s.dim() - 1);
}
inline double lambda_min(const SpdMatrix& x) { return sym_eigenvalues(x.matrix())(0); }
inline double lambda_max(const SpdMatrix& x) {
  return sym_eigenvalues(x.matrix())(x.dim() - 1);
}

/// Operator (spectral) norm of a symmetric matrix.
inline double op_norm(const SymMatrix& s) {
  const Vector ev = sym_eigenvalues(s.matrix());
  return std::max(std::abs(ev(0)), std::abs(ev(ev.size() - 1)));
}
inline double op_norm(const SpdMatrix& x) { return lambda_max(x); }

/// Smallest lambda with X <= lambda Y, i.e. lambda_max(L^{-1} X L^{-T}) for Y = L L^T.
inline double max_gen_eig(const SpdMatrix& x, const SpdMatrix& y) {
  if (x.dim() != y.dim()) {
    throw DimensionMismatch("max_gen_eig: dimensions " + std::to_string(x.dim()) + " and " +
                            std::to_string(y.dim()));
  }
  const auto lower = y.cholesky().matrixL();
  Matrix w = lower.solve(x.matrix());
  w = lower.solve(w.transpose()).transpose();
  const Vector ev = sym_eigenvalues(0.5 * (w + w.transpose()));
  return ev(ev.size() - 1);
}

/// V f(diag(lambda)) V^T for a scalar function f.
template <typename Fn>
Matrix spectral_apply(const SymEig& eig, Fn&& f) {
  const Vector mapped = eig.values.unaryExpr(std::forward<Fn>(f));
  return eig.vectors * mapped.asDiagonal() * eig.vectors.transpose();
}

inline SpdMatrix matrix_exp_sym(const SymMatrix& s) {
  return SpdMatrix(spectral_apply(sym_eig(s), [](double v) { return std::exp(v); }));
}

/// X^t for real t via the spectral decomposition.
inline SpdMatrix spd_pow(const SpdMatrix& x, double t) {
  return SpdMatrix(spectral_apply(sym_eig(x.sym()), [t](double v) { return std::pow(v, t); }));
}

inline SpdMatrix operator*(double alpha, const SpdMatrix& x) {
  if (!(alpha > 0.0)) throw InvalidArgument("positive scaling of an SPD matrix requires alpha > 0");
  return SpdMatrix(Matrix(alpha * x.matrix()));
}

/// B^T X B; positive definite when B has full column rank.
inline SpdMatrix congruence(const SpdMatrix& x, const Matrix& b) {
  return SpdMatrix(Matrix(b.transpose() * x.matrix() * b));
}

}  // namespace blfix
