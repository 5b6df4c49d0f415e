#pragma once

// The objective
//   F(X) = sum_j w_j log det(L_j X L_j^T) - log det X,
// its regularization F_mu(X) = F(X) + mu tr X, and the Gaussian-input form of
// the BL functional.
//
// At a fixed point Y of G the maximizing Gaussian inputs are
// Z_j = (L_j Y L_j^T)^{-1}; with X_thm = Y^{-1} they satisfy Z_j^{-1} = L_j X_thm^{-1} L_j^T.
// Substituting into the BL functional and using sum_j w_j L_j^T Z_j L_j = Y^{-1}
// gives  log BL = (-sum_j w_j log det T_j(Y) + log det Y) / 2 = -F(Y)/2.

#include <cmath>
#include <string>
#include <vector>

#include "blfix/datum.hpp"
#include "blfix/matcore.hpp"

namespace blfix {

struct GaussianInput {
  std::vector<SpdMatrix> blocks;
};

struct ObjectiveEval {
  double value = 0.0;
  SymMatrix gradient;
  std::vector<SpdMatrix> pushforwards;
};

/// sum_j w_j L_j^T T_j(X)^{-1} L_j together with the pieces it was built from.
/// Its inverse is G(X).
struct Pullback {
  SymMatrix sum;
  double weighted_log_det = 0.0;  // sum_j w_j log det T_j(X)
  std::vector<SpdMatrix> pushforwards;
};

namespace detail {

inline void require_dim(const BLDatum& datum, const SpdMatrix& x) {
  if (x.dim() != datum.d) {
    throw DimensionMismatch("matrix has dimension " + std::to_string(x.dim()) +
                            ", datum has d=" + std::to_string(datum.d));
  }
}

}  // namespace detail

inline Pullback pullback(const BLDatum& datum, const SpdMatrix& x) {
  detail::require_dim(datum, x);
  Pullback out;
  Matrix sum = Matrix::Zero(datum.d, datum.d);
  out.pushforwards.reserve(datum.maps.size());
  for (int j = 0; j < datum.m(); ++j) {
    const Matrix& l = datum.maps[j];
    SpdMatrix t = [&] {
      try {
        return SpdMatrix(Matrix(l * x.matrix() * l.transpose()));
      } catch (const CholeskyFailure& e) {
        throw CholeskyFailure("pushforward " + std::to_string(j) + ": " + e.what());
      }
    }();
    const double w = datum.weights[j];
    out.weighted_log_det += w * log_det(t);
    sum.noalias() += w * (l.transpose() * spd_solve(t, l));
    out.pushforwards.push_back(std::move(t));
  }
  out.sum = SymMatrix(sum);
  return out;
}

inline ObjectiveEval eval_F(const BLDatum& datum, const SpdMatrix& x) {
  Pullback p = pullback(datum, x);
  const Matrix x_inv = spd_solve(x, Matrix::Identity(x.dim(), x.dim()));
  return {p.weighted_log_det - log_det(x), SymMatrix(Matrix(p.sum.matrix() - x_inv)),
          std::move(p.pushforwards)};
}

inline ObjectiveEval eval_F_mu(const BLDatum& datum, const SpdMatrix& x, double mu) {
  if (!(mu >= 0.0)) throw InvalidArgument("eval_F_mu requires mu >= 0");
  ObjectiveEval e = eval_F(datum, x);
  if (mu == 0.0) return e;
  e.value += mu * x.matrix().trace();
  e.gradient = SymMatrix(Matrix(e.gradient.matrix() + mu * Matrix::Identity(x.dim(), x.dim())));
  return e;
}

/// BL(A, w; Z) = (prod_j det(Z_j)^{w_j} / det(sum_j w_j L_j^T Z_j L_j))^{1/2}, in log space.
inline double bl_value_Z(const BLDatum& datum, const GaussianInput& z) {
  check_shape(datum);
  if (z.blocks.size() != datum.maps.size()) {
    throw ShapeMismatch("Gaussian input has " + std::to_string(z.blocks.size()) +
                        " blocks, datum has m=" + std::to_string(datum.m()));
  }
  double log_num = 0.0;
  Matrix mix = Matrix::Zero(datum.d, datum.d);
  for (int j = 0; j < datum.m(); ++j) {
    const SpdMatrix& zj = z.blocks[static_cast<std::size_t>(j)];
    if (zj.dim() != datum.dprime) {
      throw DimensionMismatch("Gaussian block " + std::to_string(j) + " has dimension " +
                              std::to_string(zj.dim()));
    }
    const Matrix& l = datum.maps[j];
    log_num += datum.weights[j] * log_det(zj);
    mix.noalias() += datum.weights[j] * (l.transpose() * zj.matrix() * l);
  }
  return std::exp(0.5 * (log_num - log_det(SpdMatrix(mix))));
}

/// Z_j = (L_j X L_j^T)^{-1}.
inline GaussianInput recover_Z(const BLDatum& datum, const SpdMatrix& x) {
  detail::require_dim(datum, x);
  GaussianInput z;
  z.blocks.reserve(datum.maps.size());
  for (const Matrix& l : datum.maps) {
    z.blocks.push_back(spd_inverse(SpdMatrix(Matrix(l * x.matrix() * l.transpose()))));
  }
  return z;
}

/// exp(-F(X)/2); the BL constant when X minimizes F.
inline double bl_constant_from_X(const BLDatum& datum, const SpdMatrix& x) {
  return std::exp(-0.5 * eval_F(datum, x).value);
}

}  // namespace blfix
