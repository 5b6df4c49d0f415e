#pragma once

// Random matrices and data for the test suites.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>

#include "blfix/blfix.hpp"

namespace blfix_test {

using namespace blfix;
using Rng = std::mt19937_64;

inline double uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline int uniform_int(Rng& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

inline Matrix gaussian(Rng& rng, Index rows, Index cols) {
  std::normal_distribution<double> n01;
  Matrix a(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    for (Index j = 0; j < cols; ++j) a(i, j) = n01(rng);
  }
  return a;
}

inline Matrix random_orthogonal(Rng& rng, Index n) {
  Eigen::HouseholderQR<Matrix> qr(gaussian(rng, n, n));
  return qr.householderQ() * Matrix::Identity(n, n);
}

/// Q diag(lambda) Q^T with log-uniform eigenvalues in [lo, hi].
inline SpdMatrix random_spd_in(Rng& rng, Index n, double lo, double hi) {
  const Matrix q = random_orthogonal(rng, n);
  Vector ev(n);
  for (Index i = 0; i < n; ++i) ev(i) = std::exp(uniform(rng, std::log(lo), std::log(hi)));
  return SpdMatrix(Matrix(q * ev.asDiagonal() * q.transpose()));
}

inline SpdMatrix random_spd(Rng& rng, Index n) { return random_spd_in(rng, n, std::exp(-2.0), std::exp(2.0)); }

/// Random symmetric direction with unit Frobenius norm.
inline SymMatrix random_sym(Rng& rng, Index n) {
  const Matrix a = gaussian(rng, n, n);
  const Matrix s = 0.5 * (a + a.transpose());
  return SymMatrix(Matrix(s / s.norm()));
}

/// Random PSD matrix of random rank (possibly zero).
inline Matrix random_psd(Rng& rng, Index n) {
  const Index rank = uniform_int(rng, 0, static_cast<int>(n));
  const Matrix b = gaussian(rng, n, rank);
  return b * b.transpose();
}

/// Gaussian matrix with condition number at most max_cond.
inline Matrix random_invertible(Rng& rng, Index n, double max_cond = 100.0) {
  for (;;) {
    Matrix b = gaussian(rng, n, n);
    Eigen::JacobiSVD<Matrix> svd(b);
    const Vector s = svd.singularValues();
    if (s(n - 1) > 0.0 && s(0) / s(n - 1) <= max_cond) return b;
  }
}

inline Matrix random_full_row_rank(Rng& rng, Index rows, Index cols) {
  for (;;) {
    Matrix a = gaussian(rng, rows, cols);
    if (numerical_rank(a) == rows) return a;
  }
}

/// True when every pair of stacked maps [L_i; L_j] has its min(2 d', d)-th
/// singular value above 1e-2 times its largest. Nearly aligned maps give
/// nearly critical data on which the iterations slow down without bound.
inline bool pairwise_separated(const BLDatum& datum) {
  const Index k = std::min<Index>(2 * datum.dprime, datum.d);
  for (int i = 0; i < datum.m(); ++i) {
    for (int j = i + 1; j < datum.m(); ++j) {
      Matrix stacked(2 * datum.dprime, datum.d);
      stacked << datum.maps[static_cast<std::size_t>(i)], datum.maps[static_cast<std::size_t>(j)];
      const Vector sv = Eigen::JacobiSVD<Matrix>(stacked).singularValues();
      if (sv(k - 1) < 1e-2 * sv(0)) return false;
    }
  }
  return true;
}

/// A random datum with d <= max_d and m <= max_m whose uniform weights stay
/// below 1 and which passes validation, including the sampled subspace
/// condition (Gaussian maps with too few rows can share kernel directions,
/// which makes the datum infeasible), and whose maps are pairwise separated.
/// proper=true asks for dprime < d; with dprime = d the objective is constant.
inline BLDatum random_feasible(Rng& rng, int max_d = 8, int max_m = 10, bool proper = false) {
  for (;;) {
    const int d = uniform_int(rng, 2, max_d);
    const int dprime = uniform_int(rng, 1, proper ? d - 1 : d);
    const int m_min = d / dprime + 1;
    const int m = uniform_int(rng, m_min, std::max(m_min, max_m));
    BLDatum datum = gen_random(d, dprime, m, rng());
    if (pairwise_separated(datum) && validate(datum).subspace_heuristic_ok) return datum;
  }
}

/// Maps with small integer entries, so every subdeterminant is an exact integer.
inline BLDatum random_integer_datum(Rng& rng, int d, int dprime, int m) {
  BLDatum datum;
  datum.d = d;
  datum.dprime = dprime;
  for (int j = 0; j < m; ++j) {
    Matrix l(dprime, d);
    do {
      for (Index r = 0; r < dprime; ++r) {
        for (Index c = 0; c < d; ++c) l(r, c) = uniform_int(rng, -3, 3);
      }
    } while (numerical_rank(l) < dprime);
    datum.maps.push_back(l);
    datum.weights.push_back(static_cast<double>(d) / (static_cast<double>(m) * dprime));
  }
  return datum;
}

/// Ratio of extreme singular values.
inline double condition(const Matrix& a) {
  const Vector sv = Eigen::JacobiSVD<Matrix>(a).singularValues();
  return sv(0) / sv(sv.size() - 1);
}

/// Rounding budget for quantities computed through the pushforwards
/// L_j X L_j^T: a small multiple of machine epsilon times their worst
/// condition number.
inline double pushforward_rounding(const BLDatum& datum, const SpdMatrix& x) {
  double worst = 1.0;
  for (const Matrix& l : datum.maps) {
    worst = std::max(worst, condition(Matrix(l * x.matrix() * l.transpose())));
  }
  return 64.0 * std::numeric_limits<double>::epsilon() * worst;
}

inline double rel_diff(const Matrix& a, const Matrix& b) {
  return (a - b).norm() / std::max(b.norm(), 1e-300);
}

}  // namespace blfix_test
