#pragma once

// Thompson and Hilbert metrics on the positive definite cone, the order
// interval {delta I <= X <= Delta I}, and Snyder's norm bound.

#include <algorithm>
#include <cmath>
#include <string>

#include "blfix/matcore.hpp"

namespace blfix {

namespace detail {

inline void require_same_dim(const SpdMatrix& x, const SpdMatrix& y, const char* what) {
  if (x.dim() != y.dim()) {
    throw DimensionMismatch(std::string(what) + ": dimensions " + std::to_string(x.dim()) +
                            " and " + std::to_string(y.dim()));
  }
}

constexpr double kMetricFloor = 1e-14;

}  // namespace detail

/// log max{M(X/Y), M(Y/X)}; values below 1e-14 are reported as exactly 0.
inline double thompson(const SpdMatrix& x, const SpdMatrix& y) {
  detail::require_same_dim(x, y, "thompson");
  const double v = std::log(std::max(max_gen_eig(x, y), max_gen_eig(y, x)));
  return v < detail::kMetricFloor ? 0.0 : v;
}

/// log(M(X/Y) M(Y/X)); invariant under positive scaling of either argument.
inline double hilbert(const SpdMatrix& x, const SpdMatrix& y) {
  detail::require_same_dim(x, y, "hilbert");
  const double v = std::log(max_gen_eig(x, y)) + std::log(max_gen_eig(y, x));
  return v < detail::kMetricFloor ? 0.0 : v;
}

/// The order interval D = {delta I <= X <= Delta I} in dimension dim.
class ConeBox {
 public:
  ConeBox(double delta, double Delta, Index dim) : delta_(delta), Delta_(Delta), dim_(dim) {
    if (!(delta > 0.0) || !(Delta >= delta) || !std::isfinite(Delta)) {
      throw InvalidArgument("ConeBox requires 0 < delta <= Delta < inf");
    }
    if (dim < 1) throw InvalidArgument("ConeBox requires dim >= 1");
  }

  double delta() const noexcept { return delta_; }
  double Delta() const noexcept { return Delta_; }
  Index dim() const noexcept { return dim_; }

  /// Thompson diameter, log(Delta / delta).
  double diameter() const { return std::log(Delta_ / delta_); }

 private:
  double delta_;
  double Delta_;
  Index dim_;
};

inline bool in_box(const SpdMatrix& x, const ConeBox& box) {
  if (x.dim() != box.dim()) {
    throw DimensionMismatch("in_box: matrix dimension " + std::to_string(x.dim()) +
                            ", box dimension " + std::to_string(box.dim()));
  }
  constexpr double slack = 1e-10;
  const Vector ev = sym_eigenvalues(x.matrix());
  return ev(0) >= box.delta() - slack && ev(ev.size() - 1) <= box.Delta() + slack;
}

enum class Schatten { One, Two, Inf };

inline double schatten_norm(const SymMatrix& s, Schatten p) {
  const Vector ev = sym_eigenvalues(s.matrix()).cwiseAbs();
  switch (p) {
    case Schatten::One:
      return ev.sum();
    case Schatten::Two:
      return ev.norm();
    case Schatten::Inf:
      return ev.maxCoeff();
  }
  return 0.0;
}

inline double schatten_exponent_inverse(Schatten p) {
  switch (p) {
    case Schatten::One:
      return 1.0;
    case Schatten::Two:
      return 0.5;
    case Schatten::Inf:
      return 0.0;
  }
  return 0.0;
}

/// Right-hand side of Snyder's inequality
///   ||X - Y||_p <= 2^{1/p} (e^t - 1)/e^t max{||X||_p, ||Y||_p},  t = thompson(X, Y).
inline double snyder_bound(const SpdMatrix& x, const SpdMatrix& y, Schatten p) {
  detail::require_same_dim(x, y, "snyder_bound");
  const double t = thompson(x, y);
  const double factor = -std::expm1(-t);  // (e^t - 1)/e^t
  const double norm = std::max(schatten_norm(x.sym(), p), schatten_norm(y.sym(), p));
  return std::exp2(schatten_exponent_inverse(p)) * factor * norm;
}

}  // namespace blfix
