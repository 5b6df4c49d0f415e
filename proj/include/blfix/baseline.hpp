#pragma once

// Riemannian gradient descent on P_d with the affine-invariant metric
// <A, B>_X = tr(X^{-1} A X^{-1} B) and the exact exponential map. Used as the
// reference competitor for the fixed-point solvers.

#include <chrono>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "blfix/solve.hpp"

namespace blfix {

struct RgdConfig {
  double step_size = 0.1;
  bool backtracking = true;
  double backtrack_factor = 0.5;
  double sufficient_decrease = 1e-4;
  /// Stop when the Riemannian gradient norm falls to this value.
  double tol_grad = 1e-8;
  int max_iter = 10000;
  std::optional<SpdMatrix> x0;
};

/// sym(X grad F(X) X), the gradient of F under the affine-invariant metric.
inline SymMatrix riem_grad(const BLDatum& datum, const SpdMatrix& x) {
  const ObjectiveEval e = eval_F(datum, x);
  return SymMatrix(Matrix(x.matrix() * e.gradient.matrix() * x.matrix()));
}

/// sqrt(tr(X^{-1} xi X^{-1} xi)).
inline double riem_norm(const SpdMatrix& x, const SymMatrix& xi) {
  const Matrix a = spd_solve(x, xi.matrix());
  return std::sqrt(std::max(0.0, (a * a).trace()));
}

namespace detail {

// Exp_X(-eta xi) = X^{1/2} exp(-eta X^{-1/2} xi X^{-1/2}) X^{1/2}.
inline SpdMatrix exp_map(const SpdMatrix& x, const SymMatrix& xi, double eta) {
  if (eta == 0.0) return x;
  const SymEig eig = sym_eig(x.sym());
  const Matrix half = spectral_apply(eig, [](double v) { return std::sqrt(v); });
  const Matrix inv_half = spectral_apply(eig, [](double v) { return 1.0 / std::sqrt(v); });
  const SymMatrix tangent(Matrix(-eta * inv_half * xi.matrix() * inv_half));
  return SpdMatrix(Matrix(half * matrix_exp_sym(tangent).matrix() * half));
}

// log det(base + delta) - log det(base), accurate when delta is small relative to base.
inline double log_det_ratio(const SpdMatrix& base, const Matrix& delta) {
  const auto lower = base.cholesky().matrixL();
  Matrix e = lower.solve(delta);
  e = lower.solve(e.transpose()).transpose();
  const Vector ev = sym_eigenvalues(0.5 * (e + e.transpose()));
  double s = 0.0;
  for (Index i = 0; i < ev.size(); ++i) s += std::log1p(ev(i));
  return s;
}

// F(x_new) - F(x_old) from differences, so decreases far below the magnitude of
// F (near the optimum) are still resolved. pushforwards_old are T_j(x_old).
inline double objective_change(const BLDatum& datum, const SpdMatrix& x_old,
                               const std::vector<SpdMatrix>& pushforwards_old,
                               const SpdMatrix& x_new) {
  const Matrix delta = x_new.matrix() - x_old.matrix();
  double change = -log_det_ratio(x_old, delta);
  for (int j = 0; j < datum.m(); ++j) {
    const Matrix& l = datum.maps[j];
    change += datum.weights[j] *
              log_det_ratio(pushforwards_old[static_cast<std::size_t>(j)],
                            Matrix(l * delta * l.transpose()));
  }
  return change;
}

}  // namespace detail

inline SpdMatrix rgd_step(const BLDatum& datum, const SpdMatrix& x, double eta) {
  if (!(eta >= 0.0)) throw InvalidArgument("rgd_step requires eta >= 0");
  return detail::exp_map(x, riem_grad(datum, x), eta);
}

/// Gradient descent from X_0 = I with Armijo backtracking on F:
/// accept eta once F(Exp_X(-eta g)) <= F(X) - c eta |g|_X^2.
///
/// The decrease is evaluated as a difference of log-determinant ratios and F is
/// tracked incrementally from F(X_0); near the optimum the decrease is far
/// below the rounding error of F itself.
inline SolveOutput solve_rgd(const BLDatum& datum, const RgdConfig& config) {
  if (!(config.step_size > 0.0)) throw InvalidArgument("RgdConfig.step_size must be positive");
  if (config.max_iter < 0) throw InvalidArgument("RgdConfig.max_iter must be >= 0");
  require_valid(datum);

  const auto start = std::chrono::steady_clock::now();
  auto elapsed_ns = [&] {
    return static_cast<std::int64_t>(std::chrono::duration_cast<std::chrono::nanoseconds>(
                                         std::chrono::steady_clock::now() - start)
                                         .count());
  };
  constexpr double kMinStep = 1e-16;

  SpdMatrix x = config.x0 ? *config.x0 : SpdMatrix::identity(datum.d);
  if (x.dim() != datum.d) throw DimensionMismatch("x0 dimension does not match the datum");

  SolveOutput out{SolveResult{x}, {}};
  IterTrace& trace = out.trace;

  ObjectiveEval eval = eval_F(datum, x);
  double f = eval.value;
  auto push_row = [&](int iter, double step) {
    const Vector ev = sym_eigenvalues(x.matrix());
    trace.rows.push_back({iter, f, f, op_norm(eval.gradient), step, ev(0), ev(ev.size() - 1),
                          elapsed_ns()});
  };
  push_row(0, 0.0);

  Status status = Status::MaxIter;
  double gnorm = 0.0;
  double last_step = 0.0;
  int k = 0;
  for (;;) {
    const SymMatrix xi(Matrix(x.matrix() * eval.gradient.matrix() * x.matrix()));
    gnorm = riem_norm(x, xi);
    if (gnorm <= config.tol_grad) {
      status = Status::Converged;
      break;
    }
    if (k >= config.max_iter) break;
    ++k;

    double eta = config.step_size;
    try {
      for (;;) {
        SpdMatrix cand = detail::exp_map(x, xi, eta);
        const double change = detail::objective_change(datum, x, eval.pushforwards, cand);
        if (!config.backtracking || change <= -config.sufficient_decrease * eta * gnorm * gnorm) {
          last_step = thompson(cand, x);
          x = std::move(cand);
          eval = eval_F(datum, x);
          f += change;
          break;
        }
        eta *= config.backtrack_factor;
        if (eta < kMinStep) {
          throw StepFailure("backtracking step fell below 1e-16 at iteration " +
                            std::to_string(k));
        }
      }
    } catch (const StepFailure&) {
      throw;
    } catch (const Error& e) {
      throw IterationFailure(k, e.what());
    }
    push_row(k, last_step);
  }

  SolveResult& res = out.result;
  res.X_star = x;
  res.F_value = f;
  res.bl_constant = std::exp(-0.5 * f);
  res.iterations = k;
  res.status = status;
  res.converged = status == Status::Converged;
  res.residual = gnorm;
  res.grad_norm = op_norm(eval.gradient);
  return out;
}

}  // namespace blfix
