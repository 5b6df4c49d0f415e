#pragma once

// Picard iterations for the BL fixed-point equation X = G(X):
//
//   G(X)       = (sum_j w_j L_j^T (L_j X L_j^T)^{-1} L_j)^{-1}
//   G_mu(X)    = (mu I + sum_j w_j L_j^T (L_j X L_j^T)^{-1} L_j)^{-1}
//   Gtilde(X)  = G(X) / tr G(X)
//
// Under the scaling condition tr(G(X)^{-1} X) = d for every X, so G_mu shrinks
// its iterates radially: at a point whose ray is fixed by G_mu the step is
// exactly X -> X / rho with rho = 1 + mu tr(X)/d. G_mu therefore has no fixed
// point in the open cone, and its raw Thompson step never drops below
// log(1 + mu tr(X)/d). The regularized solver measures progress with that
// shrinkage removed, thompson(rho X_{k+1}, X_k), which is zero exactly when
// the ray has settled and equals the plain Thompson step when mu = 0. F is
// invariant under scaling, so the radial drift does not affect the constant.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "blfix/cone.hpp"
#include "blfix/datum.hpp"
#include "blfix/format.hpp"
#include "blfix/objective.hpp"

namespace blfix {

enum class SolverKind { PlainG, Regularized, Normalized };
enum class Status { Converged, MaxIter, InfeasibilitySuspected };

inline const char* to_string(SolverKind s) {
  switch (s) {
    case SolverKind::PlainG:
      return "plain_g";
    case SolverKind::Regularized:
      return "regularized";
    case SolverKind::Normalized:
      return "normalized";
  }
  return "?";
}

inline const char* to_string(Status s) {
  switch (s) {
    case Status::Converged:
      return "Converged";
    case Status::MaxIter:
      return "MaxIter";
    case Status::InfeasibilitySuspected:
      return "InfeasibilitySuspected";
  }
  return "?";
}

struct SolveConfig {
  SolverKind solver = SolverKind::Regularized;
  /// Threshold on the Thompson step length.
  double tol = 1e-10;
  int max_iter = 10000;
  /// Target accuracy used to pick mu.
  double epsilon = 1e-6;
  std::optional<double> mu_override;
  /// Starting point; the identity when empty.
  std::optional<SpdMatrix> x0;
  double blowup_cond = 1e12;
  /// Called with (k, X_k) for every iterate, starting at X_0.
  std::function<void(int, const SpdMatrix&)> observer;
};

struct SolveResult {
  SpdMatrix X_star;
  double bl_constant = 0.0;
  double F_value = 0.0;
  int iterations = 0;
  bool converged = false;
  /// Final step length (Thompson step for the fixed-point solvers).
  double residual = 0.0;
  /// Operator norm of the unregularized gradient at X_star.
  double grad_norm = 0.0;
  Status status = Status::MaxIter;
  /// Regularization in effect at the end of the run (0 unless regularized).
  double mu = 0.0;
};

struct TraceRow {
  int iter = 0;
  double F = 0.0;
  double F_mu = 0.0;
  double grad_norm = 0.0;
  /// Step that produced this iterate; 0 on the initial row.
  double thompson_step = 0.0;
  double min_eig = 0.0;
  double max_eig = 0.0;
  std::int64_t time_ns = 0;
};

struct MuChange {
  int iter = 0;
  double mu = 0.0;
  double R_est = 0.0;
};

struct IterTrace {
  std::vector<TraceRow> rows;
  std::vector<MuChange> mu_changes;

  static constexpr const char* kCsvHeader =
      "iter,F,F_mu,grad_norm,thompson_step,min_eig,max_eig,time_ns";

  void write_csv(std::ostream& os) const {
    os << kCsvHeader << '\n';
    for (const TraceRow& r : rows) {
      os << r.iter << ',' << format_double(r.F) << ',' << format_double(r.F_mu) << ','
         << format_double(r.grad_norm) << ',' << format_double(r.thompson_step) << ','
         << format_double(r.min_eig) << ',' << format_double(r.max_eig) << ',' << r.time_ns
         << '\n';
    }
  }
};

struct SolveOutput {
  SolveResult result;
  IterTrace trace;
};

namespace detail {

inline SpdMatrix invert_shifted(const SymMatrix& sum, double mu) {
  Matrix shifted = sum.matrix();
  if (mu != 0.0) shifted.diagonal().array() += mu;
  return spd_inverse(SpdMatrix(shifted));
}

inline SpdMatrix unit_trace(const SpdMatrix& x) { return (1.0 / x.matrix().trace()) * x; }

}  // namespace detail

/// One application of G.
inline SpdMatrix step_G(const BLDatum& datum, const SpdMatrix& x) {
  return detail::invert_shifted(pullback(datum, x).sum, 0.0);
}

/// One application of G_mu; eigenvalues of the result lie below 1/mu.
inline SpdMatrix step_G_mu(const BLDatum& datum, const SpdMatrix& x, double mu) {
  if (!(mu > 0.0)) throw InvalidArgument("step_G_mu requires mu > 0");
  return detail::invert_shifted(pullback(datum, x).sum, mu);
}

/// G followed by unit-trace normalization.
inline SpdMatrix step_G_tilde(const BLDatum& datum, const SpdMatrix& x) {
  return detail::unit_trace(step_G(datum, x));
}

/// mu = e' / (2 R (d - e'/2)) with e' = epsilon / 2.
inline double choose_mu(double epsilon, double R_est, int d) {
  if (!(epsilon > 0.0)) throw InvalidArgument("choose_mu requires epsilon > 0");
  if (!(R_est > 0.0)) throw InvalidArgument("choose_mu requires R_est > 0");
  if (d < 1) throw InvalidArgument("choose_mu requires d >= 1");
  const double eps_half = 0.5 * epsilon;
  if (!(d > 0.5 * eps_half)) throw InvalidArgument("choose_mu requires d > epsilon/4");
  return eps_half / (2.0 * R_est * (d - 0.5 * eps_half));
}

struct ContractionCheck {
  double lhs = 0.0;
  double bound = 0.0;
};

/// lhs = thompson(G_mu(X), G_mu(Y)) and bound = gamma/(gamma+mu) thompson(X, Y),
/// gamma the larger operator norm of the two pre-inversion sums.
inline ContractionCheck contraction_diagnostic(const BLDatum& datum, const SpdMatrix& x,
                                               const SpdMatrix& y, double mu) {
  if (!(mu >= 0.0)) throw InvalidArgument("contraction_diagnostic requires mu >= 0");
  detail::require_same_dim(x, y, "contraction_diagnostic");
  const Pullback px = pullback(datum, x);
  const Pullback py = pullback(datum, y);
  const double gamma = std::max(op_norm(px.sum), op_norm(py.sum));
  const SpdMatrix gx = detail::invert_shifted(px.sum, mu);
  const SpdMatrix gy = detail::invert_shifted(py.sum, mu);
  return {thompson(gx, gy), gamma / (gamma + mu) * thompson(x, y)};
}

/// Throws ValidationFailed unless the datum passes the hard checks.
inline void require_valid(const BLDatum& datum) {
  const ValidationReport report = validate(datum, /*sample_subspaces=*/false);
  if (report.accepted()) return;
  std::string why;
  if (!report.all_ranks_ok()) {
    for (std::size_t j = 0; j < report.rank_ok.size(); ++j) {
      if (!report.rank_ok[j]) why += "map " + std::to_string(j) + " is rank deficient; ";
    }
  }
  if (!report.weight_range_ok) why += "weights must lie in (0, 1]; ";
  if (!report.scaling_ok) {
    why += "scaling condition fails (sum_j w_j d' - d = " +
           format_double(report.scaling_residual) + "); ";
  }
  why.resize(why.size() - 2);
  throw ValidationFailed(why);
}

namespace detail {

struct IterateStats {
  Pullback pull;
  double F = 0.0;
  double grad_norm = 0.0;
  double min_eig = 0.0;
  double max_eig = 0.0;
};

inline IterateStats iterate_stats(const BLDatum& datum, const SpdMatrix& x) {
  IterateStats s{pullback(datum, x)};
  s.F = s.pull.weighted_log_det - log_det(x);
  const Matrix x_inv = spd_solve(x, Matrix::Identity(x.dim(), x.dim()));
  s.grad_norm = op_norm(SymMatrix(Matrix(s.pull.sum.matrix() - x_inv)));
  const Vector ev = sym_eigenvalues(x.matrix());
  s.min_eig = ev(0);
  s.max_eig = ev(ev.size() - 1);
  return s;
}

// True when the step lengths over the last `window` iterations grew.
inline bool steps_growing(const std::vector<TraceRow>& rows) {
  constexpr std::size_t window = 10;
  if (rows.size() < window + 2) return false;
  const double recent = rows.back().thompson_step;
  const double earlier = rows[rows.size() - 1 - window].thompson_step;
  return recent > earlier;
}

}  // namespace detail

/// Iterates the selected map from X_0 until the Thompson step falls below
/// config.tol, the iteration budget runs out, or the condition number of an
/// iterate exceeds config.blowup_cond.
inline SolveOutput solve_fixed_point(const BLDatum& datum, const SolveConfig& config) {
  if (!(config.tol > 0.0)) throw InvalidArgument("SolveConfig.tol must be positive");
  if (config.max_iter < 1) throw InvalidArgument("SolveConfig.max_iter must be >= 1");
  if (!(config.epsilon > 0.0)) throw InvalidArgument("SolveConfig.epsilon must be positive");
  if (config.mu_override && !(*config.mu_override > 0.0)) {
    throw InvalidArgument("SolveConfig.mu_override must be positive");
  }
  require_valid(datum);

  const auto start = std::chrono::steady_clock::now();
  auto elapsed_ns = [&] {
    return static_cast<std::int64_t>(std::chrono::duration_cast<std::chrono::nanoseconds>(
                                         std::chrono::steady_clock::now() - start)
                                         .count());
  };

  SpdMatrix x = config.x0 ? *config.x0 : SpdMatrix::identity(datum.d);
  if (x.dim() != datum.d) {
    throw DimensionMismatch("x0 has dimension " + std::to_string(x.dim()) + ", datum has d=" +
                            std::to_string(datum.d));
  }

  const bool regularized = config.solver == SolverKind::Regularized;
  double mu = 0.0;
  double r_est = 0.0;
  double r_used = 0.0;

  SolveOutput out{SolveResult{x}, {}};
  IterTrace& trace = out.trace;

  detail::IterateStats stats = [&] {
    try {
      return detail::iterate_stats(datum, x);
    } catch (const Error& e) {
      throw IterationFailure(0, e.what());
    }
  }();

  if (regularized) {
    r_est = std::max(1.0, stats.max_eig);
    r_used = r_est;
    mu = config.mu_override ? *config.mu_override : choose_mu(config.epsilon, r_est, datum.d);
    trace.mu_changes.push_back({0, mu, r_est});
  }

  auto push_row = [&](int iter, double step) {
    trace.rows.push_back({iter, stats.F, stats.F + mu * x.matrix().trace(), stats.grad_norm, step,
                          stats.min_eig, stats.max_eig, elapsed_ns()});
  };
  push_row(0, 0.0);
  if (config.observer) config.observer(0, x);

  Status status = Status::MaxIter;
  double step = 0.0;
  int k = 0;
  while (k < config.max_iter) {
    ++k;
    try {
      SpdMatrix next = [&] {
        switch (config.solver) {
          case SolverKind::PlainG:
            return detail::invert_shifted(stats.pull.sum, 0.0);
          case SolverKind::Regularized:
            return detail::invert_shifted(stats.pull.sum, mu);
          case SolverKind::Normalized:
            return detail::unit_trace(detail::invert_shifted(stats.pull.sum, 0.0));
        }
        throw InvalidArgument("unknown solver");
      }();
      if (regularized) {
        const double rho = 1.0 + mu * x.matrix().trace() / datum.d;
        step = thompson(rho * next, x);
      } else {
        step = thompson(next, x);
      }
      x = std::move(next);
      stats = detail::iterate_stats(datum, x);
    } catch (const Error& e) {
      throw IterationFailure(k, e.what());
    }
    push_row(k, step);
    if (config.observer) config.observer(k, x);

    if (stats.max_eig > config.blowup_cond * stats.min_eig) {
      status = Status::InfeasibilitySuspected;
      break;
    }
    if (step <= config.tol) {
      status = Status::Converged;
      break;
    }
    if (regularized && !config.mu_override) {
      r_est = std::max(r_est, stats.max_eig);
      if (r_est > 2.0 * r_used) {
        r_used = r_est;
        mu = choose_mu(config.epsilon, r_est, datum.d);
        trace.mu_changes.push_back({k, mu, r_est});
      }
    }
  }
  if (status == Status::MaxIter && detail::steps_growing(trace.rows)) {
    status = Status::InfeasibilitySuspected;
  }

  SolveResult& res = out.result;
  res.X_star = x;
  res.F_value = stats.F;
  res.bl_constant = std::exp(-0.5 * stats.F);
  res.iterations = k;
  res.status = status;
  res.converged = status == Status::Converged;
  res.residual = step;
  res.grad_norm = stats.grad_norm;
  res.mu = mu;
  return out;
}

}  // namespace blfix
