#pragma once

// Brascamp-Lieb data: representation, feasibility checks, generators and the
// brute-force subdeterminant constant.
//
// Storage convention: each map is kept as its d'xd matrix L_j (so A_j x = L_j x)
// and the pushforward of X in P_d is T_j(X) = L_j X L_j^T in P_{d'}.

#include <Eigen/SVD>

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "blfix/matcore.hpp"

namespace blfix {

struct BLDatum {
  int d = 0;
  int dprime = 0;
  std::vector<Matrix> maps;
  std::vector<double> weights;

  int m() const noexcept { return static_cast<int>(maps.size()); }

  friend bool operator==(const BLDatum& a, const BLDatum& b) {
    if (a.d != b.d || a.dprime != b.dprime || a.weights != b.weights ||
        a.maps.size() != b.maps.size()) {
      return false;
    }
    for (std::size_t j = 0; j < a.maps.size(); ++j) {
      if (a.maps[j].rows() != b.maps[j].rows() || a.maps[j].cols() != b.maps[j].cols() ||
          a.maps[j] != b.maps[j]) {
        return false;
      }
    }
    return true;
  }
};

struct ValidationReport {
  std::vector<bool> rank_ok;
  bool scaling_ok = false;
  /// sum_j w_j d' - d
  double scaling_residual = 0.0;
  bool weight_range_ok = false;
  /// Sampled evidence only: true means no subspace violation was found.
  bool subspace_heuristic_ok = true;
  std::vector<std::string> sampled_violations;

  bool all_ranks_ok() const {
    for (bool ok : rank_ok) {
      if (!ok) return false;
    }
    return true;
  }

  /// Hard checks required before solving.
  bool accepted() const { return all_ranks_ok() && scaling_ok && weight_range_ok; }
};

inline constexpr double kScalingTolerance = 1e-10;
inline constexpr double kRankTolerance = 1e-10;

/// Throws ShapeMismatch unless every map is d'xd and there is one weight per map.
inline void check_shape(const BLDatum& datum) {
  if (datum.d < 1 || datum.dprime < 1) {
    throw ShapeMismatch("datum dimensions must be positive (d=" + std::to_string(datum.d) +
                        ", dprime=" + std::to_string(datum.dprime) + ")");
  }
  if (datum.maps.empty()) throw ShapeMismatch("datum has no maps");
  if (datum.weights.size() != datum.maps.size()) {
    throw ShapeMismatch("datum has " + std::to_string(datum.maps.size()) + " maps but " +
                        std::to_string(datum.weights.size()) + " weights");
  }
  for (std::size_t j = 0; j < datum.maps.size(); ++j) {
    const Matrix& l = datum.maps[j];
    if (l.rows() != datum.dprime || l.cols() != datum.d) {
      throw ShapeMismatch("map " + std::to_string(j) + " is " + std::to_string(l.rows()) + "x" +
                          std::to_string(l.cols()) + ", expected " +
                          std::to_string(datum.dprime) + "x" + std::to_string(datum.d));
    }
  }
}

/// Number of singular values above 1e-10 * scale.
inline Index numerical_rank(const Matrix& a, double scale) {
  if (a.size() == 0 || !(scale > 0.0)) return 0;
  const Vector sv = Eigen::JacobiSVD<Matrix>(a).singularValues();
  Index r = 0;
  for (Index i = 0; i < sv.size(); ++i) {
    if (sv(i) > kRankTolerance * scale) ++r;
  }
  return r;
}

/// Numerical rank relative to the largest singular value of a.
inline Index numerical_rank(const Matrix& a) {
  if (a.size() == 0) return 0;
  const Vector sv = Eigen::JacobiSVD<Matrix>(a).singularValues();
  return numerical_rank(a, sv.size() > 0 ? sv(0) : 0.0);
}

namespace detail {

inline constexpr int kExhaustiveCoordinateDim = 16;
inline constexpr int kRandomSubspacesPerDim = 100;
inline constexpr int kExhaustiveKernelMaps = 12;
inline constexpr std::uint64_t kSubspaceSeed = 0x5eed5eedULL;

// Checks dim(H) <= sum_j w_j dim(L_j H) for the subspace spanned by the
// orthonormal columns of basis.
inline void check_subspace(const BLDatum& datum, const Matrix& basis, const std::string& label,
                           ValidationReport& report) {
  const auto k = static_cast<double>(basis.cols());
  double rhs = 0.0;
  for (int j = 0; j < datum.m(); ++j) {
    // Relative to |L_j|, so a product that is zero up to rounding has rank 0.
    const Matrix& l = datum.maps[j];
    const double scale = Eigen::JacobiSVD<Matrix>(l).singularValues()(0);
    rhs += datum.weights[j] * static_cast<double>(numerical_rank(l * basis, scale));
  }
  if (k > rhs + kScalingTolerance) {
    report.subspace_heuristic_ok = false;
    std::ostringstream os;
    os << label << ": dim(H)=" << basis.cols() << " > sum_j w_j dim(A_j H)=" << rhs;
    report.sampled_violations.push_back(os.str());
  }
}

inline void check_subspaces(const BLDatum& datum, ValidationReport& report) {
  const int d = datum.d;
  if (d < 2) return;

  const Matrix eye = Matrix::Identity(d, d);
  auto coordinate = [&](const std::vector<int>& idx) {
    Matrix basis(d, static_cast<Index>(idx.size()));
    std::string label = "coordinate span{";
    for (std::size_t c = 0; c < idx.size(); ++c) {
      basis.col(static_cast<Index>(c)) = eye.col(idx[c]);
      label += (c ? "," : "") + std::string("e") + std::to_string(idx[c]);
    }
    check_subspace(datum, basis, label + "}", report);
  };

  if (d <= kExhaustiveCoordinateDim) {
    const std::uint32_t full = (1U << d) - 1U;
    for (std::uint32_t mask = 1; mask < full; ++mask) {
      std::vector<int> idx;
      for (int i = 0; i < d; ++i) {
        if (mask & (1U << i)) idx.push_back(i);
      }
      coordinate(idx);
    }
  } else {
    // Too many coordinate subspaces to enumerate: lines and hyperplanes only.
    for (int i = 0; i < d; ++i) {
      coordinate({i});
      std::vector<int> rest;
      for (int r = 0; r < d; ++r) {
        if (r != i) rest.push_back(r);
      }
      coordinate(rest);
    }
  }

  // Intersections and sums of map kernels: the subspaces that generic maps
  // treat specially.
  const int m = datum.m();
  std::vector<Matrix> kernels;
  for (const Matrix& l : datum.maps) {
    Eigen::JacobiSVD<Matrix> svd(l, Eigen::ComputeFullV);
    kernels.push_back(svd.matrixV().rightCols(d - numerical_rank(l)));
  }
  auto null_basis = [&](const Matrix& a) -> Matrix {
    Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeFullV);
    return svd.matrixV().rightCols(d - numerical_rank(a));
  };
  auto range_basis = [&](const Matrix& a) -> Matrix {
    Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeThinU);
    return svd.matrixU().leftCols(numerical_rank(a));
  };
  auto kernel_family = [&](const std::vector<int>& which) {
    std::string names;
    Matrix stacked(static_cast<Index>(which.size()) * datum.dprime, d);
    Index cols = 0;
    for (int j : which) cols += kernels[j].cols();
    Matrix spanned(d, cols);
    Index at = 0;
    for (std::size_t i = 0; i < which.size(); ++i) {
      const int j = which[i];
      stacked.middleRows(static_cast<Index>(i) * datum.dprime, datum.dprime) = datum.maps[j];
      spanned.middleCols(at, kernels[j].cols()) = kernels[j];
      at += kernels[j].cols();
      names += (i ? "," : "") + std::to_string(j);
    }
    const Matrix meet = null_basis(stacked);
    if (meet.cols() > 0 && meet.cols() < d) {
      check_subspace(datum, meet, "kernel intersection {" + names + "}", report);
    }
    if (cols > 0) {
      const Matrix join = range_basis(spanned);
      if (join.cols() > 0 && join.cols() < d) {
        check_subspace(datum, join, "kernel sum {" + names + "}", report);
      }
    }
  };
  if (m <= kExhaustiveKernelMaps) {
    for (std::uint32_t mask = 1; mask < (1U << m); ++mask) {
      std::vector<int> which;
      for (int j = 0; j < m; ++j) {
        if (mask & (1U << j)) which.push_back(j);
      }
      kernel_family(which);
    }
  } else {
    for (int a = 0; a < m; ++a) {
      kernel_family({a});
      for (int b = a + 1; b < m; ++b) kernel_family({a, b});
    }
  }

  std::mt19937_64 rng(kSubspaceSeed);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int k = 1; k < d; ++k) {
    for (int s = 0; s < kRandomSubspacesPerDim; ++s) {
      Matrix frame(d, k);
      for (Index c = 0; c < frame.cols(); ++c) {
        for (Index r = 0; r < frame.rows(); ++r) frame(r, c) = normal(rng);
      }
      Eigen::HouseholderQR<Matrix> qr(frame);
      const Matrix basis = qr.householderQ() * Matrix::Identity(d, k);
      check_subspace(datum, basis,
                     "random subspace dim " + std::to_string(k) + " #" + std::to_string(s),
                     report);
    }
  }
}

}  // namespace detail

/// Checks ranks, weight range and the scaling condition exactly, and the
/// subspace dimension inequality heuristically (coordinate subspaces,
/// intersections and sums of map kernels, and 100 random subspaces per dimension).
/// Never certifies feasibility.
///
/// sample_subspaces=false skips the heuristic part (the solvers only need the
/// hard checks).
///
/// Weights are accepted in (0, 1]; w_j = 1 only arises for single-map data
/// such as the one-factor Hoelder datum.
inline ValidationReport validate(const BLDatum& datum, bool sample_subspaces = true) {
  check_shape(datum);
  ValidationReport report;

  report.rank_ok.reserve(datum.maps.size());
  for (const Matrix& l : datum.maps) report.rank_ok.push_back(numerical_rank(l) == datum.dprime);

  report.weight_range_ok = true;
  double weighted = 0.0;
  for (double w : datum.weights) {
    if (!std::isfinite(w) || !(w > 0.0) || !(w <= 1.0)) report.weight_range_ok = false;
    weighted += w * datum.dprime;
  }
  report.scaling_residual = weighted - datum.d;
  report.scaling_ok = std::abs(report.scaling_residual) <= kScalingTolerance;

  if (sample_subspaces && report.all_ranks_ok()) detail::check_subspaces(datum, report);
  return report;
}

/// Hoelder datum: m identity maps on R^d with weights 1/m.
inline BLDatum gen_holder(int d, int m) {
  if (d < 1 || m < 1) throw InvalidArgument("gen_holder requires d >= 1 and m >= 1");
  BLDatum datum;
  datum.d = d;
  datum.dprime = d;
  datum.maps.assign(static_cast<std::size_t>(m), Matrix::Identity(d, d));
  datum.weights.assign(static_cast<std::size_t>(m), 1.0 / m);
  return datum;
}

/// Sharp Young datum on R^2: x, y, x - y with weights 2/3.
inline BLDatum gen_young() {
  BLDatum datum;
  datum.d = 2;
  datum.dprime = 1;
  Matrix a1(1, 2), a2(1, 2), a3(1, 2);
  a1 << 1.0, 0.0;
  a2 << 0.0, 1.0;
  a3 << 1.0, -1.0;
  datum.maps = {a1, a2, a3};
  datum.weights.assign(3, 2.0 / 3.0);
  return datum;
}

/// Closed-form Sharp Young constant prod_j ((1-w_j)^{1-w_j} / w_j^{w_j})^{n/2}
/// for the three-map datum over R^n x R^n.
inline double young_constant(const std::vector<double>& w, int n = 1) {
  double log_c = 0.0;
  for (double wj : w) log_c += (1.0 - wj) * std::log1p(-wj) - wj * std::log(wj);
  return std::exp(0.5 * n * log_c);
}

/// Gaussian maps with uniform weights d/(m d'), deterministic in seed.
inline BLDatum gen_random(int d, int dprime, int m, std::uint64_t seed) {
  if (d < 1 || dprime < 1 || m < 1) throw InvalidShape("gen_random requires positive sizes");
  if (dprime > d) throw InvalidShape("gen_random requires dprime <= d");
  const double w = static_cast<double>(d) / (static_cast<double>(m) * dprime);
  if (!(w > 0.0 && w < 1.0)) {
    throw InvalidShape("gen_random: uniform weight d/(m*dprime) = " + std::to_string(w) +
                       " is outside (0, 1)");
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  BLDatum datum;
  datum.d = d;
  datum.dprime = dprime;
  datum.weights.assign(static_cast<std::size_t>(m), w);
  for (int j = 0; j < m; ++j) {
    Matrix l(dprime, d);
    do {
      for (Index c = 0; c < l.cols(); ++c) {
        for (Index r = 0; r < l.rows(); ++r) l(r, c) = normal(rng);
      }
    } while (numerical_rank(l) != dprime);
    datum.maps.push_back(std::move(l));
  }
  return datum;
}

/// binomial(n, k), saturating at the maximum of std::uint64_t.
inline std::uint64_t binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  k = std::min(k, n - k);
  std::uint64_t r = 1;
  for (int i = 1; i <= k; ++i) {
    const std::uint64_t num = static_cast<std::uint64_t>(n - k + i);
    if (r > std::numeric_limits<std::uint64_t>::max() / num) {
      return std::numeric_limits<std::uint64_t>::max();
    }
    r = r * num / static_cast<std::uint64_t>(i);
  }
  return r;
}

namespace detail {

// Fraction-free (Bareiss) elimination with row pivoting. Every intermediate is
// a minor of the input, so integer matrices give exact integer determinants.
inline double bareiss_det(Matrix a) {
  const Index n = a.rows();
  if (n == 0) return 1.0;
  double sign = 1.0;
  double prev = 1.0;
  for (Index k = 0; k + 1 < n; ++k) {
    Index p = k;
    for (Index r = k + 1; r < n; ++r) {
      if (std::abs(a(r, k)) > std::abs(a(p, k))) p = r;
    }
    if (a(p, k) == 0.0) return 0.0;
    if (p != k) {
      a.row(p).swap(a.row(k));
      sign = -sign;
    }
    for (Index i = k + 1; i < n; ++i) {
      for (Index j = k + 1; j < n; ++j) {
        a(i, j) = (a(i, j) * a(k, k) - a(i, k) * a(k, j)) / prev;
      }
    }
    prev = a(k, k);
  }
  return sign * a(n - 1, n - 1);
}

}  // namespace detail

/// Largest |det| over all d'xd' column submatrices of one map.
inline double max_subdeterminant(const Matrix& l) {
  const Index rows = l.rows();
  const Index cols = l.cols();
  std::vector<Index> idx(static_cast<std::size_t>(rows));
  for (Index i = 0; i < rows; ++i) idx[static_cast<std::size_t>(i)] = i;
  double best = 0.0;
  Matrix sub(rows, rows);
  while (true) {
    for (Index c = 0; c < rows; ++c) sub.col(c) = l.col(idx[static_cast<std::size_t>(c)]);
    best = std::max(best, std::abs(detail::bareiss_det(sub)));
    // next combination in lexicographic order
    Index i = rows - 1;
    while (i >= 0 && idx[static_cast<std::size_t>(i)] == cols - rows + i) --i;
    if (i < 0) break;
    ++idx[static_cast<std::size_t>(i)];
    for (Index j = i + 1; j < rows; ++j) {
      idx[static_cast<std::size_t>(j)] = idx[static_cast<std::size_t>(j - 1)] + 1;
    }
  }
  return best;
}

/// c = min_j max_{|I|=d'} |det((L_j)_I)| by exhaustive enumeration.
inline double critical_c(const BLDatum& datum, std::uint64_t limit) {
  check_shape(datum);
  const std::uint64_t count = binomial(datum.d, datum.dprime);
  if (count > limit) {
    throw TooLarge("critical_c: binomial(" + std::to_string(datum.d) + ", " +
                   std::to_string(datum.dprime) + ") = " + std::to_string(count) +
                   " index sets exceeds the limit " + std::to_string(limit));
  }
  double c = std::numeric_limits<double>::infinity();
  for (const Matrix& l : datum.maps) c = std::min(c, max_subdeterminant(l));
  return c;
}

}  // namespace blfix
