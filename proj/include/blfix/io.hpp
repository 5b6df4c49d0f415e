#pragma once

// JSON persistence for matrices and data.
//
//   matrix: {"n": <int>, "data": [[row], ...]}
//   datum:  {"d": <int>, "dprime": <int>, "m": <int>,
//            "weights": [w_1, ...], "maps": [[[row], ...], ...]}

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"

#include "blfix/datum.hpp"
#include "blfix/matcore.hpp"

namespace blfix {

using Json = nlohmann::json;

inline constexpr double kSymmetryTolerance = 1e-8;

namespace detail {

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path.string() + ": cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline Json parse_json(const std::string& text, const std::string& source) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    std::size_t line = 1;
    const std::size_t upto = std::min<std::size_t>(e.byte, text.size());
    for (std::size_t i = 0; i < upto; ++i) {
      if (text[i] == '\n') ++line;
    }
    throw ParseError(source + ":" + std::to_string(line) + ": " + e.what());
  }
}

inline const Json& field(const Json& obj, const char* key, const std::string& ctx) {
  if (!obj.is_object()) throw ParseError(ctx + ": expected an object");
  const auto it = obj.find(key);
  if (it == obj.end()) throw ParseError(ctx + ": missing field \"" + key + "\"");
  return *it;
}

inline double number(const Json& v, const std::string& ctx) {
  if (!v.is_number()) throw ParseError(ctx + ": expected a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) throw ParseError(ctx + ": non-finite value");
  return x;
}

inline int integer(const Json& v, const std::string& ctx) {
  if (!v.is_number_integer()) throw ParseError(ctx + ": expected an integer");
  return v.get<int>();
}

inline Matrix dense_rows(const Json& rows, Index expect_rows, Index expect_cols,
                         const std::string& ctx) {
  if (!rows.is_array()) throw ParseError(ctx + ": expected an array of rows");
  if (static_cast<Index>(rows.size()) != expect_rows) {
    throw ShapeMismatch(ctx + ": has " + std::to_string(rows.size()) + " rows, expected " +
                        std::to_string(expect_rows));
  }
  Matrix a(expect_rows, expect_cols);
  for (Index r = 0; r < expect_rows; ++r) {
    const Json& row = rows[static_cast<std::size_t>(r)];
    const std::string rctx = ctx + "[" + std::to_string(r) + "]";
    if (!row.is_array()) throw ParseError(rctx + ": expected an array");
    if (static_cast<Index>(row.size()) != expect_cols) {
      throw ShapeMismatch(rctx + ": has " + std::to_string(row.size()) + " entries, expected " +
                          std::to_string(expect_cols));
    }
    for (Index c = 0; c < expect_cols; ++c) {
      a(r, c) = number(row[static_cast<std::size_t>(c)], rctx + "[" + std::to_string(c) + "]");
    }
  }
  return a;
}

inline Json rows_json(const Matrix& a) {
  Json rows = Json::array();
  for (Index r = 0; r < a.rows(); ++r) {
    Json row = Json::array();
    for (Index c = 0; c < a.cols(); ++c) row.push_back(a(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace detail

/// Writes through a temporary file and renames it into place, so a failure
/// never leaves a partial file at path.
inline void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ParseError(tmp.string() + ": cannot open for writing");
    out << contents;
    out.flush();
    if (!out) {
      out.close();
      std::filesystem::remove(tmp);
      throw ParseError(tmp.string() + ": write failed");
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw ParseError(path.string() + ": cannot rename into place: " + ec.message());
  }
}

/// Parses a symmetric matrix; asymmetry above 1e-8 is an error, smaller
/// asymmetry is averaged away.
inline SymMatrix matrix_from_json(const Json& j, const std::string& ctx = "matrix") {
  const int n = detail::integer(detail::field(j, "n", ctx), ctx + ".n");
  if (n < 1) throw ParseError(ctx + ".n: must be positive");
  const Matrix a = detail::dense_rows(detail::field(j, "data", ctx), n, n, ctx + ".data");
  const double asym = (a - a.transpose()).cwiseAbs().maxCoeff();
  if (asym > kSymmetryTolerance) {
    throw ParseError(ctx + ": not symmetric (max |a_ij - a_ji| = " + std::to_string(asym) + ")");
  }
  return SymMatrix(a);
}

inline Json matrix_to_json(const Matrix& a) {
  return Json{{"n", a.rows()}, {"data", detail::rows_json(a)}};
}

inline SymMatrix load_matrix(const std::filesystem::path& path) {
  return matrix_from_json(detail::parse_json(detail::read_file(path), path.string()),
                          path.string());
}

inline SpdMatrix load_spd_matrix(const std::filesystem::path& path) {
  return SpdMatrix(load_matrix(path));
}

inline void save_matrix(const Matrix& a, const std::filesystem::path& path) {
  write_file_atomic(path, matrix_to_json(a).dump(2) + "\n");
}

inline BLDatum datum_from_json(const Json& j, const std::string& ctx = "datum") {
  BLDatum datum;
  datum.d = detail::integer(detail::field(j, "d", ctx), ctx + ".d");
  datum.dprime = detail::integer(detail::field(j, "dprime", ctx), ctx + ".dprime");
  const int m = detail::integer(detail::field(j, "m", ctx), ctx + ".m");
  if (datum.d < 1 || datum.dprime < 1 || m < 1) {
    throw ShapeMismatch(ctx + ": d, dprime and m must be positive");
  }

  const Json& weights = detail::field(j, "weights", ctx);
  if (!weights.is_array()) throw ParseError(ctx + ".weights: expected an array");
  if (static_cast<int>(weights.size()) != m) {
    throw ShapeMismatch(ctx + ".weights: has " + std::to_string(weights.size()) +
                        " entries, expected m=" + std::to_string(m));
  }
  for (std::size_t i = 0; i < weights.size(); ++i) {
    datum.weights.push_back(
        detail::number(weights[i], ctx + ".weights[" + std::to_string(i) + "]"));
  }

  const Json& maps = detail::field(j, "maps", ctx);
  if (!maps.is_array()) throw ParseError(ctx + ".maps: expected an array");
  if (static_cast<int>(maps.size()) != m) {
    throw ShapeMismatch(ctx + ".maps: has " + std::to_string(maps.size()) +
                        " entries, expected m=" + std::to_string(m));
  }
  for (std::size_t i = 0; i < maps.size(); ++i) {
    datum.maps.push_back(detail::dense_rows(maps[i], datum.dprime, datum.d,
                                            ctx + ".maps[" + std::to_string(i) + "]"));
  }
  return datum;
}

inline Json datum_to_json(const BLDatum& datum) {
  check_shape(datum);
  Json maps = Json::array();
  for (const Matrix& l : datum.maps) maps.push_back(detail::rows_json(l));
  return Json{{"d", datum.d},
              {"dprime", datum.dprime},
              {"m", datum.m()},
              {"weights", datum.weights},
              {"maps", std::move(maps)}};
}

inline BLDatum load_datum(const std::filesystem::path& path) {
  return datum_from_json(detail::parse_json(detail::read_file(path), path.string()),
                         path.string());
}

inline void save_datum(const BLDatum& datum, const std::filesystem::path& path) {
  write_file_atomic(path, datum_to_json(datum).dump(2) + "\n");
}

}  // namespace blfix
