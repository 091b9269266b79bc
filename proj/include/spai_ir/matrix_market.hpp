#pragma once

// Matrix Market coordinate reader/writer (real or integer values, general or
// symmetric storage).

#include <algorithm>
#include <cctype>
#include <cstddef>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "spai_ir/error.hpp"
#include "spai_ir/sparse.hpp"

namespace spai_ir {

namespace detail {

inline std::string lowercase(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

[[noreturn]] inline void parse_fail(std::size_t line, const std::string& msg) {
  throw Error(ErrorKind::Parse, "line " + std::to_string(line) + ": " + msg);
}

}  // namespace detail

inline SparseMatrix load_matrix_market(std::istream& in) {
  std::string line;
  std::size_t lineno = 0;
  if (!std::getline(in, line)) detail::parse_fail(1, "empty input");
  ++lineno;
  std::istringstream header(line);
  std::string banner, object, format, field, symmetry;
  header >> banner >> object >> format >> field >> symmetry;
  if (banner != "%%MatrixMarket") detail::parse_fail(lineno, "missing %%MatrixMarket banner");
  object = detail::lowercase(object);
  format = detail::lowercase(format);
  field = detail::lowercase(field);
  symmetry = detail::lowercase(symmetry);
  if (object != "matrix") detail::parse_fail(lineno, "unsupported object '" + object + "'");
  if (format != "coordinate") detail::parse_fail(lineno, "only coordinate format is supported");
  if (field == "pattern") detail::parse_fail(lineno, "pattern-only matrices carry no values");
  if (field != "real" && field != "integer" && field != "double")
    detail::parse_fail(lineno, "unsupported field '" + field + "'");
  const bool symmetric = symmetry == "symmetric";
  if (!symmetric && symmetry != "general") detail::parse_fail(lineno, "unsupported symmetry '" + symmetry + "'");

  // Skip comments and blank lines up to the size line.
  long long rows = -1, cols = -1, entries = -1;
  while (std::getline(in, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '%') continue;
    std::istringstream size_line(line);
    if (!(size_line >> rows >> cols >> entries) || rows < 0 || cols < 0 || entries < 0)
      detail::parse_fail(lineno, "malformed size line");
    break;
  }
  if (rows < 0) detail::parse_fail(lineno, "missing size line");

  std::vector<Triplet> trip;
  trip.reserve(static_cast<std::size_t>(symmetric ? 2 * entries : entries));
  long long seen = 0;
  while (seen < entries && std::getline(in, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '%') continue;
    std::istringstream entry(line);
    long long i = 0, j = 0;
    double v = 0.0;
    if (!(entry >> i >> j >> v)) detail::parse_fail(lineno, "malformed entry");
    if (i < 1 || j < 1 || i > rows || j > cols) detail::parse_fail(lineno, "index out of range");
    const auto r = static_cast<std::size_t>(i - 1), c = static_cast<std::size_t>(j - 1);
    trip.push_back({r, c, v});
    if (symmetric && r != c) trip.push_back({c, r, v});
    ++seen;
  }
  if (seen < entries) detail::parse_fail(lineno, "expected " + std::to_string(entries) + " entries, found " +
                                                     std::to_string(seen));
  return SparseMatrix::from_triplets(static_cast<std::size_t>(rows), static_cast<std::size_t>(cols), std::move(trip));
}

inline SparseMatrix load_matrix_market_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open '" + path + "'");
  return load_matrix_market(in);
}

inline void write_matrix_market(std::ostream& out, const SparseMatrix& a) {
  out << "%%MatrixMarket matrix coordinate real general\n";
  out << a.rows() << ' ' << a.cols() << ' ' << a.nnz() << '\n';
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (std::size_t j = 0; j < a.cols(); ++j) {
    const auto rows = a.col_rows(j);
    const auto vals = a.col_values(j);
    for (std::size_t k = 0; k < rows.size(); ++k) out << rows[k] + 1 << ' ' << j + 1 << ' ' << vals[k] << '\n';
  }
}

}  // namespace spai_ir
