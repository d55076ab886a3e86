#pragma once

#include <cstdio>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "psmilu/common.hpp"
#include "psmilu/sparse.hpp"

namespace psmilu {

namespace detail {

inline bool mm_next_line(std::istream& in, std::string& line, std::size_t& line_no) {
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '%') continue;
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    return true;
  }
  return false;
}

inline std::string format_real(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace detail

/// Reads a real coordinate Matrix Market stream. Symmetric storage is expanded.
inline TripletList<double> mm_read(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) throw ParseError("empty input", 1);
  ++line_no;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  bool symmetric = false;
  if (line == "%%MatrixMarket matrix coordinate real general") {
    symmetric = false;
  } else if (line == "%%MatrixMarket matrix coordinate real symmetric") {
    symmetric = true;
  } else {
    throw ParseError("unsupported or malformed banner: '" + line + "'", line_no);
  }

  if (!detail::mm_next_line(in, line, line_no)) throw ParseError("missing size line", line_no + 1);
  long long rows = 0, cols = 0, count = 0;
  {
    std::istringstream ss(line);
    std::string extra;
    if (!(ss >> rows >> cols >> count) || (ss >> extra) || rows < 0 || cols < 0 || count < 0)
      throw ParseError("malformed size line", line_no);
  }
  if (symmetric && rows != cols) throw ParseError("symmetric matrix must be square", line_no);

  TripletList<double> t(rows, cols);
  t.entries.reserve(static_cast<std::size_t>(symmetric ? 2 * count : count));
  for (long long e = 0; e < count; ++e) {
    if (!detail::mm_next_line(in, line, line_no))
      throw ParseError("expected " + std::to_string(count) + " entries, found " +
                           std::to_string(e),
                       line_no + 1);
    std::istringstream ss(line);
    long long r = 0, c = 0;
    double v = 0;
    std::string extra;
    if (!(ss >> r >> c >> v) || (ss >> extra)) throw ParseError("malformed entry", line_no);
    if (r < 1 || r > rows || c < 1 || c > cols) throw ParseError("index out of range", line_no);
    t.add(r - 1, c - 1, v);
    if (symmetric && r != c) t.add(c - 1, r - 1, v);
  }
  if (detail::mm_next_line(in, line, line_no))
    throw ParseError("more entries than declared", line_no);
  return t;
}

inline TripletList<double> mm_read(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  return mm_read(in);
}

inline void mm_write(std::ostream& out, const CRS<double>& a) {
  out << "%%MatrixMarket matrix coordinate real general\n";
  out << a.n_rows << ' ' << a.n_cols << ' ' << a.nnz() << '\n';
  for (Index i = 0; i < a.n_rows; ++i)
    for (Index p = a.row_start[i]; p < a.row_start[i + 1]; ++p)
      out << i + 1 << ' ' << a.col_ind[p] + 1 << ' ' << detail::format_real(a.val[p]) << '\n';
}

inline void mm_write(const std::string& path, const CRS<double>& a) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  mm_write(out, a);
}

/// Dense column vector in Matrix Market array format.
inline void mm_write_vector(std::ostream& out, const std::vector<double>& v) {
  out << "%%MatrixMarket matrix array real general\n";
  out << v.size() << " 1\n";
  for (double x : v) out << detail::format_real(x) << '\n';
}

inline void mm_write_vector(const std::string& path, const std::vector<double>& v) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  mm_write_vector(out, v);
}

inline std::vector<double> mm_read_vector(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) throw ParseError("empty input", 1);
  ++line_no;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "%%MatrixMarket matrix array real general")
    throw ParseError("unsupported or malformed banner: '" + line + "'", line_no);
  if (!detail::mm_next_line(in, line, line_no)) throw ParseError("missing size line", line_no + 1);
  long long rows = 0, cols = 0;
  {
    std::istringstream ss(line);
    if (!(ss >> rows >> cols) || rows < 0 || cols != 1)
      throw ParseError("expected an n x 1 array", line_no);
  }
  std::vector<double> v;
  v.reserve(static_cast<std::size_t>(rows));
  for (long long i = 0; i < rows; ++i) {
    if (!detail::mm_next_line(in, line, line_no))
      throw ParseError("expected " + std::to_string(rows) + " values", line_no + 1);
    std::istringstream ss(line);
    double x = 0;
    if (!(ss >> x)) throw ParseError("malformed value", line_no);
    v.push_back(x);
  }
  return v;
}

inline std::vector<double> mm_read_vector(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  return mm_read_vector(in);
}

}  // namespace psmilu
