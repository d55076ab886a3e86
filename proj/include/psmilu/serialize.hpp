#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <type_traits>
#include <vector>

#include "psmilu/common.hpp"
#include "psmilu/multilevel.hpp"

// Binary container for MultilevelPrec<double>, host byte order (little endian
// on all supported targets):
//
//   char[8]  "PSMILUPC"
//   u32      version (1)
//   u32      reserved (0)
//   u64      nnz of the input matrix
//   u64      level count
//   per level:
//     u64 m, u64 n
//     vec s, vec t, ivec p, ivec q_inv
//     ccs L_B, vec d_B, crs U_B, crs E, crs F
//     u8  has dense block
//     [u64 size, vec lu (row major), ivec piv]
//
//   vec  = u64 length + length doubles
//   ivec = u64 length + length int64
//   crs  = u64 rows, u64 cols, ivec row_start, ivec col_ind, vec val (ccs alike)
namespace psmilu {

inline constexpr char prec_magic[8] = {'P', 'S', 'M', 'I', 'L', 'U', 'P', 'C'};
inline constexpr std::uint32_t prec_format_version = 1;

namespace detail {

template <class V>
void put(std::ostream& out, V v) {
  static_assert(std::is_trivially_copyable_v<V>);
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <class V>
V get(std::istream& in) {
  V v{};
  in.read(reinterpret_cast<char*>(&v), sizeof v);
  if (!in) throw Error("truncated preconditioner file");
  return v;
}

template <class V>
void put_vec(std::ostream& out, const std::vector<V>& v) {
  put<std::uint64_t>(out, v.size());
  out.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(V)));
}

template <class V>
std::vector<V> get_vec(std::istream& in) {
  auto len = get<std::uint64_t>(in);
  if (len > (std::uint64_t{1} << 40)) throw Error("corrupt preconditioner file");
  std::vector<V> v(len);
  in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(len * sizeof(V)));
  if (!in) throw Error("truncated preconditioner file");
  return v;
}

inline void put_crs(std::ostream& out, const CRS<double>& a) {
  put<std::uint64_t>(out, a.n_rows);
  put<std::uint64_t>(out, a.n_cols);
  put_vec(out, a.row_start);
  put_vec(out, a.col_ind);
  put_vec(out, a.val);
}

inline CRS<double> get_crs(std::istream& in) {
  CRS<double> a;
  a.n_rows = static_cast<Index>(get<std::uint64_t>(in));
  a.n_cols = static_cast<Index>(get<std::uint64_t>(in));
  a.row_start = get_vec<Index>(in);
  a.col_ind = get_vec<Index>(in);
  a.val = get_vec<double>(in);
  if (static_cast<Index>(a.row_start.size()) != a.n_rows + 1 || a.col_ind.size() != a.val.size())
    throw Error("corrupt sparse block in preconditioner file");
  return a;
}

inline void put_ccs(std::ostream& out, const CCS<double>& a) {
  put<std::uint64_t>(out, a.n_rows);
  put<std::uint64_t>(out, a.n_cols);
  put_vec(out, a.col_start);
  put_vec(out, a.row_ind);
  put_vec(out, a.val);
}

inline CCS<double> get_ccs(std::istream& in) {
  CCS<double> a;
  a.n_rows = static_cast<Index>(get<std::uint64_t>(in));
  a.n_cols = static_cast<Index>(get<std::uint64_t>(in));
  a.col_start = get_vec<Index>(in);
  a.row_ind = get_vec<Index>(in);
  a.val = get_vec<double>(in);
  if (static_cast<Index>(a.col_start.size()) != a.n_cols + 1 || a.row_ind.size() != a.val.size())
    throw Error("corrupt sparse block in preconditioner file");
  return a;
}

}  // namespace detail

inline void write_preconditioner(std::ostream& out, const MultilevelPrec<double>& prec) {
  out.write(prec_magic, sizeof prec_magic);
  detail::put<std::uint32_t>(out, prec_format_version);
  detail::put<std::uint32_t>(out, 0);
  detail::put<std::uint64_t>(out, prec.nnz_input);
  detail::put<std::uint64_t>(out, prec.levels.size());
  for (const auto& lv : prec.levels) {
    detail::put<std::uint64_t>(out, lv.m);
    detail::put<std::uint64_t>(out, lv.n);
    detail::put_vec(out, lv.s);
    detail::put_vec(out, lv.t);
    detail::put_vec(out, lv.p);
    detail::put_vec(out, lv.q_inv);
    detail::put_ccs(out, lv.L_B);
    detail::put_vec(out, lv.d_B);
    detail::put_crs(out, lv.U_B);
    detail::put_crs(out, lv.E);
    detail::put_crs(out, lv.F);
    detail::put<std::uint8_t>(out, lv.dense ? 1 : 0);
    if (lv.dense) {
      detail::put<std::uint64_t>(out, lv.dense->size());
      std::vector<double> vals(lv.dense->lu.values().begin(), lv.dense->lu.values().end());
      detail::put_vec(out, vals);
      detail::put_vec(out, lv.dense->piv);
    }
  }
  if (!out) throw Error("failed writing preconditioner");
}

inline MultilevelPrec<double> read_preconditioner(std::istream& in) {
  char magic[8];
  in.read(magic, sizeof magic);
  if (!in || std::memcmp(magic, prec_magic, sizeof magic) != 0)
    throw Error("not a preconditioner file");
  auto version = detail::get<std::uint32_t>(in);
  if (version != prec_format_version)
    throw Error("unsupported preconditioner format version " + std::to_string(version));
  detail::get<std::uint32_t>(in);
  MultilevelPrec<double> prec;
  prec.nnz_input = static_cast<Index>(detail::get<std::uint64_t>(in));
  auto count = detail::get<std::uint64_t>(in);
  if (count > 1024) throw Error("corrupt preconditioner file");
  for (std::uint64_t l = 0; l < count; ++l) {
    PrecLevel<double> lv;
    lv.m = static_cast<Index>(detail::get<std::uint64_t>(in));
    lv.n = static_cast<Index>(detail::get<std::uint64_t>(in));
    lv.s = detail::get_vec<double>(in);
    lv.t = detail::get_vec<double>(in);
    lv.p = detail::get_vec<Index>(in);
    lv.q_inv = detail::get_vec<Index>(in);
    lv.L_B = detail::get_ccs(in);
    lv.d_B = detail::get_vec<double>(in);
    lv.U_B = detail::get_crs(in);
    lv.E = detail::get_crs(in);
    lv.F = detail::get_crs(in);
    if (detail::get<std::uint8_t>(in)) {
      auto size = static_cast<Index>(detail::get<std::uint64_t>(in));
      auto vals = detail::get_vec<double>(in);
      if (static_cast<Index>(vals.size()) != size * size) throw Error("corrupt dense block");
      DenseLU<double> f;
      f.lu = DenseMatrix<double>(size, size);
      std::copy(vals.begin(), vals.end(), f.lu.values().begin());
      f.piv = detail::get_vec<Index>(in);
      lv.dense = std::move(f);
    }
    auto n = static_cast<std::size_t>(lv.n);
    if (lv.m > lv.n || lv.s.size() != n || lv.t.size() != n || lv.p.size() != n ||
        lv.q_inv.size() != n || static_cast<Index>(lv.d_B.size()) != lv.m)
      throw Error("inconsistent level in preconditioner file");
    prec.levels.push_back(std::move(lv));
  }
  return prec;
}

inline void write_preconditioner(const std::string& path, const MultilevelPrec<double>& prec) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  write_preconditioner(out, prec);
}

inline MultilevelPrec<double> read_preconditioner(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  return read_preconditioner(in);
}

}  // namespace psmilu
