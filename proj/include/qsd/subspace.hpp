#pragma once

#include <algorithm>
#include <compare>
#include <cstdint>
#include <map>
#include <mutex>
#include <string>
#include <tuple>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "qsd/gf.hpp"

namespace qsd {

using Int = boost::multiprecision::cpp_int;

/// A length-n vector over F_q, packed 4 bits per coordinate with coordinate 1
/// in the most significant position. For a fixed n, unsigned comparison of
/// packed rows coincides with lexicographic comparison of digit strings.
using Row = std::uint64_t;

constexpr int kMaxAmbientDim = 16;

// Default ceiling on materialized Grassmannian enumerations.
constexpr std::int64_t kEnumCap = 4'000'000;

inline int row_get(Row r, int n, int coord) {  // coord is 1-based
  return static_cast<int>(r >> (4 * (n - coord))) & 0xF;
}

inline Row row_put(Row r, int n, int coord, int value) {
  const int sh = 4 * (n - coord);
  return (r & ~(Row(0xF) << sh)) | (Row(value) << sh);
}

inline Row row_pack(const std::vector<std::uint8_t>& digits) {
  Row r = 0;
  for (std::uint8_t d : digits) r = (r << 4) | d;
  return r;
}

inline std::vector<std::uint8_t> row_unpack(Row r, int n) {
  std::vector<std::uint8_t> d(n);
  for (int c = n; c >= 1; --c) {
    d[c - 1] = static_cast<std::uint8_t>(r & 0xF);
    r >>= 4;
  }
  return d;
}

/// Parses the vector literal syntax: a string of n base-q digits, leftmost
/// digit = coordinate 1.
inline Row row_parse(const std::string& s, const FieldSpec& f, int n) {
  if (static_cast<int>(s.size()) != n)
    throw std::invalid_argument("vector literal '" + s + "': expected " + std::to_string(n) +
                                " digits");
  Row r = 0;
  for (char ch : s) {
    int d = ch - '0';
    if (d < 0 || d >= f.q)
      throw std::invalid_argument("vector literal '" + s + "': digit out of range for F_" +
                                  std::to_string(f.q));
    r = (r << 4) | static_cast<Row>(d);
  }
  return r;
}

inline std::string row_format(Row r, int n) {
  std::string s(n, '0');
  for (int c = n; c >= 1; --c) {
    s[c - 1] = static_cast<char>('0' + (r & 0xF));
    r >>= 4;
  }
  return s;
}

namespace detail {

// In-place reduced row echelon form on digit matrices; returns the 0-based
// pivot columns. Zero rows are dropped.
inline std::vector<int> rref(std::vector<std::vector<std::uint8_t>>& m, const FieldSpec& f) {
  std::vector<int> pivots;
  if (m.empty()) return pivots;
  const int rows = static_cast<int>(m.size());
  const int cols = static_cast<int>(m[0].size());
  int r = 0;
  for (int c = 0; c < cols && r < rows; ++c) {
    int sel = -1;
    for (int i = r; i < rows; ++i)
      if (m[i][c]) {
        sel = i;
        break;
      }
    if (sel < 0) continue;
    std::swap(m[r], m[sel]);
    if (m[r][c] != 1) {
      const std::uint8_t s = f.inv(m[r][c]);
      for (int j = c; j < cols; ++j) m[r][j] = f.mul(m[r][j], s);
    }
    for (int i = 0; i < rows; ++i) {
      if (i == r || !m[i][c]) continue;
      const std::uint8_t coef = m[i][c];
      for (int j = c; j < cols; ++j) m[i][j] = f.sub(m[i][j], f.mul(coef, m[r][j]));
    }
    pivots.push_back(c);
    ++r;
  }
  m.resize(pivots.size());
  return pivots;
}

}  // namespace detail

/// A k-dimensional subspace of F_q^n held as its canonical reduced
/// row echelon basis. Canonicity is the equality contract: two Subspace
/// values are equal as sets of vectors iff their bases are identical.
struct Subspace {
  const FieldSpec* field = nullptr;
  int n = 0;
  std::vector<Row> rows;  // RREF basis, pivot columns strictly increasing

  int dim() const { return static_cast<int>(rows.size()); }

  bool operator==(const Subspace& o) const {
    return field->q == o.field->q && n == o.n && rows == o.rows;
  }
  bool operator<(const Subspace& o) const {
    return std::tie(field->q, n, rows) < std::tie(o.field->q, o.n, o.rows);
  }

  /// File/CLI key: canonical rows joined with ','; "-" for the 0-subspace.
  std::string key() const {
    if (rows.empty()) return "-";
    std::string s;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (i) s += ',';
      s += row_format(rows[i], n);
    }
    return s;
  }
};

struct SubspaceHash {
  std::size_t operator()(const Subspace& s) const {
    std::size_t h = std::hash<int>()(s.n * 31 + s.field->q);
    for (Row r : s.rows) h ^= std::hash<Row>()(r) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    return h;
  }
};

inline void check_same_space(const Subspace& a, const Subspace& b) {
  if (a.field->q != b.field->q || a.n != b.n)
    throw std::invalid_argument("subspace operands live in different ambient spaces");
}

inline Subspace zero_space(const FieldSpec& f, int n) { return Subspace{&f, n, {}}; }

/// Canonical subspace spanned by the given vectors.
inline Subspace span(const std::vector<Row>& vectors, const FieldSpec& f, int n) {
  if (n < 0 || n > kMaxAmbientDim)
    throw std::invalid_argument("ambient dimension " + std::to_string(n) + " out of range");
  std::vector<std::vector<std::uint8_t>> m;
  m.reserve(vectors.size());
  for (Row v : vectors) m.push_back(row_unpack(v, n));
  detail::rref(m, f);
  Subspace s{&f, n, {}};
  s.rows.reserve(m.size());
  for (auto& rw : m) s.rows.push_back(row_pack(rw));
  return s;
}

inline Subspace span_strings(const std::vector<std::string>& vectors, const FieldSpec& f, int n) {
  std::vector<Row> rs;
  rs.reserve(vectors.size());
  for (const auto& v : vectors) rs.push_back(row_parse(v, f, n));
  return span(rs, f, n);
}

inline Subspace whole_space(const FieldSpec& f, int n) {
  std::vector<Row> units;
  for (int c = 1; c <= n; ++c) units.push_back(row_put(0, n, c, 1));
  return span(units, f, n);
}

inline Row unit_row(int n, int coord) { return row_put(0, n, coord, 1); }

inline bool contains(const Subspace& s, Row v) {
  const FieldSpec& f = *s.field;
  auto w = row_unpack(v, s.n);
  for (const Row br : s.rows) {
    auto b = row_unpack(br, s.n);
    int pivot = 0;
    while (pivot < s.n && b[pivot] == 0) ++pivot;
    const std::uint8_t coef = w[pivot];
    if (coef == 0) continue;
    for (int j = pivot; j < s.n; ++j) w[j] = f.sub(w[j], f.mul(coef, b[j]));
  }
  for (auto d : w)
    if (d) return false;
  return true;
}

inline bool contains_subspace(const Subspace& s, const Subspace& t) {
  check_same_space(s, t);
  for (Row r : t.rows)
    if (!contains(s, r)) return false;
  return true;
}

inline Subspace sum_subspace(const Subspace& a, const Subspace& b) {
  check_same_space(a, b);
  std::vector<Row> all = a.rows;
  all.insert(all.end(), b.rows.begin(), b.rows.end());
  return span(all, *a.field, a.n);
}

/// Zassenhaus: row-reduce [A|A; B|0]; rows whose left half vanished carry a
/// basis of the intersection in the right half.
inline Subspace intersect_subspace(const Subspace& a, const Subspace& b) {
  check_same_space(a, b);
  const FieldSpec& f = *a.field;
  const int n = a.n;
  std::vector<std::vector<std::uint8_t>> m;
  for (Row r : a.rows) {
    auto d = row_unpack(r, n);
    std::vector<std::uint8_t> w(2 * n);
    std::copy(d.begin(), d.end(), w.begin());
    std::copy(d.begin(), d.end(), w.begin() + n);
    m.push_back(std::move(w));
  }
  for (Row r : b.rows) {
    auto d = row_unpack(r, n);
    std::vector<std::uint8_t> w(2 * n, 0);
    std::copy(d.begin(), d.end(), w.begin());
    m.push_back(std::move(w));
  }
  detail::rref(m, f);
  std::vector<Row> inter;
  for (auto& w : m) {
    bool left_zero = true;
    for (int j = 0; j < n; ++j) left_zero = left_zero && w[j] == 0;
    if (left_zero) inter.push_back(row_pack({w.begin() + n, w.end()}));
  }
  return span(inter, f, n);
}

/// q-ary Gaussian coefficient [n k]_q, exact. k > n yields 0 by convention.
inline Int gaussian_binomial(int n, int k, int q) {
  if (k < 0 || n < 0) throw std::invalid_argument("gaussian_binomial: negative argument");
  if (k > n) return 0;
  Int num = 1, den = 1;
  const Int Q = q;
  for (int i = 0; i < k; ++i) {
    num *= boost::multiprecision::pow(Q, n - i) - 1;
    den *= boost::multiprecision::pow(Q, i + 1) - 1;
  }
  return num / den;
}

/// All k-subspaces of F_q^n in lexicographic order of canonical bases.
/// Refuses enumerations larger than `cap`.
inline std::vector<Subspace> enumerate_grassmannian(int n, int k, const FieldSpec& f,
                                                    std::int64_t cap = kEnumCap) {
  if (n < 0 || n > kMaxAmbientDim || k < 0)
    throw std::invalid_argument("enumerate_grassmannian: bad dimensions");
  if (k > n) return {};
  const Int count = gaussian_binomial(n, k, f.q);
  if (count > cap)
    throw capacity_error("enumerate_grassmannian(" + std::to_string(n) + "," + std::to_string(k) +
                         ",q=" + std::to_string(f.q) + "): " + count.str() +
                         " subspaces exceeds cap " + std::to_string(cap));

  std::vector<Subspace> out;
  out.reserve(static_cast<std::size_t>(count));
  if (k == 0) {
    out.push_back(zero_space(f, n));
    return out;
  }

  // Pivot-column combinations, then odometer over the free entries.
  std::vector<int> piv(k);
  for (int i = 0; i < k; ++i) piv[i] = i;
  while (true) {
    std::vector<bool> is_piv(n, false);
    for (int p : piv) is_piv[p] = true;
    std::vector<std::pair<int, int>> free_cells;  // (row, col)
    for (int i = 0; i < k; ++i)
      for (int c = piv[i] + 1; c < n; ++c)
        if (!is_piv[c]) free_cells.emplace_back(i, c);

    std::vector<std::uint8_t> vals(free_cells.size(), 0);
    while (true) {
      std::vector<Row> rows(k, 0);
      for (int i = 0; i < k; ++i) rows[i] = row_put(0, n, piv[i] + 1, 1);
      for (std::size_t j = 0; j < free_cells.size(); ++j)
        rows[free_cells[j].first] = row_put(rows[free_cells[j].first], n,
                                            free_cells[j].second + 1, vals[j]);
      out.push_back(Subspace{&f, n, std::move(rows)});
      // next assignment
      std::size_t j = 0;
      while (j < vals.size()) {
        if (++vals[j] < f.q) break;
        vals[j] = 0;
        ++j;
      }
      if (j == vals.size()) break;
    }

    // next pivot combination
    int i = k - 1;
    while (i >= 0 && piv[i] == n - k + i) --i;
    if (i < 0) break;
    ++piv[i];
    for (int j = i + 1; j < k; ++j) piv[j] = piv[j - 1] + 1;
  }

  std::sort(out.begin(), out.end());
  return out;
}

/// The t-subspaces of S, canonical over the ambient space of S.
inline std::vector<Subspace> subspaces_of(const Subspace& s, int t) {
  const int k = s.dim();
  if (t < 0 || t > k) return {};
  if (t == 0) return {zero_space(*s.field, s.n)};

  // Small per-(q,k,t) Grassmannian cache; these are tiny and hit constantly.
  static std::mutex mu;
  static std::map<std::tuple<int, int, int>, std::vector<Subspace>> cache;
  const std::vector<Subspace>* inner;
  {
    std::lock_guard<std::mutex> lock(mu);
    auto& slot = cache[{s.field->q, k, t}];
    if (slot.empty()) slot = enumerate_grassmannian(k, t, *s.field);
    inner = &slot;
  }

  const FieldSpec& f = *s.field;
  std::vector<Subspace> out;
  out.reserve(inner->size());
  std::vector<std::vector<std::uint8_t>> basis;
  for (Row r : s.rows) basis.push_back(row_unpack(r, s.n));
  for (const Subspace& w : *inner) {
    std::vector<Row> rows;
    rows.reserve(t);
    for (Row wr : w.rows) {
      auto coef = row_unpack(wr, k);
      std::vector<std::uint8_t> v(s.n, 0);
      for (int i = 0; i < k; ++i) {
        if (!coef[i]) continue;
        for (int j = 0; j < s.n; ++j) v[j] = f.add(v[j], f.mul(coef[i], basis[i][j]));
      }
      rows.push_back(row_pack(v));
    }
    out.push_back(span(rows, f, s.n));
  }
  return out;
}

}  // namespace qsd
