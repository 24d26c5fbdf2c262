#pragma once

#include <algorithm>
#include <vector>

#include "qsd/subspace.hpp"

namespace qsd {

/// Deletes coordinate i (1-based) from every vector of S. The dimension
/// drops by exactly one iff S contains the i-th unity vector.
inline Subspace puncture(const Subspace& s, int i) {
  if (i < 1 || i > s.n)
    throw std::invalid_argument("puncture: coordinate " + std::to_string(i) + " out of range");
  std::vector<Row> rows;
  rows.reserve(s.rows.size());
  for (Row r : s.rows) {
    auto d = row_unpack(r, s.n);
    d.erase(d.begin() + (i - 1));
    rows.push_back(row_pack(d));
  }
  return span(rows, *s.field, s.n - 1);
}

/// Sequential puncturing on a set of distinct coordinates; the result does
/// not depend on the order (highest index deleted first internally).
inline Subspace puncture_multi(const Subspace& s, std::vector<int> coords) {
  std::sort(coords.begin(), coords.end());
  for (std::size_t i = 1; i < coords.size(); ++i)
    if (coords[i] == coords[i - 1])
      throw std::invalid_argument("puncture_multi: repeated coordinate");
  Subspace cur = s;
  for (auto it = coords.rbegin(); it != coords.rend(); ++it) cur = puncture(cur, *it);
  return cur;
}

/// The q^t extensions of a t-subspace of F_q^n to t-subspaces of F_q^(n+1),
/// new coordinate appended last: one per assignment of new-coordinate values
/// to the canonical basis rows. Appending preserves RREF, so no
/// re-canonicalization is needed.
inline std::vector<Subspace> extensions_same_dim(const Subspace& s) {
  const FieldSpec& f = *s.field;
  const int t = s.dim();
  if (s.n + 1 > kMaxAmbientDim) throw capacity_error("extension exceeds ambient cap");
  std::vector<Subspace> out;
  std::vector<std::uint8_t> tail(t, 0);
  while (true) {
    std::vector<Row> rows;
    rows.reserve(t);
    for (int i = 0; i < t; ++i) rows.push_back((s.rows[i] << 4) | tail[i]);
    out.push_back(Subspace{&f, s.n + 1, std::move(rows)});
    int j = 0;
    while (j < t) {
      if (++tail[j] < f.q) break;
      tail[j] = 0;
      ++j;
    }
    if (j == t) break;
  }
  return out;
}

/// The unique (t+1)-dimensional extension: S zero-extended plus the new unity
/// vector.
inline Subspace extension_up_dim(const Subspace& s) {
  if (s.n + 1 > kMaxAmbientDim) throw capacity_error("extension exceeds ambient cap");
  std::vector<Row> rows;
  rows.reserve(s.rows.size() + 1);
  for (Row r : s.rows) rows.push_back(r << 4);
  rows.push_back(Row(1));  // e_{n+1}
  return Subspace{s.field, s.n + 1, std::move(rows)};
}

namespace detail {

inline void extend_chains(const Subspace& x, int p, int target_dim, std::vector<Subspace>& out) {
  if (p == 0) {
    out.push_back(x);
    return;
  }
  if (x.dim() <= target_dim && target_dim - x.dim() <= p - 1)
    for (const Subspace& y : extensions_same_dim(x)) extend_chains(y, p - 1, target_dim, out);
  if (x.dim() + 1 <= target_dim) extend_chains(extension_up_dim(x), p - 1, target_dim, out);
}

}  // namespace detail

/// All t'-subspaces of F_q^(m+p) whose p-fold puncture on the last p
/// coordinates equals X. Distinct extension chains give distinct results
/// (puncturing the result recovers every intermediate step), so the
/// recursion needs no deduplication.
inline std::vector<Subspace> enumerate_p_extensions(const Subspace& x, int p, int target_dim) {
  if (p < 0) throw std::invalid_argument("enumerate_p_extensions: negative p");
  if (x.n + p > kMaxAmbientDim) throw capacity_error("extension exceeds ambient cap");
  if (x.dim() > target_dim || x.dim() < target_dim - p || target_dim > x.n + p)
    throw std::invalid_argument("enumerate_p_extensions: dimension constraints violated");
  std::vector<Subspace> out;
  detail::extend_chains(x, p, target_dim, out);
  std::sort(out.begin(), out.end());
  return out;
}

/// Column replacement: coordinate j of every vector becomes the given linear
/// combination of coordinates. Requires coeffs[j-1] != 0 so the substitution
/// is a bijection of F_q^n, hence permutes every Grassmannian and preserves
/// coverage properties of designs.
inline Subspace column_transform(const Subspace& s, int j,
                                 const std::vector<std::uint8_t>& coeffs) {
  const FieldSpec& f = *s.field;
  if (j < 1 || j > s.n) throw std::invalid_argument("column_transform: column out of range");
  if (static_cast<int>(coeffs.size()) != s.n)
    throw std::invalid_argument("column_transform: need one coefficient per coordinate");
  if (coeffs[j - 1] == 0)
    throw std::invalid_argument("column_transform: coefficient of the replaced column is zero");
  std::vector<Row> rows;
  rows.reserve(s.rows.size());
  for (Row r : s.rows) {
    auto d = row_unpack(r, s.n);
    std::uint8_t nv = 0;
    for (int c = 0; c < s.n; ++c) nv = f.add(nv, f.mul(coeffs[c], d[c]));
    d[j - 1] = nv;
    rows.push_back(row_pack(d));
  }
  return span(rows, f, s.n);
}

inline Subspace column_swap(const Subspace& s, int i, int j) {
  if (i < 1 || i > s.n || j < 1 || j > s.n)
    throw std::invalid_argument("column_swap: column out of range");
  std::vector<Row> rows;
  rows.reserve(s.rows.size());
  for (Row r : s.rows) {
    const int di = row_get(r, s.n, i), dj = row_get(r, s.n, j);
    rows.push_back(row_put(row_put(r, s.n, i, dj), s.n, j, di));
  }
  return span(rows, *s.field, s.n);
}

/// v -> v*A for an n x n matrix over the field (rows of A packed). The
/// caller is responsible for A being invertible when bijectivity matters.
inline Subspace apply_linear(const Subspace& s, const std::vector<Row>& a) {
  const FieldSpec& f = *s.field;
  if (static_cast<int>(a.size()) != s.n) throw std::invalid_argument("apply_linear: bad matrix");
  std::vector<std::vector<std::uint8_t>> am;
  am.reserve(s.n);
  for (Row r : a) am.push_back(row_unpack(r, s.n));
  std::vector<Row> rows;
  rows.reserve(s.rows.size());
  for (Row r : s.rows) {
    auto d = row_unpack(r, s.n);
    std::vector<std::uint8_t> v(s.n, 0);
    for (int i = 0; i < s.n; ++i) {
      if (!d[i]) continue;
      for (int j = 0; j < s.n; ++j) v[j] = f.add(v[j], f.mul(d[i], am[i][j]));
    }
    rows.push_back(row_pack(v));
  }
  return span(rows, f, s.n);
}

}  // namespace qsd
