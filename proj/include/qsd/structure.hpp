#pragma once

#include <array>
#include <map>
#include <string>
#include <vector>

#include "qsd/design.hpp"
#include "qsd/equations.hpp"

namespace qsd {

/// The three 3-subspaces of F_q^7 with four all-zero columns used as gauge
/// anchors: Z1 has zero columns 1-4, Z2 has zero columns 4-7, Z3 has zero
/// columns 1, 2, 5, 6.
struct ForcedBlocks {
  Subspace z1, z2, z3;
};

inline ForcedBlocks forced_blocks(int q) {
  const FieldSpec& f = field_new(q);
  return ForcedBlocks{
      span({unit_row(7, 5), unit_row(7, 6), unit_row(7, 7)}, f, 7),
      span({unit_row(7, 1), unit_row(7, 2), unit_row(7, 3)}, f, 7),
      span({unit_row(7, 3), unit_row(7, 4), unit_row(7, 7)}, f, 7),
  };
}

/// Closed-form census of the block classes of a full system: the A/B sets
/// (blocks meeting a leading- or trailing-zero 1-subspace), their overlap,
/// and what remains.
struct StructureAudit {
  int q = 0;
  Int sizeA, sizeB, sizeAB, sizeAonly, residual, total;

  bool identity_holds() const { return 2 * sizeAonly + sizeAB + 2 + residual == total; }
};

inline StructureAudit audit_formulas(int q) {
  const Int Q = q;
  auto pw = [&](int e) { return boost::multiprecision::pow(Q, e); };
  StructureAudit a;
  a.q = q;
  a.sizeA = pw(2) * (pw(2) + 1) * (pw(2) + Q + 1);
  a.sizeB = a.sizeA;
  a.sizeAB = (pw(2) + Q + 1) * (pw(2) + Q + 1);
  a.sizeAonly = (pw(2) + Q + 1) * (pw(4) - Q - 1);
  a.residual = Q * (pw(7) - pw(5) - pw(4) - 2 * pw(3) + pw(2) + 2 * Q + 2);
  a.total = (pw(6) + pw(5) + pw(4) + pw(3) + pw(2) + Q + 1) * (pw(2) - Q + 1);
  return a;
}

namespace detail {

// Does the block contain a nonzero vector whose first (leading=true) or last
// four coordinates are zero? Equivalent to nontrivial intersection with the
// corresponding coordinate 3-space.
inline bool meets_special(const Subspace& s, bool leading) {
  const FieldSpec& f = *s.field;
  std::vector<Row> units;
  for (int c = leading ? 5 : 1; c <= (leading ? 7 : 3); ++c) units.push_back(unit_row(7, c));
  return intersect_subspace(s, span(units, f, 7)).dim() > 0;
}

// Dimension of the intersection with the leading/trailing coordinate 3-space.
inline int special_dim(const Subspace& s, bool leading) {
  const FieldSpec& f = *s.field;
  std::vector<Row> units;
  for (int c = leading ? 5 : 1; c <= (leading ? 7 : 3); ++c) units.push_back(unit_row(7, c));
  return intersect_subspace(s, span(units, f, 7)).dim();
}

}  // namespace detail

/// Partition of a design over F_q^7 by A/B membership. Sizes count
/// multiplicity.
struct BlockClassification {
  DesignMultiset z_blocks, a_only, b_only, ab, rest;

  long long size_z() const { return z_blocks.total_size(); }
  long long size_a_only() const { return a_only.total_size(); }
  long long size_b_only() const { return b_only.total_size(); }
  long long size_ab() const { return ab.total_size(); }
  long long size_rest() const { return rest.total_size(); }
};

inline BlockClassification classify_blocks(const DesignMultiset& d) {
  if (d.n != 7) throw std::invalid_argument("classify_blocks: design must live in F_q^7");
  const ForcedBlocks z = forced_blocks(d.field->q);
  BlockClassification cl{DesignMultiset(*d.field, 7), DesignMultiset(*d.field, 7),
                         DesignMultiset(*d.field, 7), DesignMultiset(*d.field, 7),
                         DesignMultiset(*d.field, 7)};
  for (const auto& [s, m] : d.blocks) {
    if (s == z.z1 || s == z.z2) {
      cl.z_blocks.blocks[s] += m;
      continue;
    }
    const bool in_a = detail::meets_special(s, true);
    const bool in_b = detail::meets_special(s, false);
    if (in_a && in_b)
      cl.ab.blocks[s] += m;
    else if (in_a)
      cl.a_only.blocks[s] += m;
    else if (in_b)
      cl.b_only.blocks[s] += m;
    else
      cl.rest.blocks[s] += m;
  }
  return cl;
}

/// Flags non-Z1 blocks holding two independent leading-zero vectors (their
/// sum is a third, forcing the block to be Z1 in an exact design) and the
/// trailing-zero mirror image.
inline std::vector<Subspace> no_double_special(const DesignMultiset& d) {
  if (d.n != 7) throw std::invalid_argument("no_double_special: design must live in F_q^7");
  const ForcedBlocks z = forced_blocks(d.field->q);
  std::vector<Subspace> bad;
  for (const auto& [s, m] : d.blocks) {
    if (s != z.z1 && detail::special_dim(s, true) >= 2) {
      bad.push_back(s);
      continue;
    }
    if (s != z.z2 && detail::special_dim(s, false) >= 2) bad.push_back(s);
  }
  return bad;
}

namespace detail {

// Lexicographically least block of D whose puncture on coordinates {5,6,7}
// equals `target` (a subspace of F_q^4).
inline std::optional<Subspace> find_witness(const DesignMultiset& d, const Subspace& target) {
  for (const auto& [s, m] : d.blocks)
    if (puncture_multi(s, {5, 6, 7}) == target) return s;
  return std::nullopt;
}

}  // namespace detail

/// Gauge fix forcing Z2: finds a block X whose puncture on the last three
/// coordinates is the 3-subspace of F_q^4 spanned by the first three unity
/// vectors, then replaces columns 5, 6, 7 by combinations with columns 1-3
/// that vanish on X. Z1 is untouched and the coverage status of the design
/// is preserved (the substitution is invertible).
inline DesignMultiset normalize_z1_z2(const DesignMultiset& d) {
  if (d.n != 7) throw std::invalid_argument("normalize_z1_z2: design must live in F_q^7");
  const FieldSpec& f = *d.field;
  const ForcedBlocks z = forced_blocks(f.q);
  if (!d.blocks.count(z.z1)) throw std::invalid_argument("normalize_z1_z2: Z1 is not in the design");

  const Subspace target = span({unit_row(4, 1), unit_row(4, 2), unit_row(4, 3)}, f, 4);
  auto witness = detail::find_witness(d, target);
  if (!witness)
    throw std::invalid_argument(
        "normalize_z1_z2: no block punctures to the rank-3 prefix subspace");

  // Columns 1-3 of the witness form an invertible 3x3 matrix M; for each
  // j in {5,6,7} solve M*lambda = -col_j and substitute col_j + lambda.cols.
  const Subspace& x = *witness;
  std::vector<std::vector<std::uint8_t>> rows;
  for (Row r : x.rows) rows.push_back(row_unpack(r, 7));
  DesignMultiset cur = d;
  for (int j = 5; j <= 7; ++j) {
    std::vector<std::vector<std::uint8_t>> aug(3, std::vector<std::uint8_t>(4));
    for (int i = 0; i < 3; ++i) {
      for (int c = 0; c < 3; ++c) aug[i][c] = rows[i][c];
      aug[i][3] = f.neg(rows[i][j - 1]);
    }
    const auto pivots = detail::rref(aug, f);
    if (pivots != std::vector<int>{0, 1, 2})
      throw std::invalid_argument("normalize_z1_z2: witness prefix is not of rank 3");
    std::vector<std::uint8_t> coeffs(7, 0);
    for (int i = 0; i < 3; ++i) coeffs[i] = aug[i][3];
    coeffs[j - 1] = 1;
    cur = column_transform(cur, j, coeffs);
  }
  return cur;
}

/// Gauge fix forcing Z3 from the block extending the (unique) line of F_q^4
/// with zero first and second columns: an optional swap bringing a nonzero
/// entry of the special vector to column 7, combinations with column 7 that
/// clear columns 5 and 6 on that vector, then combinations with columns 3
/// and 4 that clear columns 5 and 6 on the whole block. Z1 is untouched.
inline DesignMultiset normalize_z1_z3(const DesignMultiset& d) {
  if (d.n != 7) throw std::invalid_argument("normalize_z1_z3: design must live in F_q^7");
  const FieldSpec& f = *d.field;
  const ForcedBlocks z = forced_blocks(f.q);
  if (!d.blocks.count(z.z1)) throw std::invalid_argument("normalize_z1_z3: Z1 is not in the design");

  const Subspace target = span({unit_row(4, 3), unit_row(4, 4)}, f, 4);
  auto witness = detail::find_witness(d, target);
  if (!witness)
    throw std::invalid_argument("normalize_z1_z3: no block extends the zero-prefix line");

  DesignMultiset cur = d;
  Subspace y = *witness;
  const Subspace tail3 = span({unit_row(7, 5), unit_row(7, 6), unit_row(7, 7)}, f, 7);

  auto special_vector = [&]() {
    Subspace v = intersect_subspace(y, tail3);
    if (v.dim() != 1)
      throw std::invalid_argument("normalize_z1_z3: witness has no unique special vector");
    return row_unpack(v.rows[0], 7);
  };

  auto v = special_vector();
  if (v[6] == 0) {
    const int other = v[4] != 0 ? 5 : 6;
    cur = column_swap(cur, other, 7);
    y = column_swap(y, other, 7);
    v = special_vector();
  }
  for (int j = 5; j <= 6; ++j) {
    if (v[j - 1] == 0) continue;
    std::vector<std::uint8_t> coeffs(7, 0);
    coeffs[j - 1] = 1;
    coeffs[6] = f.neg(f.mul(v[j - 1], f.inv(v[6])));
    cur = column_transform(cur, j, coeffs);
    y = column_transform(y, j, coeffs);
    v = special_vector();
  }

  // v is now supported on column 7 alone. Pick basis vectors of Y projecting
  // to e3 and e4 and clear columns 5 and 6 with columns 3 and 4.
  std::vector<std::vector<std::uint8_t>> rows;
  for (Row r : y.rows) rows.push_back(row_unpack(r, 7));
  std::vector<std::uint8_t> y3, y4;
  for (auto& r : rows) {
    // RREF pivots of the witness sit at columns 3, 4 and the special column.
    if (r[2] == 1 && r[3] == 0 && r[0] == 0 && r[1] == 0) y3 = r;
    if (r[2] == 0 && r[3] == 1 && r[0] == 0 && r[1] == 0) y4 = r;
  }
  if (y3.empty() || y4.empty())
    throw std::invalid_argument("normalize_z1_z3: witness basis lacks the e3/e4 rows");
  for (int j = 5; j <= 6; ++j) {
    std::vector<std::uint8_t> coeffs(7, 0);
    coeffs[j - 1] = 1;
    coeffs[2] = f.neg(y3[j - 1]);
    coeffs[3] = f.neg(y4[j - 1]);
    cur = column_transform(cur, j, coeffs);
    y = column_transform(y, j, coeffs);
  }
  return cur;
}

/// Blocks through the i-th unity 1-subspace, punctured at coordinate i and
/// verified as a (partial or exact) spread of F_q^6.
inline CoverageReport spread_through_point_check(const DesignMultiset& d, int i,
                                                 VerifyMode mode = VerifyMode::packing,
                                                 int threads = 1) {
  if (d.n != 7) throw std::invalid_argument("spread_through_point_check: ambient must be F_q^7");
  if (i < 1 || i > 7) throw std::invalid_argument("spread_through_point_check: bad coordinate");
  const FieldSpec& f = *d.field;
  const Subspace point = span({unit_row(7, i)}, f, 7);
  DesignMultiset punctured(f, 6);
  for (const auto& [s, m] : d.blocks) {
    if (!contains_subspace(s, point)) continue;
    punctured.blocks[puncture(s, i)] += m;
  }
  return verify_steiner(punctured, 1, 2, mode, threads);
}

/// Per-prefix tallies behind the uniform-multiplicity argument: for each
/// leading-zero 1-subspace L, the blocks through L (Z1 excluded) are
/// 3-punctured to lines of F_q^4 and every nonzero prefix vector is counted.
/// In a full system every tally is q^2.
struct PrefixDistribution {
  struct PerPoint {
    Subspace point;                     // 1-subspace of the tail 3-space
    long long blocks_seen = 0;          // q^2 (q^2+1) in a full system
    std::map<Row, long long> tallies;   // nonzero prefix vector -> count
  };
  int expected = 0;  // q^2
  std::vector<PerPoint> points;
  std::vector<std::pair<Subspace, Row>> over_bound;  // tallies exceeding expected
};

inline PrefixDistribution prefix_distribution_check(const DesignMultiset& d) {
  if (d.n != 7)
    throw std::invalid_argument("prefix_distribution_check: design must live in F_q^7");
  const FieldSpec& f = *d.field;
  const ForcedBlocks z = forced_blocks(f.q);
  if (!d.blocks.count(z.z1))
    throw std::invalid_argument("prefix_distribution_check: Z1 must be present");

  PrefixDistribution out;
  out.expected = f.q * f.q;
  for (const Subspace& l : subspaces_of(z.z1, 1)) {
    PrefixDistribution::PerPoint pp;
    pp.point = l;
    for (const auto& [s, m] : d.blocks) {
      if (s == z.z1 || !contains_subspace(s, l)) continue;
      pp.blocks_seen += m;
      const Subspace line = puncture_multi(s, {5, 6, 7});
      // enumerate the nonzero vectors of the punctured line
      const FieldSpec& ff = f;
      const int dim = line.dim();
      std::vector<std::uint8_t> coef(dim, 0);
      while (true) {
        int j = 0;
        while (j < dim) {
          if (++coef[j] < ff.q) break;
          coef[j] = 0;
          ++j;
        }
        if (j == dim) break;
        std::vector<std::uint8_t> vec(4, 0);
        for (int i = 0; i < dim; ++i) {
          if (!coef[i]) continue;
          auto b = row_unpack(line.rows[i], 4);
          for (int c = 0; c < 4; ++c) vec[c] = ff.add(vec[c], ff.mul(coef[i], b[c]));
        }
        pp.tallies[row_pack(vec)] += m;
      }
    }
    for (const auto& [vec, cnt] : pp.tallies)
      if (cnt > out.expected) out.over_bound.emplace_back(l, vec);
    out.points.push_back(std::move(pp));
  }
  return out;
}

}  // namespace qsd
