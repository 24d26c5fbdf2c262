#pragma once

#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>
#include <boost/rational.hpp>

#include "qsd/parallel.hpp"
#include "qsd/puncture.hpp"
#include "qsd/subspace.hpp"

namespace qsd {

using Rational = boost::rational<Int>;

/// A multiset of subspaces of a common ambient space, keyed by canonical
/// basis, with positive multiplicities.
struct DesignMultiset {
  const FieldSpec* field = nullptr;
  int n = 0;
  std::map<Subspace, long long> blocks;

  DesignMultiset() = default;
  DesignMultiset(const FieldSpec& f, int ambient) : field(&f), n(ambient) {}

  void add(const Subspace& s, long long mult = 1) {
    if (mult <= 0) throw std::invalid_argument("design block multiplicity must be positive");
    if (s.field->q != field->q || s.n != n)
      throw std::invalid_argument("design block ambient mismatch");
    blocks[s] += mult;
  }

  long long multiplicity(const Subspace& s) const {
    auto it = blocks.find(s);
    return it == blocks.end() ? 0 : it->second;
  }

  long long total_size() const {
    long long t = 0;
    for (const auto& [s, m] : blocks) t += m;
    return t;
  }
};

inline DesignMultiset column_transform(const DesignMultiset& d, int j,
                                       const std::vector<std::uint8_t>& coeffs) {
  DesignMultiset out(*d.field, d.n);
  for (const auto& [s, m] : d.blocks) out.blocks[column_transform(s, j, coeffs)] += m;
  return out;
}

inline DesignMultiset column_swap(const DesignMultiset& d, int i, int j) {
  DesignMultiset out(*d.field, d.n);
  for (const auto& [s, m] : d.blocks) out.blocks[column_swap(s, i, j)] += m;
  return out;
}

inline DesignMultiset apply_linear(const DesignMultiset& d, const std::vector<Row>& a) {
  DesignMultiset out(*d.field, d.n);
  for (const auto& [s, m] : d.blocks) out.blocks[apply_linear(s, a)] += m;
  return out;
}

/// Coverage multiplicity of every t-subspace that is covered at least once.
/// Absent keys have count zero.
inline std::map<Subspace, long long> cover_count_map(const DesignMultiset& d, int t,
                                                     int threads = 1,
                                                     std::int64_t cap = kEnumCap) {
  Int incidences = 0;
  for (const auto& [s, m] : d.blocks)
    incidences += Int(m) * gaussian_binomial(s.dim(), t, d.field->q);
  if (incidences > cap)
    throw capacity_error("cover_count_map: " + incidences.str() +
                         " block/t-subspace incidences exceeds cap " + std::to_string(cap));

  std::vector<const std::pair<const Subspace, long long>*> items;
  items.reserve(d.blocks.size());
  for (const auto& kv : d.blocks) items.push_back(&kv);

  std::vector<std::map<Subspace, long long>> shard_maps(std::max<std::size_t>(
      1, std::min<std::size_t>(threads < 1 ? 1 : threads, items.size() ? items.size() : 1)));
  for_shards(items.size(), threads, [&](std::size_t b, std::size_t e, int shard) {
    auto& local = shard_maps[shard];
    for (std::size_t i = b; i < e; ++i) {
      const auto& [block, mult] = *items[i];
      for (const Subspace& x : subspaces_of(block, t)) local[x] += mult;
    }
  });
  std::map<Subspace, long long> counts;
  for (auto& local : shard_maps)
    for (auto& [x, c] : local) counts[x] += c;
  return counts;
}

enum class Verdict { exact_design, packing, violation };

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::exact_design: return "exact-design";
    case Verdict::packing: return "packing";
    case Verdict::violation: return "violation";
  }
  return "?";
}

enum class VerifyMode { exact, packing };

struct CoverageReport {
  int t = 0, k = 0;
  Verdict verdict = Verdict::violation;
  std::vector<Subspace> uncovered;                       // exact mode only
  std::vector<std::pair<Subspace, long long>> multiple;  // covered more than once
  std::vector<Subspace> dim_violations;                  // blocks of dimension != k

  bool ok(VerifyMode mode) const {
    return verdict == Verdict::exact_design ||
           (mode == VerifyMode::packing && verdict == Verdict::packing);
  }
};

/// Checks the defining coverage property: every t-subspace of the ambient
/// space lies in exactly one block (exact mode) or at most one (packing
/// mode). Exact mode enumerates the full Grassmannian to find gaps.
inline CoverageReport verify_steiner(const DesignMultiset& d, int t, int k,
                                     VerifyMode mode = VerifyMode::exact, int threads = 1,
                                     std::int64_t cap = kEnumCap) {
  if (t < 0 || k < t || k > d.n) throw std::invalid_argument("verify_steiner: bad parameters");
  CoverageReport rep;
  rep.t = t;
  rep.k = k;
  for (const auto& [s, m] : d.blocks)
    if (s.dim() != k) rep.dim_violations.push_back(s);
  auto counts = cover_count_map(d, t, threads);
  for (const auto& [x, c] : counts)
    if (c > 1) rep.multiple.emplace_back(x, c);
  if (mode == VerifyMode::exact) {
    const Int total = gaussian_binomial(d.n, t, d.field->q);
    if (total > cap)
      throw capacity_error("verify_steiner: G_q(" + std::to_string(d.n) + "," +
                           std::to_string(t) + ") exceeds enumeration cap");
    for (const Subspace& x : enumerate_grassmannian(d.n, t, *d.field, cap))
      if (!counts.count(x)) rep.uncovered.push_back(x);
  }
  if (!rep.multiple.empty() || !rep.dim_violations.empty())
    rep.verdict = Verdict::violation;
  else if (mode == VerifyMode::exact && rep.uncovered.empty())
    rep.verdict = Verdict::exact_design;
  else
    rep.verdict = Verdict::packing;
  return rep;
}

/// Divisibility conditions: [n-i t-i]_q / [k-i t-i]_q for 0 <= i <= t-1 must
/// all be integers. Returns the flag and the checked ratios.
inline std::pair<bool, std::vector<Rational>> admissible(int t, int k, int n, int q) {
  if (t <= 0 || k < t || n < k) throw std::invalid_argument("admissible: need 0 < t <= k <= n");
  std::vector<Rational> ratios;
  bool ok = true;
  for (int i = 0; i < t; ++i) {
    Rational r(gaussian_binomial(n - i, t - i, q), gaussian_binomial(k - i, t - i, q));
    ok = ok && r.denominator() == 1;
    ratios.push_back(std::move(r));
  }
  return {ok, ratios};
}

/// The derived design at a point: blocks through P, pushed to F_q^(n-1) by a
/// deterministic invertible substitution that sends P to the last unity
/// vector, followed by puncturing the last coordinate.
inline DesignMultiset derived_design(const DesignMultiset& d, int t, int k, const Subspace& p) {
  if (t < 2) throw std::invalid_argument("derived_design: need t >= 2");
  if (k < t || k > d.n) throw std::invalid_argument("derived_design: need t <= k <= n");
  if (p.dim() != 1 || p.n != d.n || p.field->q != d.field->q)
    throw std::invalid_argument("derived_design: P must be a 1-subspace of the ambient space");
  const FieldSpec& f = *d.field;
  const int n = d.n;

  // Basis completion: P's generator last, unit vectors greedily before it.
  std::vector<Row> basis;
  for (int c = 1; c <= n && static_cast<int>(basis.size()) < n - 1; ++c) {
    std::vector<Row> cand = basis;
    cand.push_back(unit_row(n, c));
    cand.push_back(p.rows[0]);
    if (span(cand, f, n).dim() == static_cast<int>(basis.size()) + 2)
      basis.push_back(unit_row(n, c));
  }
  basis.push_back(p.rows[0]);

  // Invert the basis matrix: v -> coordinates of v in `basis`, so that the
  // generator of P maps to e_n.
  std::vector<std::vector<std::uint8_t>> aug;
  for (int i = 0; i < n; ++i) {
    auto rowd = row_unpack(basis[i], n);
    std::vector<std::uint8_t> w(2 * n, 0);
    std::copy(rowd.begin(), rowd.end(), w.begin());
    w[n + i] = 1;
    aug.push_back(std::move(w));
  }
  detail::rref(aug, f);
  // aug is [I | B^-1]; the substitution matrix acts as v -> v * (B^-1).
  std::vector<Row> binv(n);
  for (int i = 0; i < n; ++i) binv[i] = row_pack({aug[i].begin() + n, aug[i].end()});

  DesignMultiset out(f, n - 1);
  for (const auto& [s, m] : d.blocks) {
    if (!contains_subspace(s, p)) continue;
    out.blocks[puncture(apply_linear(s, binv), n)] += m;
  }
  return out;
}

/// S_q(1,k,n) by field reduction: the 1-subspaces of F_{q^k}^(n/k) re-read as
/// k-subspaces of F_q^n through the polynomial basis of F_{q^k} over F_q.
/// Requires k | n and q^k a supported field order built over F_q itself.
inline DesignMultiset spread_field_reduction(int q, int k, int n) {
  if (k <= 0 || n % k != 0)
    throw std::invalid_argument("spread_field_reduction: k must divide n");
  int qk = 1;
  for (int i = 0; i < k; ++i) qk *= q;
  const FieldSpec& big = field_new(qk);  // throws for unsupported orders
  if (big.p != q)
    throw std::invalid_argument("spread_field_reduction: F_" + std::to_string(qk) +
                                " is not an extension of F_" + std::to_string(q));
  const FieldSpec& f = field_new(q);
  const int m = n / k;

  DesignMultiset out(f, n);
  for (const Subspace& w : enumerate_grassmannian(m, 1, big)) {
    auto gen = row_unpack(w.rows[0], m);
    std::vector<Row> rows;
    for (int i = 0; i < k; ++i) {
      // multiply the generator by the basis element x^i and expand digits
      int gi = 1;
      for (int j = 0; j < i; ++j) gi *= q;  // label of x^i
      std::vector<std::uint8_t> vec(n, 0);
      for (int c = 0; c < m; ++c) {
        const std::uint8_t prod = big.mul(static_cast<std::uint8_t>(gi), gen[c]);
        auto digits = detail::label_digits(prod, q, k);
        for (int dI = 0; dI < k; ++dI) vec[c * k + dI] = digits[dI];
      }
      rows.push_back(row_pack(vec));
    }
    out.add(span(rows, f, n));
  }
  return out;
}

namespace detail {

// One spread (partition of the point set) among `avail` lines, extending
// `picked`, in lexicographic line order; used with backtracking across
// spreads by parallelism_pg3. `steps` counts line placements across the
// whole run and trips the capacity guard at `step_budget`.
struct SpreadSearch {
  const std::vector<std::vector<int>>& line_points;  // per line: sorted point ids
  const std::vector<std::vector<int>>& point_lines;  // per point: sorted line ids
  int n_points;
  std::uint64_t step_budget;
  std::uint64_t steps = 0;

  // Enumerate spreads among available lines; calls sink(spread) for each in
  // lexicographic order until sink returns true (accepted). Returns true if
  // some call was accepted.
  bool enumerate(std::vector<char>& avail, const std::function<bool(const std::vector<int>&)>& sink) {
    std::vector<char> covered(n_points, 0);
    std::vector<int> picked;
    return dfs(avail, covered, picked, sink);
  }

 private:
  bool dfs(std::vector<char>& avail, std::vector<char>& covered, std::vector<int>& picked,
           const std::function<bool(const std::vector<int>&)>& sink) {
    int pt = -1;
    for (int i = 0; i < n_points; ++i)
      if (!covered[i]) {
        pt = i;
        break;
      }
    if (pt < 0) return sink(picked);
    for (int ln : point_lines[pt]) {
      if (!avail[ln]) continue;
      bool clash = false;
      for (int p2 : line_points[ln]) clash = clash || covered[p2];
      if (clash) continue;
      if (++steps > step_budget)
        throw capacity_error("parallelism search exceeded its step budget");
      for (int p2 : line_points[ln]) covered[p2] = 1;
      avail[ln] = 0;
      picked.push_back(ln);
      if (dfs(avail, covered, picked, sink)) return true;
      picked.pop_back();
      avail[ln] = 1;
      for (int p2 : line_points[ln]) covered[p2] = 0;
    }
    return false;
  }
};

}  // namespace detail

/// A parallelism of PG(3,q): q^2+q+1 pairwise disjoint spreads of lines
/// (2-subspaces of F_q^4), every line in exactly one spread. The first
/// spread is the field-reduction spread; the rest come from deterministic
/// lexicographic exact-cover search, first solution taken. Larger q is
/// rejected: plain exact-cover peeling does not terminate in reasonable
/// time at q=4 (500M placements exhausted without a solution).
inline std::vector<DesignMultiset> parallelism_pg3(int q) {
  if (q != 2 && q != 3)
    throw capacity_error("parallelism_pg3: q=" + std::to_string(q) + " outside search envelope");
  const FieldSpec& f = field_new(q);
  auto lines = enumerate_grassmannian(4, 2, f);
  auto points = enumerate_grassmannian(4, 1, f);
  const int nl = static_cast<int>(lines.size()), np = static_cast<int>(points.size());

  auto point_index = [&](const Subspace& s) {
    return static_cast<int>(std::lower_bound(points.begin(), points.end(), s) - points.begin());
  };
  std::vector<std::vector<int>> line_points(nl), point_lines(np);
  for (int i = 0; i < nl; ++i) {
    for (const Subspace& p : subspaces_of(lines[i], 1)) {
      const int pi = point_index(p);
      line_points[i].push_back(pi);
      point_lines[pi].push_back(i);
    }
    std::sort(line_points[i].begin(), line_points[i].end());
  }

  std::vector<char> avail(nl, 1);
  std::vector<std::vector<int>> spreads;

  // Forced first spread via field reduction.
  {
    std::vector<int> first;
    for (const auto& [s, m] : spread_field_reduction(q, 2, 4).blocks) {
      const int li =
          static_cast<int>(std::lower_bound(lines.begin(), lines.end(), s) - lines.begin());
      first.push_back(li);
      avail[li] = 0;
    }
    std::sort(first.begin(), first.end());
    spreads.push_back(std::move(first));
  }

  detail::SpreadSearch search{line_points, point_lines, np, 500'000'000};
  const std::size_t want = static_cast<std::size_t>(q * q + q + 1);
  std::function<bool()> complete = [&]() -> bool {
    if (spreads.size() == want) return true;
    return search.enumerate(avail, [&](const std::vector<int>& spread) {
      spreads.push_back(spread);
      if (complete()) return true;
      spreads.pop_back();
      return false;
    });
  };
  if (!complete())
    throw std::logic_error("parallelism_pg3: exhaustive search failed (this is a bug)");

  std::vector<DesignMultiset> out;
  for (const auto& spread : spreads) {
    DesignMultiset d(f, 4);
    for (int li : spread) d.add(lines[li]);
    out.push_back(std::move(d));
  }
  return out;
}

// ---------------------------------------------------------------------------
// QSD1 design files
//
//   QSD1 q=<q> n=<n>
//   B <multiplicity> <row_1> ... <row_k>     rows: canonical RREF, base-q digits
//   B <multiplicity> -                       the 0-subspace
//   # comment / blank lines ignored
// ---------------------------------------------------------------------------

inline void write_qsd1(std::ostream& os, const DesignMultiset& d,
                       const std::string& comment = "") {
  os << "QSD1 q=" << d.field->q << " n=" << d.n << "\n";
  if (!comment.empty()) os << "# " << comment << "\n";
  for (const auto& [s, m] : d.blocks) {
    os << "B " << m;
    if (s.rows.empty()) {
      os << " -";
    } else {
      for (Row r : s.rows) os << ' ' << row_format(r, d.n);
    }
    os << "\n";
  }
}

inline std::string to_qsd1(const DesignMultiset& d) {
  std::ostringstream ss;
  write_qsd1(ss, d);
  return ss.str();
}

inline DesignMultiset read_qsd1(std::istream& is) {
  std::string line;
  long lineno = 0;
  int q = 0, n = -1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream hs(line);
    std::string tag, qf, nf;
    hs >> tag >> qf >> nf;
    if (tag != "QSD1" || qf.rfind("q=", 0) != 0 || nf.rfind("n=", 0) != 0)
      throw parse_error("QSD1: bad header", lineno);
    q = std::stoi(qf.substr(2));
    n = std::stoi(nf.substr(2));
    break;
  }
  if (n < 0) throw parse_error("QSD1: missing header", lineno);
  const FieldSpec& f = field_new(q);
  DesignMultiset d(f, n);
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string tag;
    ls >> tag;
    if (tag != "B") throw parse_error("QSD1: expected block line", lineno);
    long long mult = 0;
    if (!(ls >> mult) || mult <= 0) throw parse_error("QSD1: bad multiplicity", lineno);
    std::vector<Row> rows;
    std::string tok;
    while (ls >> tok) {
      if (tok == "-") {
        if (!rows.empty()) throw parse_error("QSD1: '-' mixed with rows", lineno);
        break;
      }
      try {
        rows.push_back(row_parse(tok, f, n));
      } catch (const std::invalid_argument& e) {
        throw parse_error(std::string("QSD1: ") + e.what(), lineno);
      }
    }
    Subspace canonical = span(rows, f, n);
    if (canonical.rows != rows)
      throw parse_error("QSD1: rows are not a canonical reduced-row-echelon basis", lineno);
    d.blocks[canonical] += mult;
  }
  return d;
}

// ---------------------------------------------------------------------------
// QSP1 parallelism files: a QSD1-style header, then `S <index>` separators,
// each followed by the spread's lines as `B 1 <row> <row>`.
// ---------------------------------------------------------------------------

inline void write_qsp1(std::ostream& os, const std::vector<DesignMultiset>& spreads) {
  if (spreads.empty()) throw std::invalid_argument("write_qsp1: empty parallelism");
  os << "QSP1 q=" << spreads[0].field->q << " n=" << spreads[0].n << "\n";
  for (std::size_t i = 0; i < spreads.size(); ++i) {
    os << "S " << i << "\n";
    for (const auto& [s, m] : spreads[i].blocks)
      for (long long j = 0; j < m; ++j) {
        os << "B 1";
        for (Row r : s.rows) os << ' ' << row_format(r, spreads[i].n);
        os << "\n";
      }
  }
}

inline std::vector<DesignMultiset> read_qsp1(std::istream& is) {
  std::string line;
  long lineno = 0;
  int q = 0, n = -1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream hs(line);
    std::string tag, qf, nf;
    hs >> tag >> qf >> nf;
    if (tag != "QSP1" || qf.rfind("q=", 0) != 0 || nf.rfind("n=", 0) != 0)
      throw parse_error("QSP1: bad header", lineno);
    q = std::stoi(qf.substr(2));
    n = std::stoi(nf.substr(2));
    break;
  }
  if (n < 0) throw parse_error("QSP1: missing header", lineno);
  const FieldSpec& f = field_new(q);
  std::vector<DesignMultiset> spreads;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string tag;
    ls >> tag;
    if (tag == "S") {
      spreads.emplace_back(f, n);
      continue;
    }
    if (tag != "B" || spreads.empty())
      throw parse_error("QSP1: expected 'S' or block line", lineno);
    long long mult;
    if (!(ls >> mult) || mult != 1) throw parse_error("QSP1: spread lines need multiplicity 1", lineno);
    std::vector<Row> rows;
    std::string tok;
    while (ls >> tok) {
      try {
        rows.push_back(row_parse(tok, f, n));
      } catch (const std::invalid_argument& e) {
        throw parse_error(std::string("QSP1: ") + e.what(), lineno);
      }
    }
    Subspace canonical = span(rows, f, n);
    if (canonical.rows != rows)
      throw parse_error("QSP1: rows are not a canonical reduced-row-echelon basis", lineno);
    spreads.back().blocks[canonical] += 1;
  }
  return spreads;
}

}  // namespace qsd
