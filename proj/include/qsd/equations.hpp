#pragma once

#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "qsd/design.hpp"
#include "qsd/parallel.hpp"
#include "qsd/puncture.hpp"

namespace qsd {

/// Parameters of a p-punctured system with k = t+1: blocks live in F_q^m,
/// m = n - p, and every t-subspace of F_q^n must arise exactly once by
/// extending the blocks p times.
struct PuncturedParams {
  int q = 0;
  int t = 0;
  int k = 0;  // always t + 1
  int n = 0;
  int p = 0;
  int m = 0;  // n - p

  static PuncturedParams make(int q, int n, int p, int t) {
    PuncturedParams pp{q, t, t + 1, n, p, n - p};
    if (p < 1 || p > n - 1) throw std::invalid_argument("punctured params: need 1 <= p <= n-1");
    if (t < 1 || t + 1 > n) throw std::invalid_argument("punctured params: need 1 <= t < n");
    field_new(q);
    return pp;
  }

  int s_min() const { return std::max(0, t - p); }
  int s_max() const { return std::min(t, m); }
  int r_min(int s) const { return std::max(s, std::max(0, k - p)); }
  int r_max(int s) const { return std::min(s + 1, m); }
};

/// Coverage constraint for one s-subspace X of F_q^m: sum over r-subspaces
/// Y >= X of coefficient * multiplicity(Y) must equal rhs. Terms with zero
/// coefficient are omitted.
struct Equation {
  Subspace x;
  long long rhs = 0;
  std::vector<std::pair<Subspace, long long>> terms;  // (Y, coefficient), canonical order
};

struct EquationSystem {
  PuncturedParams params;
  std::vector<Equation> equations;   // ordered by (dim X, X)
  std::vector<Subspace> variables;   // all r-subspaces for r in the union of ranges
};

/// How many t-subspaces of a k-dimensional p-fold extension K of Y puncture
/// down to X. K is the first extension in canonical order; the value is
/// independent of the choice (see coefficient_well_defined).
inline long long coefficient(const Subspace& x, const Subspace& y, const PuncturedParams& pp) {
  if (!contains_subspace(y, x)) throw std::invalid_argument("coefficient: X is not contained in Y");
  if (y.dim() < pp.k - pp.p || y.dim() > pp.k)
    throw std::invalid_argument("coefficient: no k-dimensional p-fold extension of Y exists");
  auto exts = enumerate_p_extensions(y, pp.p, pp.k);
  const Subspace& kext = exts.front();
  std::vector<int> last(pp.p);
  for (int i = 0; i < pp.p; ++i) last[i] = pp.m + 1 + i;
  long long cnt = 0;
  for (const Subspace& tsub : subspaces_of(kext, pp.t))
    if (puncture_multi(tsub, last) == x) ++cnt;
  return cnt;
}

/// Audits that coefficient(X, Y) does not depend on which extension K is
/// used. Runs the brute-force count over every K.
inline bool coefficient_well_defined(const Subspace& x, const Subspace& y,
                                     const PuncturedParams& pp) {
  std::vector<int> last(pp.p);
  for (int i = 0; i < pp.p; ++i) last[i] = pp.m + 1 + i;
  std::optional<long long> first;
  for (const Subspace& kext : enumerate_p_extensions(y, pp.p, pp.k)) {
    long long cnt = 0;
    for (const Subspace& tsub : subspaces_of(kext, pp.t))
      if (puncture_multi(tsub, last) == x) ++cnt;
    if (!first)
      first = cnt;
    else if (*first != cnt)
      return false;
  }
  return true;
}

/// Right-hand side of the equation for X: the number of t-subspaces of
/// F_q^n whose p-fold puncture equals X.
inline long long equation_rhs(const Subspace& x, const PuncturedParams& pp) {
  return static_cast<long long>(enumerate_p_extensions(x, pp.p, pp.t).size());
}

/// The full coverage equation system for the given parameters, with
/// deterministic (canonical lexicographic) equation, variable and term order.
inline EquationSystem build_equation_system(const PuncturedParams& pp, int threads = 1,
                                            std::int64_t cap = kEnumCap) {
  const FieldSpec& f = field_new(pp.q);
  EquationSystem sys{pp, {}, {}};

  std::map<Subspace, std::size_t> eq_index;
  for (int s = pp.s_min(); s <= pp.s_max(); ++s)
    for (const Subspace& x : enumerate_grassmannian(pp.m, s, f, cap)) {
      eq_index.emplace(x, sys.equations.size());
      sys.equations.push_back(Equation{x, 0, {}});
    }

  int r_lo = pp.m + 1, r_hi = -1;
  for (int s = pp.s_min(); s <= pp.s_max(); ++s) {
    r_lo = std::min(r_lo, pp.r_min(s));
    r_hi = std::max(r_hi, pp.r_max(s));
  }
  for (int r = r_lo; r <= r_hi; ++r)
    for (Subspace& y : enumerate_grassmannian(pp.m, r, f, cap)) sys.variables.push_back(y);

  // Terms: one pass over the variables; each Y contributes to the equations
  // of its own s-subspaces with s in [r-1, r].
  std::vector<std::vector<std::pair<std::size_t, std::pair<Subspace, long long>>>> shard_terms(
      std::max(1, threads));
  for_shards(sys.variables.size(), threads, [&](std::size_t b, std::size_t e, int shard) {
    auto& local = shard_terms[shard];
    for (std::size_t i = b; i < e; ++i) {
      const Subspace& y = sys.variables[i];
      const int r = y.dim();
      for (int s = std::max(pp.s_min(), r - 1); s <= std::min(pp.s_max(), r); ++s) {
        if (r < pp.r_min(s) || r > pp.r_max(s)) continue;
        for (const Subspace& x : subspaces_of(y, s)) {
          const long long c = coefficient(x, y, pp);
          if (c > 0) local.emplace_back(eq_index.at(x), std::make_pair(y, c));
        }
      }
    }
  });
  for (auto& local : shard_terms)
    for (auto& [ei, term] : local) sys.equations[ei].terms.push_back(std::move(term));
  for (auto& eq : sys.equations) std::sort(eq.terms.begin(), eq.terms.end());

  std::vector<long long> rhs(sys.equations.size());
  for_shards(sys.equations.size(), threads, [&](std::size_t b, std::size_t e, int) {
    for (std::size_t i = b; i < e; ++i) rhs[i] = equation_rhs(sys.equations[i].x, pp);
  });
  for (std::size_t i = 0; i < sys.equations.size(); ++i) sys.equations[i].rhs = rhs[i];
  return sys;
}

/// Per-dimension multiplicity vector of a uniform punctured design:
/// entry r is the number of 0-subspaces (r = 0) or the multiplicity of
/// every r-subspace (r >= 1).
struct UniformSolution {
  int m = 0;
  std::vector<long long> x;  // size min(m, k) + 1

  long long of_dim(int r) const {
    return (r >= 0 && r < static_cast<int>(x.size())) ? x[r] : 0;
  }
};

inline Int uniform_total(const PuncturedParams& pp, const UniformSolution& u) {
  Int total = 0;
  for (int r = 0; r < static_cast<int>(u.x.size()); ++r)
    total += Int(u.x[r]) * gaussian_binomial(pp.m, r, pp.q);
  return total;
}

struct EquationViolation {
  std::size_t index;
  Subspace x;
  long long lhs, rhs;
};

struct SolutionReport {
  bool consistent = true;
  std::size_t equations_checked = 0;
  std::vector<EquationViolation> violations;
  // blocks whose dimension cannot arise by p-fold puncturing of a k-subspace
  std::vector<Subspace> invalid_blocks;
};

/// Evaluates every equation against a multiset (absent subspaces count 0)
/// or a uniform vector.
inline SolutionReport check_solution(const EquationSystem& sys,
                                     const std::variant<const DesignMultiset*,
                                                        const UniformSolution*>& assignment,
                                     int threads = 1) {
  SolutionReport rep;
  if (std::holds_alternative<const DesignMultiset*>(assignment)) {
    const DesignMultiset* d = std::get<const DesignMultiset*>(assignment);
    if (d->field->q != sys.params.q || d->n != sys.params.m)
      throw std::invalid_argument("check_solution: assignment ambient mismatch");
    const int lo = std::max(0, sys.params.k - sys.params.p);
    const int hi = std::min(sys.params.k, sys.params.m);
    for (const auto& [s, m] : d->blocks)
      if (s.dim() < lo || s.dim() > hi) rep.invalid_blocks.push_back(s);
  }
  auto mult_of = [&](const Subspace& y) -> long long {
    if (std::holds_alternative<const DesignMultiset*>(assignment))
      return std::get<const DesignMultiset*>(assignment)->multiplicity(y);
    return std::get<const UniformSolution*>(assignment)->of_dim(y.dim());
  };

  std::vector<std::vector<EquationViolation>> shard_viol(std::max(1, threads));
  for_shards(sys.equations.size(), threads, [&](std::size_t b, std::size_t e, int shard) {
    for (std::size_t i = b; i < e; ++i) {
      const Equation& eq = sys.equations[i];
      long long lhs = 0;
      for (const auto& [y, c] : eq.terms) lhs += c * mult_of(y);
      if (lhs != eq.rhs) shard_viol[shard].push_back({i, eq.x, lhs, eq.rhs});
    }
  });
  rep.equations_checked = sys.equations.size();
  for (auto& local : shard_viol)
    for (auto& v : local) rep.violations.push_back(std::move(v));
  std::sort(rep.violations.begin(), rep.violations.end(),
            [](const EquationViolation& a, const EquationViolation& b) { return a.index < b.index; });
  rep.consistent = rep.violations.empty() && rep.invalid_blocks.empty();
  return rep;
}

/// Assembles the 2-punctured system over F_q^5 from a parallelism of the
/// lines of F_q^4:
///   (a) each 3-subspace of F_q^4: all q^3 same-dimension extensions, each
///       q(q-1) times;
///   (b) each line in a spread of A (|A| = q^2 spreads): its unique up-dim
///       extension, q^2 times;
///   (c) each line in a spread of B (the remaining q+1): all q^2
///       same-dimension extensions, once each;
///   (d) the 0-subspace block: its up-dim extension (the 1-subspace on the
///       new coordinate), once.
inline DesignMultiset construct_s237_5(int q, const std::vector<DesignMultiset>& parallelism,
                                       const std::set<int>& a_indices) {
  const FieldSpec& f = field_new(q);
  const std::size_t want_spreads = static_cast<std::size_t>(q * q + q + 1);
  if (parallelism.size() != want_spreads)
    throw std::invalid_argument("construct_s237_5: parallelism must have q^2+q+1 spreads");
  {
    DesignMultiset all(f, 4);
    for (const auto& sp : parallelism) {
      if (sp.field->q != q || sp.n != 4)
        throw std::invalid_argument("construct_s237_5: spreads must live in F_q^4");
      for (const auto& [s, m] : sp.blocks) {
        if (s.dim() != 2) throw std::invalid_argument("construct_s237_5: spread blocks must be lines");
        all.blocks[s] += m;
      }
    }
    auto rep = verify_steiner(all, 2, 2, VerifyMode::exact);
    if (rep.verdict != Verdict::exact_design)
      throw std::invalid_argument("construct_s237_5: spreads do not partition the lines of F_q^4");
  }
  if (static_cast<int>(a_indices.size()) != q * q)
    throw std::invalid_argument("construct_s237_5: need exactly q^2 spread indices in A");
  for (int i : a_indices)
    if (i < 0 || i >= static_cast<int>(parallelism.size()))
      throw std::invalid_argument("construct_s237_5: A index out of range");

  DesignMultiset out(f, 5);
  const long long mult_a = static_cast<long long>(q) * q;
  const long long mult_top = static_cast<long long>(q) * (q - 1);

  for (const Subspace& x : enumerate_grassmannian(4, 3, f))
    for (const Subspace& y : extensions_same_dim(x)) out.add(y, mult_top);

  for (std::size_t i = 0; i < parallelism.size(); ++i) {
    const bool in_a = a_indices.count(static_cast<int>(i)) > 0;
    for (const auto& [line, m] : parallelism[i].blocks) {
      if (in_a) {
        out.add(extension_up_dim(line), mult_a);
      } else {
        for (const Subspace& y : extensions_same_dim(line)) out.add(y, 1);
      }
    }
  }

  out.add(extension_up_dim(zero_space(f, 4)), 1);
  return out;
}

/// Builds the coverage system for the parameters and checks D against it.
inline SolutionReport verify_punctured(const DesignMultiset& d, const PuncturedParams& pp,
                                       int threads = 1) {
  if (d.field->q != pp.q || d.n != pp.m)
    throw std::invalid_argument("verify_punctured: design ambient mismatch");
  EquationSystem sys = build_equation_system(pp, threads);
  return check_solution(sys, &d, threads);
}

// ---------------------------------------------------------------------------
// QEQ1 equation-system files: header, then one `E` row per equation.
//
//   QEQ1 q=<q> n=<n> p=<p> t=<t>
//   E <X-key> <rhs> <Y-key>:<coef> ...
//
// Keys are canonical rows joined with ','; "-" is the 0-subspace.
// ---------------------------------------------------------------------------

inline void write_qeq1(std::ostream& os, const EquationSystem& sys) {
  const auto& pp = sys.params;
  os << "QEQ1 q=" << pp.q << " n=" << pp.n << " p=" << pp.p << " t=" << pp.t << "\n";
  for (const auto& eq : sys.equations) {
    os << "E " << eq.x.key() << ' ' << eq.rhs;
    for (const auto& [y, c] : eq.terms) os << ' ' << y.key() << ':' << c;
    os << "\n";
  }
}

/// Human-oriented listing, one constraint per line.
inline void write_equations_lp(std::ostream& os, const EquationSystem& sys) {
  const auto& pp = sys.params;
  os << "\\ coverage equations for q=" << pp.q << " n=" << pp.n << " p=" << pp.p
     << " t=" << pp.t << " (m=" << pp.m << ")\n";
  for (const auto& eq : sys.equations) {
    bool first = true;
    for (const auto& [y, c] : eq.terms) {
      if (!first) os << " + ";
      first = false;
      if (c != 1) os << c << ' ';
      os << "x[" << y.key() << "]";
    }
    if (first) os << "0";
    os << " = " << eq.rhs << "\n";
  }
}

inline Subspace parse_key(const std::string& key, const FieldSpec& f, int n) {
  std::vector<Row> rows;
  if (key != "-") {
    std::size_t pos = 0;
    while (pos <= key.size()) {
      const std::size_t comma = key.find(',', pos);
      const std::string tok =
          key.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
      rows.push_back(row_parse(tok, f, n));
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
  }
  Subspace s = span(rows, f, n);
  if (s.rows != rows) throw std::invalid_argument("subspace key is not canonical: " + key);
  return s;
}

inline EquationSystem read_qeq1(std::istream& is) {
  std::string line;
  long lineno = 0;
  std::optional<PuncturedParams> pp;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream hs(line);
    std::string tag, qf, nf, pf, tf;
    hs >> tag >> qf >> nf >> pf >> tf;
    if (tag != "QEQ1" || qf.rfind("q=", 0) != 0 || nf.rfind("n=", 0) != 0 ||
        pf.rfind("p=", 0) != 0 || tf.rfind("t=", 0) != 0)
      throw parse_error("QEQ1: bad header", lineno);
    pp = PuncturedParams::make(std::stoi(qf.substr(2)), std::stoi(nf.substr(2)),
                               std::stoi(pf.substr(2)), std::stoi(tf.substr(2)));
    break;
  }
  if (!pp) throw parse_error("QEQ1: missing header", lineno);
  const FieldSpec& f = field_new(pp->q);
  EquationSystem sys{*pp, {}, {}};
  std::set<Subspace> vars;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string tag, xkey;
    long long rhs;
    ls >> tag >> xkey >> rhs;
    if (tag != "E" || ls.fail()) throw parse_error("QEQ1: expected equation row", lineno);
    Equation eq;
    try {
      eq.x = parse_key(xkey, f, pp->m);
      eq.rhs = rhs;
      std::string term;
      while (ls >> term) {
        const std::size_t colon = term.rfind(':');
        if (colon == std::string::npos) throw std::invalid_argument("missing ':' in term");
        Subspace y = parse_key(term.substr(0, colon), f, pp->m);
        const long long c = std::stoll(term.substr(colon + 1));
        vars.insert(y);
        eq.terms.emplace_back(std::move(y), c);
      }
    } catch (const std::invalid_argument& e) {
      throw parse_error(std::string("QEQ1: ") + e.what(), lineno);
    }
    sys.equations.push_back(std::move(eq));
  }
  sys.variables.assign(vars.begin(), vars.end());
  return sys;
}

}  // namespace qsd
