// Acceptance suite: one pass/fail line per criterion, exact tolerances,
// wall-clock limits enforced. Exits nonzero if any criterion fails.
//
// The central object of this problem area, a full S_q(2,3,7), is not known
// to exist; nothing here claims to build one. Full-system quantities appear
// only as closed-form audits and as bounds/targets on partial systems.

#include <chrono>
#include <cstdio>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "qsd/design.hpp"
#include "qsd/equations.hpp"
#include "qsd/search.hpp"
#include "qsd/structure.hpp"

using namespace qsd;
using Clock = std::chrono::steady_clock;

namespace {

int g_failures = 0;

struct Criterion {
  Criterion(const char* id_, const char* summary_, double limit)
      : id(id_), summary(summary_), limit_seconds(limit) {}

  const char* id;
  const char* summary;
  double limit_seconds;
  bool ok = true;
  std::string detail;
  Clock::time_point start = Clock::now();

  void check(bool cond, const std::string& what) {
    if (!cond) {
      ok = false;
      if (!detail.empty()) detail += "; ";
      detail += what;
    }
  }

  ~Criterion() {
    const double secs =
        std::chrono::duration<double>(Clock::now() - start).count();
    if (limit_seconds > 0 && secs > limit_seconds) {
      ok = false;
      if (!detail.empty()) detail += "; ";
      detail += "over time limit";
    }
    std::printf("[%s] %s: %s (%.2fs%s)\n", ok ? "PASS" : "FAIL", id, summary, secs,
                detail.empty() ? "" : ("; " + detail).c_str());
    std::fflush(stdout);
    if (!ok) ++g_failures;
  }
};

Subspace random_subspace(const FieldSpec& f, int n, int max_rows, std::mt19937_64& rng) {
  std::vector<Row> rows;
  const int nr = static_cast<int>(rng() % (max_rows + 1));
  for (int i = 0; i < nr; ++i) {
    Row r = 0;
    for (int c = 1; c <= n; ++c) r = row_put(r, n, c, static_cast<int>(rng() % f.q));
    rows.push_back(r);
  }
  return span(rows, f, n);
}

void criterion1() {
  Criterion c{"C1", "counting layer: Gaussian coefficients and enumeration counts", 120};
  c.check(gaussian_binomial(7, 2, 2) == 2667, "[7 2]_2");
  c.check(gaussian_binomial(3, 2, 2) == 7, "[3 2]_2");
  c.check(gaussian_binomial(7, 2, 2) / gaussian_binomial(3, 2, 2) == 381, "block count 381");
  const FieldSpec& f2 = field_new(2);
  for (int n = 0; n <= 7; ++n)
    for (int k = 0; k <= n; ++k)
      c.check(Int(enumerate_grassmannian(n, k, f2).size()) == gaussian_binomial(n, k, 2),
              "count q=2 n=" + std::to_string(n) + " k=" + std::to_string(k));
  const FieldSpec& f3 = field_new(3);
  for (int n = 0; n <= 5; ++n)
    for (int k = 0; k <= n; ++k)
      c.check(Int(enumerate_grassmannian(n, k, f3).size()) == gaussian_binomial(n, k, 3),
              "count q=3 n=" + std::to_string(n) + " k=" + std::to_string(k));
}

void criterion2() {
  Criterion c{"C2", "extension counts: q^t same-dim extensions, unique up-extension", 0};
  std::mt19937_64 rng(20250809);
  int done = 0;
  for (int q : {2, 3, 4}) {
    const FieldSpec& f = field_new(q);
    for (int i = 0; i < 500; ++i, ++done) {
      const int n = 2 + static_cast<int>(rng() % 4);
      Subspace s = random_subspace(f, n, 3, rng);
      auto exts = extensions_same_dim(s);
      long long expect = 1;
      for (int j = 0; j < s.dim(); ++j) expect *= q;
      std::set<Subspace> uniq(exts.begin(), exts.end());
      c.check(static_cast<long long>(exts.size()) == expect, "extension count");
      c.check(static_cast<long long>(uniq.size()) == expect, "extension distinctness");
      for (const auto& e : exts)
        c.check(puncture(e, n + 1) == s, "extension round trip");
    }
  }
  c.check(done == 1500, "sample size");
  // up-extension uniqueness, exhaustive for n <= 4
  for (int q : {2, 3, 4}) {
    const FieldSpec& f = field_new(q);
    for (int n = 1; n <= 4; ++n)
      for (int t = 0; t <= n; ++t)
        for (const Subspace& x : enumerate_grassmannian(n, t, f)) {
          const Subspace up = extension_up_dim(x);
          long long found = 0;
          bool match = true;
          for (const Subspace& y : enumerate_grassmannian(n + 1, t + 1, f))
            if (puncture(y, n + 1) == x) {
              ++found;
              match = match && (y == up);
            }
          c.check(found == 1 && match, "up-extension uniqueness");
        }
  }
}

void criterion3() {
  Criterion c{"C3", "3-fold puncture fibers partition G_2(7,2); zero fiber has size 7", 60};
  const FieldSpec& f = field_new(2);
  c.check(enumerate_p_extensions(zero_space(f, 4), 3, 2).size() == 7, "zero fiber");
  std::set<Subspace> seen;
  long long total = 0;
  for (int d = 0; d <= 2; ++d)
    for (const Subspace& base : enumerate_grassmannian(4, d, f)) {
      for (const Subspace& t : enumerate_p_extensions(base, 3, 2)) {
        c.check(seen.insert(t).second, "fiber overlap");
        c.check(puncture_multi(t, {5, 6, 7}) == base, "fiber membership");
        ++total;
      }
    }
  c.check(total == 2667, "fiber union size");
}

void criterion4() {
  Criterion c{"C4", "coverage equations: shape, well-definedness, uniform solutions", 300};
  auto pp2 = PuncturedParams::make(2, 7, 3, 2);
  EquationSystem sys2 = build_equation_system(pp2);
  c.check(sys2.equations.size() == 51, "equation count");
  c.check(sys2.variables.size() == 66, "variable count");

  const FieldSpec& f2 = field_new(2);
  for (int r = 0; r <= 3; ++r)
    for (const Subspace& y : enumerate_grassmannian(4, r, f2))
      for (int s = std::max(0, r - 1); s <= std::min(2, r); ++s)
        for (const Subspace& x : subspaces_of(y, s))
          c.check(coefficient_well_defined(x, y, pp2), "well-definedness q=2 m=4");

  UniformSolution u2{4, {1, 0, 4, 16}};
  c.check(check_solution(sys2, &u2).consistent, "uniform (1,0,4,16)");

  auto pp3 = PuncturedParams::make(3, 7, 3, 2);
  EquationSystem sys3 = build_equation_system(pp3);
  UniformSolution u3{4, {1, 0, 9, 162}};  // (1, 0, q^2, q^4 (q-1))
  c.check(check_solution(sys3, &u3).consistent, "uniform q=3");
}

void criterion5() {
  Criterion c{"C5", "2-punctured construction: 381 = 240+80+60+1, equation-checked", 600};
  auto spreads2 = parallelism_pg3(2);
  auto pp = PuncturedParams::make(2, 7, 2, 2);
  EquationSystem sys = build_equation_system(pp);

  const std::vector<std::set<int>> splits = {{0, 1, 2, 3}, {3, 4, 5, 6}, {0, 2, 4, 6}};
  for (const auto& a : splits) {
    DesignMultiset d = construct_s237_5(2, spreads2, a);
    c.check(d.total_size() == 381, "total size");
    long long dim3_top = 0, dim3_up = 0, dim2 = 0, dim1 = 0;
    for (const auto& [s, m] : d.blocks) {
      if (s.dim() == 3 && contains(s, unit_row(5, 5)))
        dim3_up += m;
      else if (s.dim() == 3)
        dim3_top += m;
      else if (s.dim() == 2)
        dim2 += m;
      else
        dim1 += m;
    }
    c.check(dim3_top == 240 && dim3_up == 80 && dim2 == 60 && dim1 == 1, "composition");
    c.check(check_solution(sys, &d).consistent, "p=2 consistency");
  }

  // q = 3: exact size, and the full m=5 verification fits the budget
  auto spreads3 = parallelism_pg3(3);
  std::set<int> a3;
  for (int i = 0; i < 9; ++i) a3.insert(i);
  DesignMultiset d3 = construct_s237_5(3, spreads3, a3);
  c.check(d3.total_size() == 7651, "q=3 size");
  c.check(verify_punctured(d3, PuncturedParams::make(3, 7, 2, 2)).consistent,
          "q=3 full m=5 verification");
}

void criterion6() {
  {
    Criterion c{"C6a", "parallelism of PG(3,2): 7 spreads x 5 lines", 1};
    auto spreads = parallelism_pg3(2);
    c.check(spreads.size() == 7, "spread count");
    DesignMultiset all(field_new(2), 4);
    for (const auto& sp : spreads) {
      c.check(sp.total_size() == 5, "spread size");
      c.check(verify_steiner(sp, 1, 2).verdict == Verdict::exact_design, "spread exactness");
      for (const auto& [s, m] : sp.blocks) all.blocks[s] += m;
    }
    c.check(all.total_size() == 35, "line partition");
    for (const auto& [s, m] : all.blocks) c.check(m == 1, "line multiplicity");
  }
  {
    Criterion c{"C6b", "parallelism of PG(3,3): 13 spreads x 10 lines", 600};
    auto spreads = parallelism_pg3(3);
    c.check(spreads.size() == 13, "spread count");
    DesignMultiset all(field_new(3), 4);
    for (const auto& sp : spreads) {
      c.check(sp.total_size() == 10, "spread size");
      c.check(verify_steiner(sp, 1, 2).verdict == Verdict::exact_design, "spread exactness");
      for (const auto& [s, m] : sp.blocks) all.blocks[s] += m;
    }
    c.check(all.total_size() == 130, "line partition");
    for (const auto& [s, m] : all.blocks) c.check(m == 1, "line multiplicity");
  }
}

void criterion7() {
  Criterion c{"C7", "structure audit: exact census and the census identity", 0};
  StructureAudit a = audit_formulas(2);
  c.check(a.sizeA == 140 && a.sizeB == 140 && a.sizeAB == 49 && a.sizeAonly == 91 &&
              a.residual == 148 && a.total == 381,
          "q=2 census");
  for (int q = 2; q <= 9; ++q) c.check(audit_formulas(q).identity_holds(), "identity");
}

void criterion8() {
  Criterion c{"C8", "normalizations force Z2/Z3, preserve verdicts, idempotent", 0};
  const FieldSpec& f = field_new(2);
  ForcedBlocks z = forced_blocks(2);
  auto prob = build_packing_problem(2);
  std::mt19937_64 rng(424242);

  for (int iter = 0; iter < 50; ++iter) {
    PackingState st = initial_state(prob, {z.z1, z.z2}, 900 + iter);
    DesignMultiset base = extend_packing(st, 30 + rng() % 90, Strategy::greedy).to_design();
    // gauge the tail columns so Z2 moves to a generic witness; Z1 is fixed
    DesignMultiset gauged = base;
    for (int j = 5; j <= 7; ++j) {
      std::vector<std::uint8_t> coeffs(7, 0);
      coeffs[j - 1] = 1;
      for (int i = 0; i < 3; ++i) coeffs[i] = static_cast<std::uint8_t>(rng() % 2);
      gauged = column_transform(gauged, j, coeffs);
    }
    const auto before = verify_steiner(gauged, 2, 3, VerifyMode::packing).verdict;
    DesignMultiset norm = normalize_z1_z2(gauged);
    c.check(norm.multiplicity(z.z1) == 1 && norm.multiplicity(z.z2) == 1, "z1/z2 forced");
    c.check(verify_steiner(norm, 2, 3, VerifyMode::packing).verdict == before,
            "verdict preserved");
    c.check(normalize_z1_z2(norm).blocks == norm.blocks, "idempotent");
  }

  for (int iter = 0; iter < 50; ++iter) {
    PackingState st = initial_state(prob, {z.z1, z.z3}, 1900 + iter);
    DesignMultiset base = extend_packing(st, 30 + rng() % 90, Strategy::greedy).to_design();
    DesignMultiset gauged = base;
    for (int step = 0; step < 4; ++step) {
      const int j = 5 + static_cast<int>(rng() % 3);
      const int i = (step % 2) ? 3 + static_cast<int>(rng() % 2)
                               : 5 + static_cast<int>(rng() % 3);
      if (i == j) continue;
      std::vector<std::uint8_t> coeffs(7, 0);
      coeffs[j - 1] = 1;
      coeffs[i - 1] = 1;
      gauged = column_transform(gauged, j, coeffs);
    }
    const auto before = verify_steiner(gauged, 2, 3, VerifyMode::packing).verdict;
    DesignMultiset norm = normalize_z1_z3(gauged);
    c.check(norm.multiplicity(z.z1) == 1 && norm.multiplicity(z.z3) == 1, "z1/z3 forced");
    c.check(verify_steiner(norm, 2, 3, VerifyMode::packing).verdict == before,
            "verdict preserved");
    c.check(normalize_z1_z3(norm).blocks == norm.blocks, "idempotent");
  }
}

void criterion9() {
  Criterion c{"C9", "search regression: determinism, pinned floors, A-union-B targets", 0};
  auto prob = build_packing_problem(2);
  ForcedBlocks z = forced_blocks(2);
  PackingState st = initial_state(prob, {z.z1, z.z2}, 0);

  // pinned floor: greedy, seed 0, budget 10^6 nodes reaches 253 blocks
  // (measured once on this code; target floor is 200)
  PackingState g1 = extend_packing(st, 1'000'000, Strategy::greedy);
  PackingState g2 = extend_packing(st, 1'000'000, Strategy::greedy);
  c.check(g1.stats.best_size >= 200, "target floor 200");
  c.check(g1.stats.best_size >= 253, "pinned greedy floor 253");
  c.check(recheck_coverage(g1), "coverage recount");
  {
    std::ostringstream a, b;
    write_qsd1(a, g1.to_design());
    write_qsd1(b, g2.to_design());
    c.check(a.str() == b.str(), "greedy byte-identical across runs");
  }

  // dlx-first: byte-identical across runs and thread counts at a pinned budget
  PackingState d1 = extend_packing(st, 20'000, Strategy::dlx_first, 1);
  PackingState d4 = extend_packing(st, 20'000, Strategy::dlx_first, 4);
  PackingState d1b = extend_packing(st, 20'000, Strategy::dlx_first, 1);
  c.check(recheck_coverage(d1), "dlx coverage recount");
  c.check(d1.stats.best_size >= 253, "pinned dlx-first floor");
  {
    std::ostringstream a, b, e;
    write_qsd1(a, d1.to_design());
    write_qsd1(b, d4.to_design());
    write_qsd1(e, d1b.to_design());
    c.check(a.str() == b.str(), "dlx byte-identical across thread counts");
    c.check(a.str() == e.str(), "dlx byte-identical across runs");
  }

  // A-union-B families: progress toward 231, never above it
  auto [fam, rep] = build_ab_candidates(2, 100'000, 0, Strategy::greedy);
  c.check(rep.target_non_z == 231, "target 231");
  c.check(rep.non_z_size <= 231, "never exceeds the target");
  c.check(rep.non_z_size >= 182, "pinned ab progress 182");
  c.check(rep.ab_class <= 49, "A-cap-B within 49");
  c.check(no_double_special(fam.to_design()).empty(), "no double special");
  c.check(verify_steiner(fam.to_design(), 2, 3, VerifyMode::packing).verdict ==
              Verdict::packing,
          "family is a packing");
}

void criterion10() {
  Criterion c{"C10", "no criterion claims a full S_q(2,3,7); bounds and audits only", 0};
  // The largest object this suite builds is a partial packing: strictly
  // fewer than the 381 blocks a full q-Fano plane would have, with gaps.
  auto prob = build_packing_problem(2);
  ForcedBlocks z = forced_blocks(2);
  PackingState st = initial_state(prob, {z.z1, z.z2}, 0);
  PackingState best = extend_packing(st, 1'000'000, Strategy::greedy);
  c.check(best.stats.best_size < 381, "partial, not a full system");
  auto rep = verify_steiner(best.to_design(), 2, 3, VerifyMode::exact);
  c.check(rep.verdict == Verdict::packing, "verifies as packing with gaps");
  c.check(!rep.uncovered.empty(), "uncovered 2-subspaces remain");
  // full-system quantities appear as closed-form audits only
  c.check(audit_formulas(2).sizeAB == 49, "audit value, not a constructed count");
  auto cls = classify_blocks(best.to_design());
  c.check(cls.size_ab() <= 49, "constructed counts stay within the audit bounds");
}

}  // namespace

int main() {
  std::printf("acceptance suite (exact tolerances; wall-clock limits enforced)\n");
  criterion1();
  criterion2();
  criterion3();
  criterion4();
  criterion5();
  criterion6();
  criterion7();
  criterion8();
  criterion9();
  criterion10();
  if (g_failures) {
    std::printf("%d criterion(s) FAILED\n", g_failures);
    return 1;
  }
  std::printf("all criteria passed\n");
  return 0;
}
