#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "qsd/search.hpp"
#include "qsd/structure.hpp"

using namespace qsd;

namespace {

// Gauge moves that fix Z1: adding multiples of columns 3, 4 or of another
// tail column into a tail column, plus swaps within the tail columns.
DesignMultiset random_z1_fixing_gauge(const DesignMultiset& d, std::mt19937_64& rng,
                                      bool allow_cols34) {
  const FieldSpec& f = *d.field;
  DesignMultiset cur = d;
  for (int step = 0; step < 6; ++step) {
    const int kind = static_cast<int>(rng() % (allow_cols34 ? 3 : 2));
    if (kind == 0) {
      const int a = 5 + static_cast<int>(rng() % 3), b = 5 + static_cast<int>(rng() % 3);
      cur = column_swap(cur, a, b);
    } else if (kind == 1) {
      // tail column += multiple of a different tail column
      const int j = 5 + static_cast<int>(rng() % 3);
      int i = 5 + static_cast<int>(rng() % 3);
      if (i == j) continue;
      std::vector<std::uint8_t> coeffs(7, 0);
      coeffs[j - 1] = 1;
      coeffs[i - 1] = static_cast<std::uint8_t>(1 + rng() % (f.q - 1));
      cur = column_transform(cur, j, coeffs);
    } else {
      const int j = 5 + static_cast<int>(rng() % 3);
      const int i = 3 + static_cast<int>(rng() % 2);
      std::vector<std::uint8_t> coeffs(7, 0);
      coeffs[j - 1] = 1;
      coeffs[i - 1] = static_cast<std::uint8_t>(1 + rng() % (f.q - 1));
      cur = column_transform(cur, j, coeffs);
    }
  }
  return cur;
}

// Gauge moves of the z1-z2 kind: tail columns += combinations of columns 1-3.
DesignMultiset random_head_gauge(const DesignMultiset& d, std::mt19937_64& rng) {
  const FieldSpec& f = *d.field;
  DesignMultiset cur = d;
  for (int j = 5; j <= 7; ++j) {
    std::vector<std::uint8_t> coeffs(7, 0);
    coeffs[j - 1] = 1;
    for (int i = 0; i < 3; ++i) coeffs[i] = static_cast<std::uint8_t>(rng() % f.q);
    cur = column_transform(cur, j, coeffs);
  }
  return cur;
}

DesignMultiset random_packing(const std::vector<Subspace>& forced, std::uint64_t seed,
                              std::uint64_t budget) {
  static std::shared_ptr<const PackingProblem> prob = build_packing_problem(2);
  PackingState st = initial_state(prob, forced, seed);
  return extend_packing(st, budget, Strategy::greedy).to_design();
}

}  // namespace

TEST_CASE("audit formulas at q=2 and q=3, identity up to q=9", "[structure]") {
  StructureAudit a2 = audit_formulas(2);
  REQUIRE(a2.sizeA == 140);
  REQUIRE(a2.sizeB == 140);
  REQUIRE(a2.sizeAB == 49);
  REQUIRE(a2.sizeAonly == 91);
  REQUIRE(a2.residual == 148);
  REQUIRE(a2.total == 381);
  REQUIRE(a2.identity_holds());

  StructureAudit a3 = audit_formulas(3);
  REQUIRE(a3.sizeA == 1170);
  REQUIRE(a3.sizeAB == 169);
  REQUIRE(a3.sizeAonly == 1001);
  REQUIRE(a3.residual == 5478);
  REQUIRE(a3.total == 7651);
  REQUIRE(a3.identity_holds());

  for (int q = 2; q <= 9; ++q) REQUIRE(audit_formulas(q).identity_holds());
}

TEST_CASE("forced blocks have the advertised zero columns", "[structure]") {
  for (int q : {2, 3}) {
    ForcedBlocks z = forced_blocks(q);
    DesignMultiset d(field_new(q), 7);
    d.add(z.z1);
    d.add(z.z2);
    d.add(z.z3);
    auto zc = count_zero_column_blocks(d);
    REQUIRE(zc.size() == 3);
    for (const auto& [s, cols] : zc) {
      if (s == z.z1) REQUIRE(cols == std::vector<int>{1, 2, 3, 4});
      if (s == z.z2) REQUIRE(cols == std::vector<int>{4, 5, 6, 7});
      if (s == z.z3) REQUIRE(cols == std::vector<int>{1, 2, 5, 6});
    }
  }
}

TEST_CASE("classification partitions a design", "[structure]") {
  const FieldSpec& f = field_new(2);
  ForcedBlocks z = forced_blocks(2);

  DesignMultiset zz(f, 7);
  zz.add(z.z1);
  zz.add(z.z2);
  auto cl = classify_blocks(zz);
  REQUIRE(cl.size_z() == 2);
  REQUIRE(cl.size_a_only() + cl.size_b_only() + cl.size_ab() + cl.size_rest() == 0);

  DesignMultiset d(f, 7);
  Subspace witnessA = span_strings({"1000000", "0100000", "0000101"}, f, 7);
  d.add(witnessA);
  auto cl2 = classify_blocks(d);
  REQUIRE(cl2.size_a_only() + cl2.size_ab() == 1);  // membership in A

  // partition property on a search output
  DesignMultiset pack = random_packing({z.z1, z.z2}, 1, 400);
  auto cl3 = classify_blocks(pack);
  REQUIRE(cl3.size_z() + cl3.size_a_only() + cl3.size_b_only() + cl3.size_ab() +
              cl3.size_rest() ==
          pack.total_size());
  StructureAudit a = audit_formulas(2);
  REQUIRE(cl3.size_a_only() + cl3.size_ab() <= a.sizeA);
  REQUIRE(cl3.size_b_only() + cl3.size_ab() <= a.sizeB);
  REQUIRE(cl3.size_ab() <= a.sizeAB);

  DesignMultiset wrong(f, 5);
  REQUIRE_THROWS_AS(classify_blocks(wrong), std::invalid_argument);
}

TEST_CASE("no_double_special flags two independent special vectors", "[structure]") {
  const FieldSpec& f = field_new(2);
  ForcedBlocks z = forced_blocks(2);

  DesignMultiset ok(f, 7);
  ok.add(z.z1);
  REQUIRE(no_double_special(ok).empty());

  DesignMultiset bad(f, 7);
  bad.add(span_strings({"0000110", "0000011", "1000000"}, f, 7));
  REQUIRE(no_double_special(bad).size() == 1);
}

TEST_CASE("normalize_z1_z2: synthetic witness and fixed point", "[structure]") {
  const FieldSpec& f = field_new(2);
  ForcedBlocks z = forced_blocks(2);

  DesignMultiset d(f, 7);
  d.add(z.z1);
  d.add(span_strings({"1000100", "0100010", "0010001"}, f, 7));
  DesignMultiset out = normalize_z1_z2(d);
  REQUIRE(out.multiplicity(z.z1) == 1);
  REQUIRE(out.multiplicity(z.z2) == 1);
  REQUIRE(out.total_size() == 2);

  DesignMultiset fixed(f, 7);
  fixed.add(z.z1);
  fixed.add(z.z2);
  DesignMultiset out2 = normalize_z1_z2(fixed);
  REQUIRE(out2.blocks == fixed.blocks);

  DesignMultiset noz1(f, 7);
  noz1.add(z.z2);
  REQUIRE_THROWS_AS(normalize_z1_z2(noz1), std::invalid_argument);

  DesignMultiset nowitness(f, 7);
  nowitness.add(z.z1);
  REQUIRE_THROWS_AS(normalize_z1_z2(nowitness), std::invalid_argument);
}

TEST_CASE("normalize_z1_z2 preserves packing verdicts on gauged packings", "[structure][slow]") {
  ForcedBlocks z = forced_blocks(2);
  std::mt19937_64 rng(23);

  for (int iter = 0; iter < 50; ++iter) {
    DesignMultiset base = random_packing({z.z1, z.z2}, 100 + iter, 40 + rng() % 80);
    DesignMultiset gauged = random_head_gauge(base, rng);
    REQUIRE(gauged.multiplicity(z.z1) == 1);  // head gauge fixes Z1

    auto before = verify_steiner(gauged, 2, 3, VerifyMode::packing);
    REQUIRE(before.verdict == Verdict::packing);

    DesignMultiset norm = normalize_z1_z2(gauged);
    REQUIRE(norm.multiplicity(z.z1) == 1);
    REQUIRE(norm.multiplicity(z.z2) == 1);
    auto after = verify_steiner(norm, 2, 3, VerifyMode::packing);
    REQUIRE(after.verdict == before.verdict);

    // idempotent up to canonical form
    DesignMultiset twice = normalize_z1_z2(norm);
    REQUIRE(twice.blocks == norm.blocks);
  }
}

TEST_CASE("normalize_z1_z3: synthetic witnesses and fixed point", "[structure]") {
  for (int q : {2, 3}) {
    const FieldSpec& f = field_new(q);
    ForcedBlocks z = forced_blocks(q);

    DesignMultiset fixed(f, 7);
    fixed.add(z.z1);
    fixed.add(z.z3);
    DesignMultiset out = normalize_z1_z3(fixed);
    REQUIRE(out.blocks == fixed.blocks);

    std::mt19937_64 rng(29 + q);
    for (int iter = 0; iter < 25; ++iter) {
      DesignMultiset gauged = random_z1_fixing_gauge(fixed, rng, true);
      REQUIRE(gauged.multiplicity(z.z1) == 1);
      DesignMultiset norm = normalize_z1_z3(gauged);
      REQUIRE(norm.multiplicity(z.z1) == 1);
      REQUIRE(norm.multiplicity(z.z3) == 1);
    }

    DesignMultiset noz1(f, 7);
    noz1.add(z.z3);
    REQUIRE_THROWS_AS(normalize_z1_z3(noz1), std::invalid_argument);
  }
}

TEST_CASE("normalize_z1_z3 preserves packing verdicts", "[structure][slow]") {
  ForcedBlocks z = forced_blocks(2);
  std::mt19937_64 rng(31);

  for (int iter = 0; iter < 25; ++iter) {
    DesignMultiset base = random_packing({z.z1, z.z3}, 500 + iter, 40 + rng() % 60);
    DesignMultiset gauged = random_z1_fixing_gauge(base, rng, true);
    auto before = verify_steiner(gauged, 2, 3, VerifyMode::packing);
    REQUIRE(before.verdict == Verdict::packing);

    DesignMultiset norm = normalize_z1_z3(gauged);
    REQUIRE(norm.multiplicity(z.z1) == 1);
    REQUIRE(norm.multiplicity(z.z3) == 1);
    REQUIRE(verify_steiner(norm, 2, 3, VerifyMode::packing).verdict == before.verdict);
  }
}

TEST_CASE("spread through a point", "[structure]") {
  const FieldSpec& f = field_new(2);
  ForcedBlocks z = forced_blocks(2);

  DesignMultiset d(f, 7);
  d.add(z.z1);
  auto rep = spread_through_point_check(d, 7);
  REQUIRE(rep.verdict == Verdict::packing);
  REQUIRE(rep.multiple.empty());

  // two blocks sharing the point and a second 1-subspace collide after
  // puncturing
  DesignMultiset clash(f, 7);
  clash.add(z.z1);  // contains e5,e6,e7
  clash.add(span_strings({"1000000", "0000100", "0000001"}, f, 7));
  auto rep2 = spread_through_point_check(clash, 7);
  REQUIRE(rep2.verdict == Verdict::violation);
  REQUIRE_FALSE(rep2.multiple.empty());

  REQUIRE_THROWS_AS(spread_through_point_check(d, 0), std::invalid_argument);
  DesignMultiset wrong(f, 6);
  REQUIRE_THROWS_AS(spread_through_point_check(wrong, 1), std::invalid_argument);
}

TEST_CASE("prefix distribution tallies", "[structure]") {
  const FieldSpec& f = field_new(2);
  ForcedBlocks z = forced_blocks(2);

  DesignMultiset d(f, 7);
  d.add(z.z1);
  auto dist = prefix_distribution_check(d);
  REQUIRE(dist.expected == 4);
  REQUIRE(dist.points.size() == 7);
  for (const auto& pp : dist.points) {
    REQUIRE(pp.blocks_seen == 0);
    REQUIRE(pp.tallies.empty());
  }
  REQUIRE(dist.over_bound.empty());

  // one extra block through e5 contributes its punctured line's vectors
  DesignMultiset d2 = d;
  d2.add(span_strings({"1000000", "0100000", "0000100"}, f, 7));
  auto dist2 = prefix_distribution_check(d2);
  const Subspace e5 = span_strings({"0000100"}, f, 7);
  for (const auto& pp : dist2.points) {
    if (pp.point == e5) {
      REQUIRE(pp.blocks_seen == 1);
      REQUIRE(pp.tallies.size() == 3);  // 1000, 0100, 1100
      for (const auto& [vec, cnt] : pp.tallies) REQUIRE(cnt == 1);
    } else {
      REQUIRE(pp.blocks_seen == 0);
    }
  }

  // wrong ambient is a precondition error
  DesignMultiset five(f, 5);
  REQUIRE_THROWS_AS(prefix_distribution_check(five), std::invalid_argument);

  // Z1 must be present
  DesignMultiset noz(f, 7);
  noz.add(z.z2);
  REQUIRE_THROWS_AS(prefix_distribution_check(noz), std::invalid_argument);
}
