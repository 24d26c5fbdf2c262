#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <random>
#include <thread>
#include <vector>

#include "qsd/design.hpp"
#include "qsd/equations.hpp"
#include "qsd/structure.hpp"

namespace qsd {

enum class Strategy { greedy, dlx_first, dlx_best };

inline const char* to_string(Strategy s) {
  switch (s) {
    case Strategy::greedy: return "greedy";
    case Strategy::dlx_first: return "dlx-first";
    case Strategy::dlx_best: return "dlx-best";
  }
  return "?";
}

inline Strategy strategy_from_string(const std::string& s) {
  if (s == "greedy") return Strategy::greedy;
  if (s == "dlx-first") return Strategy::dlx_first;
  if (s == "dlx-best") return Strategy::dlx_best;
  throw std::invalid_argument("unknown strategy: " + s);
}

struct SearchStats {
  std::uint64_t nodes = 0;        // branch expansions consumed
  std::uint64_t budget_nodes = 0;
  int best_size = 0;
  double wall_ms = 0;
};

/// Immutable incidence tables for packing 3-subspaces of F_q^7 so that no
/// 2-subspace is covered twice. Candidate ids index `blocks`; pair ids index
/// `pairs`. Both are in canonical order.
struct PackingProblem {
  const FieldSpec* field = nullptr;
  int n = 7;
  std::vector<Subspace> blocks;
  std::vector<Subspace> pairs;
  std::vector<std::vector<std::int32_t>> block_pairs;  // per block: pair ids, sorted
  std::vector<std::vector<std::int32_t>> pair_blocks;  // per pair: block ids, ascending

  int block_id(const Subspace& s) const {
    auto it = std::lower_bound(blocks.begin(), blocks.end(), s);
    if (it == blocks.end() || !(*it == s)) return -1;
    return static_cast<int>(it - blocks.begin());
  }
};

/// Builds the incidence tables. `filter` restricts the candidate pool (pass
/// nullptr for all 3-subspaces). Guarded by `cap` on the pool size.
inline std::shared_ptr<const PackingProblem> build_packing_problem(
    int q, const std::function<bool(const Subspace&)>& filter = nullptr,
    std::int64_t cap = kEnumCap) {
  auto prob = std::make_shared<PackingProblem>();
  const FieldSpec& f = field_new(q);
  prob->field = &f;
  prob->pairs = enumerate_grassmannian(7, 2, f, cap);
  for (Subspace& s : enumerate_grassmannian(7, 3, f, cap))
    if (!filter || filter(s)) prob->blocks.push_back(std::move(s));
  if (static_cast<std::int64_t>(prob->blocks.size()) > cap)
    throw capacity_error("packing candidate pool exceeds cap");

  prob->block_pairs.resize(prob->blocks.size());
  prob->pair_blocks.resize(prob->pairs.size());
  for (std::size_t b = 0; b < prob->blocks.size(); ++b) {
    for (const Subspace& p : subspaces_of(prob->blocks[b], 2)) {
      const auto it = std::lower_bound(prob->pairs.begin(), prob->pairs.end(), p);
      const std::int32_t pid = static_cast<std::int32_t>(it - prob->pairs.begin());
      prob->block_pairs[b].push_back(pid);
      prob->pair_blocks[pid].push_back(static_cast<std::int32_t>(b));
    }
    std::sort(prob->block_pairs[b].begin(), prob->block_pairs[b].end());
  }
  return prob;
}

/// A partial packing plus its bookkeeping. The coverage map always matches a
/// recount over the chosen blocks (see recheck_coverage).
struct PackingState {
  std::shared_ptr<const PackingProblem> problem;
  std::vector<int> chosen;             // block ids in insertion order
  std::vector<std::uint8_t> covered;   // per pair id
  std::vector<int> forced;             // block ids, always a prefix of chosen
  std::uint64_t seed = 0;
  SearchStats stats;

  DesignMultiset to_design() const {
    DesignMultiset d(*problem->field, problem->n);
    for (int b : chosen) d.add(problem->blocks[b]);
    return d;
  }
};

inline bool recheck_coverage(const PackingState& st) {
  std::vector<std::uint8_t> fresh(st.problem->pairs.size(), 0);
  for (int b : st.chosen)
    for (std::int32_t p : st.problem->block_pairs[b]) {
      if (fresh[p]) return false;  // doubly covered
      fresh[p] = 1;
    }
  return fresh == st.covered;
}

inline PackingState initial_state(std::shared_ptr<const PackingProblem> prob,
                                  const std::vector<Subspace>& forced_blocks,
                                  std::uint64_t seed = 0) {
  PackingState st;
  st.problem = std::move(prob);
  st.covered.assign(st.problem->pairs.size(), 0);
  st.seed = seed;
  for (const Subspace& s : forced_blocks) {
    const int b = st.problem->block_id(s);
    if (b < 0) throw std::invalid_argument("forced block is not in the candidate pool");
    for (std::int32_t p : st.problem->block_pairs[b]) {
      if (st.covered[p])
        throw std::invalid_argument("forced blocks cover a 2-subspace twice");
      st.covered[p] = 1;
    }
    st.chosen.push_back(b);
    st.forced.push_back(b);
  }
  return st;
}

namespace detail {

// Sequential fail-first packing search over one subtree. Blocks are tried in
// `order` rank; the branching variable is the uncovered 2-subspace with the
// fewest live candidates.
class PackEngine {
 public:
  PackEngine(const PackingProblem& prob, const std::vector<std::uint32_t>& order)
      : P(prob), rank(order) {}

  std::vector<std::uint8_t> covered, excluded, alive;
  std::vector<std::int32_t> hits;  // per pair: live candidates through it
  std::vector<int> chosen;
  std::uint64_t nodes = 0, budget = 0;
  int best_size = -1;
  std::vector<int> best;

  void init(const PackingState& st) {
    covered = st.covered;
    excluded.assign(P.pairs.size(), 0);
    alive.assign(P.blocks.size(), 1);
    hits.assign(P.pairs.size(), 0);
    chosen = st.chosen;
    for (std::size_t b = 0; b < P.blocks.size(); ++b) {
      bool ok = true;
      for (std::int32_t p : P.block_pairs[b]) ok = ok && !covered[p];
      alive[b] = ok ? 1 : 0;
      if (ok)
        for (std::int32_t p : P.block_pairs[b]) ++hits[p];
    }
    note_best();
  }

  int select_pair() const {
    int sel = -1; std::int32_t fewest = 0;
    for (std::size_t p = 0; p < P.pairs.size(); ++p) {
      if (covered[p] || excluded[p] || hits[p] == 0) continue;
      if (sel < 0 || hits[p] < fewest) {
        sel = static_cast<int>(p);
        fewest = hits[p];
      }
    }
    return sel;
  }

  bool touches_excluded(int b) const {
    for (std::int32_t p : P.block_pairs[b])
      if (excluded[p]) return true;
    return false;
  }

  std::vector<int> candidates(int pair, bool least_damage) const {
    std::vector<int> c;
    for (std::int32_t b : P.pair_blocks[pair])
      if (alive[b] && !touches_excluded(b)) c.push_back(b);
    if (least_damage) {
      // two 3-subspaces share at most one 2-subspace, so summing hits over a
      // block's uncovered pairs counts each casualty exactly once
      std::vector<std::pair<std::int64_t, int>> keyed;
      keyed.reserve(c.size());
      for (int b : c) {
        std::int64_t damage = 0;
        for (std::int32_t p : P.block_pairs[b])
          if (!covered[p]) damage += hits[p] - 1;
        keyed.emplace_back(damage, b);
      }
      std::stable_sort(keyed.begin(), keyed.end(),
                       [&](const auto& a, const auto& b2) {
                         if (a.first != b2.first) return a.first < b2.first;
                         return rank[a.second] < rank[b2.second];
                       });
      c.clear();
      for (auto& [d, b] : keyed) c.push_back(b);
    } else {
      std::sort(c.begin(), c.end(),
                [&](int a, int b2) { return rank[a] < rank[b2]; });
    }
    return c;
  }

  // Places block b; returns the blocks it killed (for undo).
  std::vector<int> place(int b) {
    std::vector<int> killed;
    for (std::int32_t p : P.block_pairs[b]) {
      covered[p] = 1;
      for (std::int32_t b2 : P.pair_blocks[p]) {
        if (!alive[b2]) continue;
        alive[b2] = 0;
        killed.push_back(b2);
        for (std::int32_t p2 : P.block_pairs[b2]) --hits[p2];
      }
    }
    chosen.push_back(b);
    note_best();
    return killed;
  }

  void unplace(int b, const std::vector<int>& killed) {
    chosen.pop_back();
    for (auto it = killed.rbegin(); it != killed.rend(); ++it) {
      alive[*it] = 1;
      for (std::int32_t p2 : P.block_pairs[*it]) ++hits[p2];
    }
    for (std::int32_t p : P.block_pairs[b]) covered[p] = 0;
  }

  void greedy() {
    while (nodes < budget) {
      const int pair = select_pair();
      if (pair < 0) break;
      int pick = -1;
      for (std::int32_t b : P.pair_blocks[pair])
        if (alive[b] && (pick < 0 || rank[b] < rank[pick])) pick = b;
      ++nodes;
      place(pick);
    }
  }

  void dfs(bool least_damage) {
    if (nodes >= budget) return;
    if ((nodes & (nodes - 1)) == 0) spot_check();  // full recount at powers of two
    const int pair = select_pair();
    if (pair < 0) return;  // maximal; best already noted
    for (int b : candidates(pair, least_damage)) {
      if (nodes >= budget) return;
      ++nodes;
      auto killed = place(b);
      dfs(least_damage);
      unplace(b, killed);
    }
    if (nodes >= budget) return;
    ++nodes;
    excluded[pair] = 1;  // branch where this 2-subspace must stay uncovered
    dfs(least_damage);
    excluded[pair] = 0;
  }

  void spot_check() const {
    std::vector<std::uint8_t> fresh(P.pairs.size(), 0);
    for (int b : chosen)
      for (std::int32_t p : P.block_pairs[b]) {
        if (fresh[p])
          throw std::logic_error("packing invariant breach: 2-subspace covered twice");
        fresh[p] = 1;
      }
    if (fresh != covered)
      throw std::logic_error("packing invariant breach: coverage map out of sync");
  }

 private:
  const PackingProblem& P;
  const std::vector<std::uint32_t>& rank;

  void note_best() {
    if (static_cast<int>(chosen.size()) > best_size) {
      best_size = static_cast<int>(chosen.size());
      best = chosen;
    }
  }
};

inline std::vector<std::uint32_t> block_order(const PackingProblem& prob, std::uint64_t seed) {
  std::vector<std::uint32_t> rank(prob.blocks.size());
  for (std::size_t i = 0; i < rank.size(); ++i) rank[i] = static_cast<std::uint32_t>(i);
  if (seed != 0) {
    std::mt19937_64 rng(seed);
    std::shuffle(rank.begin(), rank.end(), rng);
  }
  return rank;
}

}  // namespace detail

/// Monotone extension of a packing within a node budget. Deterministic for a
/// fixed (seed, budget, strategy) independent of `threads`: the tree under
/// the first branching 2-subspace is split into per-candidate subtrees with
/// fixed budget shares and a deterministic reduction.
inline PackingState extend_packing(const PackingState& state, std::uint64_t budget_nodes,
                                   Strategy strategy, int threads = 1) {
  const auto t0 = std::chrono::steady_clock::now();
  const PackingProblem& P = *state.problem;
  const auto rank = detail::block_order(P, state.seed);

  PackingState out = state;
  out.stats.budget_nodes = budget_nodes;

  if (strategy == Strategy::greedy) {
    detail::PackEngine eng(P, rank);
    eng.init(state);
    eng.budget = budget_nodes;
    eng.greedy();
    out.chosen = eng.chosen;
    out.stats.nodes = eng.nodes;
  } else {
    const bool least_damage = strategy == Strategy::dlx_best;
    detail::PackEngine root(P, rank);
    root.init(state);
    const int pair = root.select_pair();
    std::vector<int> branches;  // candidate block ids; -1 is the defer branch
    if (pair >= 0) {
      branches = root.candidates(pair, least_damage);
      branches.push_back(-1);
    }
    struct BranchResult {
      int size = -1;
      std::vector<int> blocks_sorted;
      std::vector<int> blocks;
      std::uint64_t nodes = 0;
    };
    std::vector<BranchResult> results(branches.size());
    const std::uint64_t nb = branches.empty() ? 1 : branches.size();
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= branches.size()) return;
        const std::uint64_t share = budget_nodes / nb + (i < budget_nodes % nb ? 1 : 0);
        detail::PackEngine eng(P, rank);
        eng.init(state);
        eng.budget = share;
        if (branches[i] >= 0) {
          if (eng.budget > 0) {
            ++eng.nodes;
            eng.place(branches[i]);
            eng.dfs(least_damage);
          }
        } else {
          if (eng.budget > 0) {
            ++eng.nodes;
            eng.excluded[pair] = 1;
            eng.dfs(least_damage);
          }
        }
        auto& r = results[i];
        r.size = eng.best_size;
        r.blocks = eng.best;
        r.blocks_sorted = eng.best;
        std::sort(r.blocks_sorted.begin(), r.blocks_sorted.end());
        r.nodes = eng.nodes;
      }
    };
    if (threads <= 1 || branches.size() <= 1) {
      worker();
    } else {
      std::vector<std::thread> pool;
      const int nw = std::min<std::size_t>(threads, branches.size());
      for (int w = 0; w < nw - 1; ++w) pool.emplace_back(worker);
      worker();
      for (auto& t : pool) t.join();
    }
    int bi = -1;
    for (std::size_t i = 0; i < results.size(); ++i) {
      out.stats.nodes += results[i].nodes;
      if (results[i].size < 0) continue;
      if (bi < 0 || results[i].size > results[bi].size ||
          (results[i].size == results[bi].size &&
           results[i].blocks_sorted < results[bi].blocks_sorted))
        bi = static_cast<int>(i);
    }
    out.chosen = bi >= 0 ? results[bi].blocks : state.chosen;
  }

  out.covered.assign(P.pairs.size(), 0);
  for (int b : out.chosen)
    for (std::int32_t p : P.block_pairs[b]) out.covered[p] = 1;
  out.stats.best_size = static_cast<int>(out.chosen.size());
  out.stats.wall_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

/// Every block with at least four all-zero columns, with its zero-column
/// set (1-based).
inline std::vector<std::pair<Subspace, std::vector<int>>> count_zero_column_blocks(
    const DesignMultiset& d) {
  std::vector<std::pair<Subspace, std::vector<int>>> out;
  for (const auto& [s, m] : d.blocks) {
    std::vector<int> zero;
    for (int c = 1; c <= d.n; ++c) {
      bool all = true;
      for (Row r : s.rows) all = all && row_get(r, d.n, c) == 0;
      if (all) zero.push_back(c);
    }
    if (static_cast<int>(zero.size()) >= 4) out.emplace_back(s, zero);
  }
  return out;
}

struct AbReport {
  int family_size = 0;      // including Z1 and Z2
  int non_z_size = 0;       // blocks in the A/B classes
  Int target_non_z;         // 2(q^2+q+1)(q^4-q-1) + (q^2+q+1)^2
  long long ab_class = 0;   // blocks meeting both special spaces
  Int target_ab;            // (q^2+q+1)^2
  SearchStats stats;
};

/// Searches for a large family of 3-subspaces, each meeting a leading- or
/// trailing-zero special 1-subspace, pairwise 2-subspace-disjoint, with Z1
/// and Z2 forced. The candidate pool already enforces the no-double-special
/// filter.
inline std::pair<PackingState, AbReport> build_ab_candidates(int q, std::uint64_t budget_nodes,
                                                             std::uint64_t seed = 0,
                                                             Strategy strategy = Strategy::greedy,
                                                             int threads = 1,
                                                             std::int64_t cap = kEnumCap) {
  const ForcedBlocks z = forced_blocks(q);
  auto filter = [&](const Subspace& s) {
    if (s == z.z1 || s == z.z2) return true;
    const int lead = detail::special_dim(s, true);
    const int trail = detail::special_dim(s, false);
    if (lead >= 2 || trail >= 2) return false;  // no-double-special
    return lead == 1 || trail == 1;
  };
  auto prob = build_packing_problem(q, filter, cap);
  PackingState st = initial_state(prob, {z.z1, z.z2}, seed);
  PackingState res = extend_packing(st, budget_nodes, strategy, threads);

  AbReport rep;
  const Int Q = q;
  const Int s1 = Q * Q + Q + 1;
  rep.target_non_z = 2 * s1 * (Q * Q * Q * Q - Q - 1) + s1 * s1;
  rep.target_ab = s1 * s1;
  rep.family_size = static_cast<int>(res.chosen.size());
  rep.non_z_size = rep.family_size - 2;
  auto cls = classify_blocks(res.to_design());
  rep.ab_class = cls.size_ab();
  rep.stats = res.stats;
  return {res, rep};
}

// ---------------------------------------------------------------------------
// Depth-first multiplicity assignment for the 1-punctured system.
// ---------------------------------------------------------------------------

struct P6Report {
  std::size_t equations = 0;
  std::size_t variables = 0;
  std::uint64_t nodes = 0;
  std::uint64_t budget_nodes = 0;
  std::size_t best_depth = 0;          // variables assigned on the best branch
  std::size_t best_satisfied = 0;      // equations fully decided and exact
  bool solved = false;                 // all equations satisfied (not expected)
  DesignMultiset best_assignment;      // nonzero multiplicities at the best node
};

/// Bounded DFS over block multiplicities of the (q, n=7, p=1) system with
/// residual propagation: assignments keep every residual nonnegative and any
/// fully-assigned equation must sit at residual zero. The contract is the
/// correctness of the system and the propagation, not discovery.
inline std::pair<EquationSystem, P6Report> search_punctured_6(int q, std::uint64_t budget_nodes,
                                                              int threads = 1,
                                                              std::int64_t cap = kEnumCap) {
  if (q != 2)
    throw std::invalid_argument("search_punctured_6: only q=2 is within the search envelope");
  const PuncturedParams pp = PuncturedParams::make(q, 7, 1, 2);
  EquationSystem sys = build_equation_system(pp, threads, cap);

  std::map<Subspace, std::size_t> var_index;
  for (std::size_t i = 0; i < sys.variables.size(); ++i) var_index.emplace(sys.variables[i], i);
  // per variable: (equation, coefficient); per equation: unassigned count
  std::vector<std::vector<std::pair<std::size_t, long long>>> var_eqs(sys.variables.size());
  std::vector<long long> residual(sys.equations.size());
  std::vector<int> remaining(sys.equations.size(), 0);
  for (std::size_t e = 0; e < sys.equations.size(); ++e) {
    residual[e] = sys.equations[e].rhs;
    for (const auto& [y, c] : sys.equations[e].terms) {
      var_eqs[var_index.at(y)].emplace_back(e, c);
      ++remaining[e];
    }
  }

  P6Report rep;
  rep.equations = sys.equations.size();
  rep.variables = sys.variables.size();
  rep.budget_nodes = budget_nodes;
  rep.best_assignment = DesignMultiset(field_new(q), pp.m);

  std::vector<long long> value(sys.variables.size(), 0);

  auto satisfied_now = [&]() {
    std::size_t n = 0;
    for (std::size_t e = 0; e < sys.equations.size(); ++e)
      if (remaining[e] == 0 && residual[e] == 0) ++n;
    return n;
  };
  auto note_best = [&](std::size_t depth) {
    const std::size_t sat = satisfied_now();
    if (depth > rep.best_depth || (depth == rep.best_depth && sat > rep.best_satisfied)) {
      rep.best_depth = depth;
      rep.best_satisfied = sat;
      DesignMultiset d(field_new(q), pp.m);
      for (std::size_t i = 0; i < depth; ++i)
        if (value[i] > 0) d.add(sys.variables[i], value[i]);
      rep.best_assignment = std::move(d);
    }
  };

  std::function<bool(std::size_t)> dfs = [&](std::size_t i) -> bool {
    note_best(i);
    if (i == sys.variables.size()) {
      for (std::size_t e = 0; e < sys.equations.size(); ++e)
        if (residual[e] != 0) return false;
      rep.solved = true;
      return true;
    }
    if (rep.nodes >= budget_nodes) return false;
    long long ub = std::numeric_limits<long long>::max();
    for (const auto& [e, c] : var_eqs[i]) ub = std::min(ub, residual[e] / c);
    if (var_eqs[i].empty()) ub = 0;  // unconstrained variables stay zero
    for (long long v = ub; v >= 0; --v) {
      if (rep.nodes >= budget_nodes) return false;
      ++rep.nodes;
      bool ok = true;
      value[i] = v;
      for (const auto& [e, c] : var_eqs[i]) {
        residual[e] -= v * c;
        --remaining[e];
      }
      for (const auto& [e, c] : var_eqs[i])
        if (residual[e] < 0 || (remaining[e] == 0 && residual[e] != 0)) ok = false;
      if (ok && dfs(i + 1)) return true;
      for (const auto& [e, c] : var_eqs[i]) {
        residual[e] += v * c;
        ++remaining[e];
      }
      value[i] = 0;
    }
    return false;
  };
  dfs(0);
  return {std::move(sys), std::move(rep)};
}

}  // namespace qsd
