// qsd: construct, verify, normalize and search q-analog Steiner structures.
//
// Exit codes: 0 success/consistent, 1 verification failure found,
// 2 usage or input error, 3 capacity guard tripped.

#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "qsd/design.hpp"
#include "qsd/equations.hpp"
#include "qsd/search.hpp"
#include "qsd/structure.hpp"
#include "qsd/subspace.hpp"

using json = nlohmann::json;
using namespace qsd;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitVerification = 1;
constexpr int kExitUsage = 2;
constexpr int kExitCapacity = 3;

struct Options {
  std::string format = "text";
  int threads = 1;
  bool json() const { return format == "json"; }
};

json report_skeleton(const std::string& command) {
  return json{{"schema", "qsd-report-1"}, {"command", command}};
}

void emit(const json& j) { std::cout << j.dump(2) << "\n"; }

DesignMultiset load_design(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open design file: " + path);
  return read_qsd1(in);
}

std::vector<DesignMultiset> load_parallelism(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open parallelism file: " + path);
  return read_qsp1(in);
}

// Writes `text` to the path, or embeds/prints it depending on the format.
void deliver_payload(const Options& opt, json& rep, const std::string& key,
                     const std::string& text, const std::string& out_path) {
  if (!out_path.empty()) {
    std::ofstream os(out_path);
    if (!os) throw std::invalid_argument("cannot write file: " + out_path);
    os << text;
    rep["out"] = out_path;
  } else if (opt.json()) {
    rep[key] = text;
  } else {
    std::cout << text;
  }
}

long long to_ll(const Int& v) { return v.convert_to<long long>(); }

json coverage_json(const CoverageReport& rep, std::size_t sample = 8) {
  json j{{"t", rep.t},
         {"k", rep.k},
         {"verdict", to_string(rep.verdict)},
         {"uncovered", rep.uncovered.size()},
         {"multiply_covered", rep.multiple.size()},
         {"dim_violations", rep.dim_violations.size()}};
  json mult = json::array();
  for (std::size_t i = 0; i < rep.multiple.size() && i < sample; ++i)
    mult.push_back({{"subspace", rep.multiple[i].first.key()},
                    {"count", rep.multiple[i].second}});
  j["multiply_covered_sample"] = mult;
  json unc = json::array();
  for (std::size_t i = 0; i < rep.uncovered.size() && i < sample; ++i)
    unc.push_back(rep.uncovered[i].key());
  j["uncovered_sample"] = unc;
  return j;
}

json solution_json(const SolutionReport& rep, std::size_t sample = 8) {
  json j{{"consistent", rep.consistent},
         {"equations_checked", rep.equations_checked},
         {"violations", rep.violations.size()},
         {"invalid_blocks", rep.invalid_blocks.size()}};
  json v = json::array();
  for (std::size_t i = 0; i < rep.violations.size() && i < sample; ++i)
    v.push_back({{"equation", rep.violations[i].x.key()},
                 {"lhs", rep.violations[i].lhs},
                 {"rhs", rep.violations[i].rhs}});
  j["violation_sample"] = v;
  return j;
}

void print_coverage_text(const CoverageReport& rep) {
  std::cout << "verdict: " << to_string(rep.verdict) << "\n"
            << "uncovered: " << rep.uncovered.size()
            << "  multiply covered: " << rep.multiple.size()
            << "  dim violations: " << rep.dim_violations.size() << "\n";
  for (std::size_t i = 0; i < rep.multiple.size() && i < 8; ++i)
    std::cout << "  twice: " << rep.multiple[i].first.key() << " x"
              << rep.multiple[i].second << "\n";
}

std::set<int> parse_index_list(const std::string& s) {
  std::set<int> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (!tok.empty()) out.insert(std::stoi(tok));
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"q-analog Steiner system toolkit"};
  app.require_subcommand(1);

  Options opt;
  app.add_option("--format", opt.format, "output format")
      ->check(CLI::IsMember({"text", "json"}))
      ->capture_default_str();
  app.add_option("--threads", opt.threads, "worker cap for parallel checks")
      ->check(CLI::Range(1, 256))
      ->capture_default_str();

  // ---- gauss ----
  int g_n = 0, g_k = 0, g_q = 2;
  auto* gauss = app.add_subcommand("gauss", "Gaussian coefficient [n k]_q");
  gauss->add_option("--n", g_n)->required();
  gauss->add_option("--k", g_k)->required();
  gauss->add_option("--q", g_q)->required();

  // ---- enum ----
  int e_n = 0, e_k = 0, e_q = 2;
  auto* enumc = app.add_subcommand("enum", "enumerate G_q(n,k) in canonical order");
  enumc->add_option("--n", e_n)->required();
  enumc->add_option("--k", e_k)->required();
  enumc->add_option("--q", e_q)->required();

  // ---- admissible ----
  int a_t = 0, a_k = 0, a_n = 0, a_q = 2;
  auto* adm = app.add_subcommand("admissible", "divisibility conditions for S_q(t,k,n)");
  adm->add_option("--t", a_t)->required();
  adm->add_option("--k", a_k)->required();
  adm->add_option("--n", a_n)->required();
  adm->add_option("--q", a_q)->required();

  // ---- spread ----
  int s_q = 2, s_k = 2, s_n = 4;
  std::string s_out;
  auto* spr = app.add_subcommand("spread", "spread S_q(1,k,n) by field reduction");
  spr->add_option("--q", s_q)->required();
  spr->add_option("--k", s_k)->required();
  spr->add_option("--n", s_n)->required();
  spr->add_option("--out", s_out, "write QSD1 here instead of stdout");

  // ---- parallelism ----
  int p_q = 2;
  std::string p_out;
  auto* par = app.add_subcommand("parallelism", "parallelism of PG(3,q)");
  par->add_option("--q", p_q)->required();
  par->add_option("--out", p_out, "write QSP1 here instead of stdout");

  // ---- verify ----
  std::string v_file, v_mode = "exact";
  int v_t = 0, v_k = 0;
  auto* ver = app.add_subcommand("verify", "coverage check of a QSD1 design");
  ver->add_option("--file", v_file)->required();
  ver->add_option("--t", v_t)->required();
  ver->add_option("--k", v_k)->required();
  ver->add_option("--mode", v_mode)->check(CLI::IsMember({"exact", "packing"}));

  // ---- derive ----
  std::string d_file, d_point, d_out;
  int d_t = 2, d_k = 3;
  auto* der = app.add_subcommand("derive", "derived design at a point");
  der->add_option("--file", d_file)->required();
  der->add_option("--point", d_point, "vector literal spanning the point")->required();
  der->add_option("--t", d_t, "t of the input design")->capture_default_str();
  der->add_option("--k", d_k, "k of the input design")->capture_default_str();
  der->add_option("--out", d_out);

  // ---- punctured ----
  auto* pun = app.add_subcommand("punctured", "p-punctured system tooling");
  pun->require_subcommand(1);
  int pe_q = 2, pe_n = 7, pe_p = 3, pe_t = 2;
  std::string pe_out;
  bool pe_lp = false;
  auto* peq = pun->add_subcommand("build-eq", "emit the coverage equation system");
  peq->add_option("--q", pe_q)->required();
  peq->add_option("--n", pe_n)->required();
  peq->add_option("--p", pe_p)->required();
  peq->add_option("--t", pe_t)->capture_default_str();
  peq->add_option("--out", pe_out);
  peq->add_flag("--lp", pe_lp, "human-oriented listing instead of QEQ1");

  std::string pc_system, pc_design, pc_uniform;
  auto* pchk = pun->add_subcommand("check", "check a design or uniform vector against a system");
  pchk->add_option("--system", pc_system, "QEQ1 file")->required();
  pchk->add_option("--design", pc_design, "QSD1 file");
  pchk->add_option("--uniform", pc_uniform, "comma list X_0,X_1,...");

  // ---- construct ----
  auto* con = app.add_subcommand("construct", "constructions");
  con->require_subcommand(1);
  int c_q = 2;
  std::string c_par, c_a, c_out;
  auto* c237 = con->add_subcommand("s237-5", "2-punctured system over F_q^5");
  c237->add_option("--q", c_q)->required();
  c237->add_option("--parallelism", c_par, "QSP1 file (default: search)");
  c237->add_option("--a-indices", c_a, "comma list of q^2 spread indices");
  c237->add_option("--out", c_out);

  // ---- audit ----
  int au_q = 2;
  auto* aud = app.add_subcommand("audit", "closed-form structure census");
  aud->add_option("--q", au_q)->required();

  // ---- classify ----
  std::string cl_file;
  auto* cls = app.add_subcommand("classify", "A/B block classification of a design");
  cls->add_option("--file", cl_file)->required();

  // ---- normalize ----
  std::string n_file, n_target, n_out;
  auto* nor = app.add_subcommand("normalize", "column-transform gauge fixes");
  nor->add_option("--file", n_file)->required();
  nor->add_option("--target", n_target)->required()->check(CLI::IsMember({"z2", "z3"}));
  nor->add_option("--out", n_out);

  // ---- check (structural probes, always JSON) ----
  auto* chk = app.add_subcommand("check", "structural probes of a design");
  chk->require_subcommand(1);
  std::string csp_file;
  int csp_coord = 7;
  auto* csp = chk->add_subcommand("spread-point", "blocks through a unity point, punctured");
  csp->add_option("--file", csp_file)->required();
  csp->add_option("--coord", csp_coord, "coordinate of the unity point")->capture_default_str();
  std::string cpf_file;
  auto* cpf = chk->add_subcommand("prefix", "prefix tallies of blocks through the tail points");
  cpf->add_option("--file", cpf_file)->required();
  std::string cds_file;
  auto* cds = chk->add_subcommand("double-special", "blocks with two independent special vectors");
  cds->add_option("--file", cds_file)->required();
  std::string czc_file;
  auto* czc = chk->add_subcommand("zero-columns", "blocks with four or more all-zero columns");
  czc->add_option("--file", czc_file)->required();

  // ---- search ----
  auto* sea = app.add_subcommand("search", "packing and assignment searches");
  sea->require_subcommand(1);
  int sp_q = 2;
  std::uint64_t sp_seed = 0, sp_budget = 100000;
  std::string sp_strategy = "greedy", sp_out, sp_forced = "z1z2";
  auto* spk = sea->add_subcommand("pack", "extend a packing of 3-subspaces of F_q^7");
  spk->add_option("--q", sp_q)->capture_default_str();
  spk->add_option("--seed", sp_seed)->capture_default_str();
  spk->add_option("--budget-nodes", sp_budget)->capture_default_str();
  spk->add_option("--strategy", sp_strategy)
      ->check(CLI::IsMember({"greedy", "dlx-first", "dlx-best"}))
      ->capture_default_str();
  spk->add_option("--forced", sp_forced)
      ->check(CLI::IsMember({"none", "z1z2", "z1z2z3"}))
      ->capture_default_str();
  spk->add_option("--out", sp_out, "QSD1 checkpoint (sidecar: <out>.json)");

  int sa_q = 2;
  std::uint64_t sa_seed = 0, sa_budget = 100000;
  std::string sa_strategy = "greedy", sa_out;
  auto* sab = sea->add_subcommand("ab", "families toward the A-union-B block set");
  sab->add_option("--q", sa_q)->capture_default_str();
  sab->add_option("--seed", sa_seed)->capture_default_str();
  sab->add_option("--budget-nodes", sa_budget)->capture_default_str();
  sab->add_option("--strategy", sa_strategy)
      ->check(CLI::IsMember({"greedy", "dlx-first", "dlx-best"}))
      ->capture_default_str();
  sab->add_option("--out", sa_out);

  int s6_q = 2;
  std::uint64_t s6_budget = 100000;
  std::string s6_out, s6_export;
  auto* sp6 = sea->add_subcommand("p6", "multiplicity assignment for the 1-punctured system");
  sp6->add_option("--q", s6_q)->capture_default_str();
  sp6->add_option("--budget-nodes", s6_budget)->capture_default_str();
  sp6->add_option("--out", s6_out, "best partial assignment as QSD1");
  sp6->add_option("--export-eq", s6_export, "write the QEQ1 system here");

  // let global flags (--format, --threads) appear after any subcommand
  std::function<void(CLI::App*)> allow_fallthrough = [&](CLI::App* a) {
    for (CLI::App* sub : a->get_subcommands([](CLI::App*) { return true; })) {
      sub->fallthrough(true);
      allow_fallthrough(sub);
    }
  };
  allow_fallthrough(&app);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    std::ostringstream msg;
    msg << e.what();
    if (opt.json()) {
      json j = report_skeleton("usage");
      j["error"] = msg.str();
      std::cerr << j.dump(2) << "\n";
    } else {
      std::cerr << "error: " << msg.str() << "\n";
    }
    return kExitUsage;
  }

  try {
    if (*gauss) {
      Int v = gaussian_binomial(g_n, g_k, g_q);
      if (opt.json()) {
        json j = report_skeleton("gauss");
        j["n"] = g_n;
        j["k"] = g_k;
        j["q"] = g_q;
        j["value"] = v.str();
        emit(j);
      } else {
        std::cout << v << "\n";
      }
      return kExitOk;
    }

    if (*enumc) {
      const FieldSpec& f = field_new(e_q);
      auto subs = enumerate_grassmannian(e_n, e_k, f);
      if (opt.json()) {
        json j = report_skeleton("enum");
        j["count"] = subs.size();
        json arr = json::array();
        for (const auto& s : subs) arr.push_back(s.key());
        j["subspaces"] = std::move(arr);
        emit(j);
      } else {
        for (const auto& s : subs) std::cout << s.key() << "\n";
      }
      return kExitOk;
    }

    if (*adm) {
      auto [ok, ratios] = admissible(a_t, a_k, a_n, a_q);
      if (opt.json()) {
        json j = report_skeleton("admissible");
        j["admissible"] = ok;
        json arr = json::array();
        for (const auto& r : ratios)
          arr.push_back(r.denominator() == 1 ? r.numerator().str()
                                             : r.numerator().str() + "/" + r.denominator().str());
        j["ratios"] = std::move(arr);
        emit(j);
      } else {
        std::cout << (ok ? "admissible" : "not admissible");
        for (const auto& r : ratios) {
          std::cout << ' ' << r.numerator();
          if (r.denominator() != 1) std::cout << '/' << r.denominator();
        }
        std::cout << "\n";
      }
      return ok ? kExitOk : kExitVerification;
    }

    if (*spr) {
      DesignMultiset d = spread_field_reduction(s_q, s_k, s_n);
      json j = report_skeleton("spread");
      j["blocks"] = d.total_size();
      deliver_payload(opt, j, "qsd1", to_qsd1(d), s_out);
      if (opt.json()) emit(j);
      return kExitOk;
    }

    if (*par) {
      auto spreads = parallelism_pg3(p_q);
      std::ostringstream ss;
      write_qsp1(ss, spreads);
      json j = report_skeleton("parallelism");
      j["spreads"] = spreads.size();
      j["lines_per_spread"] = p_q * p_q + 1;
      deliver_payload(opt, j, "qsp1", ss.str(), p_out);
      if (opt.json()) emit(j);
      return kExitOk;
    }

    if (*ver) {
      DesignMultiset d = load_design(v_file);
      const VerifyMode mode = v_mode == "exact" ? VerifyMode::exact : VerifyMode::packing;
      CoverageReport rep = verify_steiner(d, v_t, v_k, mode, opt.threads);
      if (opt.json()) {
        json j = report_skeleton("verify");
        j["file"] = v_file;
        j["report"] = coverage_json(rep);
        j["ok"] = rep.ok(mode);
        emit(j);
      } else {
        print_coverage_text(rep);
      }
      return rep.ok(mode) ? kExitOk : kExitVerification;
    }

    if (*der) {
      DesignMultiset d = load_design(d_file);
      const FieldSpec& f = *d.field;
      Subspace point = span({row_parse(d_point, f, d.n)}, f, d.n);
      DesignMultiset out = derived_design(d, d_t, d_k, point);
      json j = report_skeleton("derive");
      j["blocks"] = out.total_size();
      deliver_payload(opt, j, "qsd1", to_qsd1(out), d_out);
      if (opt.json()) emit(j);
      return kExitOk;
    }

    if (*peq) {
      auto pp = PuncturedParams::make(pe_q, pe_n, pe_p, pe_t);
      EquationSystem sys = build_equation_system(pp, opt.threads);
      std::ostringstream ss;
      if (pe_lp)
        write_equations_lp(ss, sys);
      else
        write_qeq1(ss, sys);
      json j = report_skeleton("punctured-build-eq");
      j["equations"] = sys.equations.size();
      j["variables"] = sys.variables.size();
      deliver_payload(opt, j, "qeq1", ss.str(), pe_out);
      if (opt.json()) emit(j);
      return kExitOk;
    }

    if (*pchk) {
      std::ifstream in(pc_system);
      if (!in) throw std::invalid_argument("cannot open system file: " + pc_system);
      EquationSystem sys = read_qeq1(in);
      SolutionReport rep;
      if (!pc_design.empty() && pc_uniform.empty()) {
        DesignMultiset d = load_design(pc_design);
        rep = check_solution(sys, &d, opt.threads);
      } else if (!pc_uniform.empty() && pc_design.empty()) {
        UniformSolution u;
        u.m = sys.params.m;
        std::stringstream us(pc_uniform);
        std::string tok;
        while (std::getline(us, tok, ',')) u.x.push_back(std::stoll(tok));
        rep = check_solution(sys, &u, opt.threads);
      } else {
        throw std::invalid_argument("punctured check: need exactly one of --design, --uniform");
      }
      if (opt.json()) {
        json j = report_skeleton("punctured-check");
        j["report"] = solution_json(rep);
        emit(j);
      } else {
        std::cout << (rep.consistent ? "consistent" : "inconsistent") << " ("
                  << rep.equations_checked << " equations, " << rep.violations.size()
                  << " violated, " << rep.invalid_blocks.size() << " invalid blocks)\n";
        for (std::size_t i = 0; i < rep.violations.size() && i < 8; ++i)
          std::cout << "  eq " << rep.violations[i].x.key() << ": lhs "
                    << rep.violations[i].lhs << " != rhs " << rep.violations[i].rhs << "\n";
      }
      return rep.consistent ? kExitOk : kExitVerification;
    }

    if (*c237) {
      std::vector<DesignMultiset> spreads =
          c_par.empty() ? parallelism_pg3(c_q) : load_parallelism(c_par);
      std::set<int> a_idx;
      if (!c_a.empty()) {
        a_idx = parse_index_list(c_a);
      } else {
        for (int i = 0; i < c_q * c_q; ++i) a_idx.insert(i);
      }
      DesignMultiset d = construct_s237_5(c_q, spreads, a_idx);
      json j = report_skeleton("construct-s237-5");
      j["blocks"] = d.total_size();
      deliver_payload(opt, j, "qsd1", to_qsd1(d), c_out);
      if (opt.json()) emit(j);
      return kExitOk;
    }

    if (*aud) {
      StructureAudit a = audit_formulas(au_q);
      json j = report_skeleton("audit");
      j["q"] = a.q;
      j["sizeA"] = to_ll(a.sizeA);
      j["sizeB"] = to_ll(a.sizeB);
      j["sizeAB"] = to_ll(a.sizeAB);
      j["sizeAonly"] = to_ll(a.sizeAonly);
      j["residual"] = to_ll(a.residual);
      j["total"] = to_ll(a.total);
      j["identity_holds"] = a.identity_holds();
      if (opt.json()) {
        emit(j);
      } else {
        std::cout << "sizeA=" << a.sizeA << " sizeB=" << a.sizeB << " sizeAB=" << a.sizeAB
                  << " sizeAonly=" << a.sizeAonly << " residual=" << a.residual
                  << " total=" << a.total << " identity=" << (a.identity_holds() ? "ok" : "BROKEN")
                  << "\n";
      }
      return a.identity_holds() ? kExitOk : kExitVerification;
    }

    if (*cls) {
      DesignMultiset d = load_design(cl_file);
      BlockClassification c = classify_blocks(d);
      json j = report_skeleton("classify");
      j["z_blocks"] = c.size_z();
      j["a_only"] = c.size_a_only();
      j["b_only"] = c.size_b_only();
      j["ab"] = c.size_ab();
      j["rest"] = c.size_rest();
      j["total"] = d.total_size();
      emit(j);  // classification is always reported as JSON
      return kExitOk;
    }

    if (*nor) {
      DesignMultiset d = load_design(n_file);
      DesignMultiset out = n_target == "z2" ? normalize_z1_z2(d) : normalize_z1_z3(d);
      json j = report_skeleton("normalize");
      j["target"] = n_target;
      j["blocks"] = out.total_size();
      deliver_payload(opt, j, "qsd1", to_qsd1(out), n_out);
      if (opt.json()) emit(j);
      return kExitOk;
    }

    if (*csp) {
      DesignMultiset d = load_design(csp_file);
      CoverageReport rep = spread_through_point_check(d, csp_coord, VerifyMode::packing,
                                                      opt.threads);
      json j = report_skeleton("check-spread-point");
      j["coord"] = csp_coord;
      j["report"] = coverage_json(rep);
      emit(j);
      return rep.verdict == Verdict::violation ? kExitVerification : kExitOk;
    }

    if (*cpf) {
      DesignMultiset d = load_design(cpf_file);
      PrefixDistribution dist = prefix_distribution_check(d);
      json j = report_skeleton("check-prefix");
      j["expected"] = dist.expected;
      json pts = json::array();
      for (const auto& pp : dist.points) {
        json tallies = json::object();
        for (const auto& [vec, cnt] : pp.tallies) tallies[row_format(vec, 4)] = cnt;
        pts.push_back({{"point", pp.point.key()},
                       {"blocks", pp.blocks_seen},
                       {"tallies", std::move(tallies)}});
      }
      j["points"] = std::move(pts);
      j["over_bound"] = dist.over_bound.size();
      emit(j);
      return dist.over_bound.empty() ? kExitOk : kExitVerification;
    }

    if (*cds) {
      DesignMultiset d = load_design(cds_file);
      auto bad = no_double_special(d);
      json j = report_skeleton("check-double-special");
      json arr = json::array();
      for (const auto& s : bad) arr.push_back(s.key());
      j["violations"] = std::move(arr);
      emit(j);
      return bad.empty() ? kExitOk : kExitVerification;
    }

    if (*czc) {
      DesignMultiset d = load_design(czc_file);
      json j = report_skeleton("check-zero-columns");
      json arr = json::array();
      for (const auto& [s, cols] : count_zero_column_blocks(d))
        arr.push_back({{"block", s.key()}, {"zero_columns", cols}});
      j["blocks"] = std::move(arr);
      emit(j);
      return kExitOk;
    }

    if (*spk) {
      auto prob = build_packing_problem(sp_q);
      ForcedBlocks z = forced_blocks(sp_q);
      std::vector<Subspace> forced;
      if (sp_forced == "z1z2") forced = {z.z1, z.z2};
      if (sp_forced == "z1z2z3") forced = {z.z1, z.z2, z.z3};
      PackingState st = initial_state(prob, forced, sp_seed);
      PackingState res =
          extend_packing(st, sp_budget, strategy_from_string(sp_strategy), opt.threads);
      json j = report_skeleton("search-pack");
      j["q"] = sp_q;
      j["seed"] = sp_seed;
      j["strategy"] = sp_strategy;
      j["budget_nodes"] = sp_budget;
      j["nodes"] = res.stats.nodes;
      j["size"] = res.stats.best_size;
      j["wall_ms"] = res.stats.wall_ms;
      j["coverage_recheck"] = recheck_coverage(res);
      deliver_payload(opt, j, "qsd1", to_qsd1(res.to_design()), sp_out);
      if (!sp_out.empty()) {
        std::ofstream sc(sp_out + ".json");
        sc << j.dump(2) << "\n";
      }
      if (opt.json())
        emit(j);
      else
        (sp_out.empty() ? std::cerr : std::cout)
            << "packing size " << res.stats.best_size << " (nodes " << res.stats.nodes << ")\n";
      return kExitOk;
    }

    if (*sab) {
      auto [res, rep] = build_ab_candidates(sa_q, sa_budget, sa_seed,
                                            strategy_from_string(sa_strategy), opt.threads);
      json j = report_skeleton("search-ab");
      j["q"] = sa_q;
      j["seed"] = sa_seed;
      j["strategy"] = sa_strategy;
      j["budget_nodes"] = sa_budget;
      j["nodes"] = rep.stats.nodes;
      j["family_size"] = rep.family_size;
      j["non_z_size"] = rep.non_z_size;
      j["target_non_z"] = to_ll(rep.target_non_z);
      j["ab_class"] = rep.ab_class;
      j["target_ab"] = to_ll(rep.target_ab);
      deliver_payload(opt, j, "qsd1", to_qsd1(res.to_design()), sa_out);
      if (!sa_out.empty()) {
        std::ofstream sc(sa_out + ".json");
        sc << j.dump(2) << "\n";
      }
      if (opt.json())
        emit(j);
      else
        (sa_out.empty() ? std::cerr : std::cout)
            << "family " << rep.family_size << " blocks; A-union-B progress " << rep.non_z_size
            << "/" << rep.target_non_z << ", A-cap-B " << rep.ab_class << "/" << rep.target_ab
            << "\n";
      return kExitOk;
    }

    if (*sp6) {
      auto [sys, rep] = search_punctured_6(s6_q, s6_budget, opt.threads);
      if (!s6_export.empty()) {
        std::ofstream os(s6_export);
        if (!os) throw std::invalid_argument("cannot write file: " + s6_export);
        write_qeq1(os, sys);
      }
      json j = report_skeleton("search-p6");
      j["q"] = s6_q;
      j["budget_nodes"] = s6_budget;
      j["nodes"] = rep.nodes;
      j["equations"] = rep.equations;
      j["variables"] = rep.variables;
      j["best_depth"] = rep.best_depth;
      j["best_satisfied"] = rep.best_satisfied;
      j["solved"] = rep.solved;
      deliver_payload(opt, j, "qsd1", to_qsd1(rep.best_assignment), s6_out);
      if (opt.json())
        emit(j);
      else
        (s6_out.empty() ? std::cerr : std::cout)
            << "p6: depth " << rep.best_depth << "/" << rep.variables << ", satisfied "
            << rep.best_satisfied << "/" << rep.equations << (rep.solved ? " SOLVED" : "")
            << "\n";
      return kExitOk;
    }

    throw std::logic_error("no subcommand dispatched");
  } catch (const capacity_error& e) {
    if (opt.json()) {
      json j = report_skeleton("error");
      j["error"] = e.what();
      j["kind"] = "capacity";
      std::cerr << j.dump(2) << "\n";
    } else {
      std::cerr << "capacity: " << e.what() << "\n";
    }
    return kExitCapacity;
  } catch (const std::exception& e) {
    if (opt.json()) {
      json j = report_skeleton("error");
      j["error"] = e.what();
      std::cerr << j.dump(2) << "\n";
    } else {
      std::cerr << "error: " << e.what() << "\n";
    }
    return kExitUsage;
  }
}
