// Acceptance suite: one test case per criterion, each printing a PASS/FAIL
// line. Everything here is oracle- or property-based at desk scale.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <array>
#include <chrono>
#include <cstdio>
#include <random>

#include "generator.hpp"
#include "oracle_endpoints.hpp"
#include "oracle_models.hpp"
#include "sroiqc/circumscription.hpp"
#include "sroiqc/preprocess.hpp"
#include "sroiqc/query.hpp"
#include "sroiqc/tableau.hpp"
#include "sroiqc/text.hpp"

using namespace sroiqc;
using namespace sroiqc::testing;

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void report(int criterion, bool pass, const std::string& detail) {
  std::printf("%s criterion %d: %s\n", pass ? "PASS" : "FAIL", criterion, detail.c_str());
  std::fflush(stdout);
}

KnowledgeBase kb_of(const std::string& text) {
  ParseResult res = parse_document(text);
  REQUIRE(res.ok());
  return res.doc->kb;
}

// Valid endpoint configurations for 4 intervals, with precomputed atoms for
// all ordered pairs (i < j).
struct FourVarTable {
  std::vector<std::array<std::uint8_t, 6>> atoms;
  FourVarTable() {
    for (const auto& ranks : weak_orders(8)) {
      bool ok = true;
      for (int v = 0; v < 4 && ok; ++v)
        if (ranks[2 * v] >= ranks[2 * v + 1]) ok = false;
      if (!ok) continue;
      std::array<std::uint8_t, 6> row{};
      int p = 0;
      for (int i = 0; i < 4; ++i)
        for (int j = i + 1; j < 4; ++j)
          row[p++] = static_cast<std::uint8_t>(
              allen_atom(ranks[2 * i], ranks[2 * i + 1], ranks[2 * j], ranks[2 * j + 1]));
      atoms.push_back(row);
    }
  }
};

}  // namespace

TEST_CASE("criterion 1: constraint-algebra oracle equivalence") {
  auto t0 = std::chrono::steady_clock::now();
  const auto& sys = ConstraintSystemDef::allen();
  std::array<std::uint8_t, 13> to_sys{};
  for (int i = 0; i < 13; ++i) to_sys[i] = sys.index_of(kAllenNames[i]);

  int mismatches = 0;
  for (int r1 = 0; r1 < 13; ++r1)
    for (int r2 = 0; r2 < 13; ++r2)
      for (int r3 = 0; r3 < 13; ++r3) {
        RelNetwork n;
        n.constrain(sys, 0, 1, sys.singleton(to_sys[r1]));
        n.constrain(sys, 1, 2, sys.singleton(to_sys[r2]));
        n.constrain(sys, 0, 2, sys.singleton(to_sys[r3]));
        bool got = is_satisfiable(sys, n);
        bool want = allen_satisfiable(3, {{0, 1, r1}, {1, 2, r2}, {0, 2, r3}});
        if (got != want) ++mismatches;
      }
  int three_var = 13 * 13 * 13;

  FourVarTable table;
  std::mt19937_64 rng(1001);
  const std::array<std::pair<int, int>, 6> pairs = {
      {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}}};
  for (int inst = 0; inst < 500; ++inst) {
    std::array<int, 6> want_atom;
    RelNetwork n;
    for (int p = 0; p < 6; ++p) {
      if (rng() % 4 == 0) {
        want_atom[p] = -1;  // left unconstrained
        continue;
      }
      want_atom[p] = static_cast<int>(rng() % 13);
      n.constrain(sys, pairs[p].first, pairs[p].second, sys.singleton(to_sys[want_atom[p]]));
    }
    for (std::uint32_t v = 0; v < 4; ++v) n.add_variable(v);
    bool got = is_satisfiable(sys, n);
    bool want = false;
    for (const auto& row : table.atoms) {
      bool ok = true;
      for (int p = 0; p < 6 && ok; ++p)
        if (want_atom[p] >= 0 && row[p] != want_atom[p]) ok = false;
      if (ok) {
        want = true;
        break;
      }
    }
    if (got != want) ++mismatches;
  }
  double secs = seconds_since(t0);
  bool pass = mismatches == 0 && secs < 60.0;
  report(1, pass,
         "is_satisfiable vs endpoint oracle: " + std::to_string(three_var) +
             " exhaustive 3-var + 500 random 4-var networks, " + std::to_string(mismatches) +
             " mismatches, " + std::to_string(secs) + " s");
  CHECK(mismatches == 0);
  CHECK(secs < 60.0);
}

TEST_CASE("criterion 2: patchwork spot-check") {
  const auto& sys = ConstraintSystemDef::allen();
  std::mt19937_64 rng(1002);
  int failures = 0;
  int precondition_misses = 0;
  for (int inst = 0; inst < 200; ++inst) {
    auto sample = [&](std::vector<std::pair<int, int>>& iv) {
      iv.clear();
      for (int i = 0; i < 4; ++i) {
        int a = static_cast<int>(rng() % 12);
        int b = static_cast<int>(rng() % 12);
        if (a == b) b = a + 1;
        iv.push_back({std::min(a, b), std::max(a, b)});
      }
    };
    // scenario over intervals 0..3; intervals 2 and 3 are the shared part
    std::vector<std::pair<int, int>> m_iv;
    sample(m_iv);
    int shared_atom = allen_atom(m_iv[2].first, m_iv[2].second, m_iv[3].first, m_iv[3].second);
    // second scenario over intervals 2..5, agreeing on the shared pair
    std::vector<std::pair<int, int>> n_iv;
    for (int attempt = 0;; ++attempt) {
      sample(n_iv);
      if (allen_atom(n_iv[0].first, n_iv[0].second, n_iv[1].first, n_iv[1].second) ==
          shared_atom)
        break;
      REQUIRE(attempt < 100000);
    }
    auto atom_of = [&](const std::vector<std::pair<int, int>>& iv, int i, int j) {
      return allen_atom(iv[i].first, iv[i].second, iv[j].first, iv[j].second);
    };
    RelNetwork m, n;
    for (int i = 0; i < 4; ++i)
      for (int j = i + 1; j < 4; ++j) {
        m.constrain(sys, i, j, sys.singleton(sys.index_of(kAllenNames[atom_of(m_iv, i, j)])));
        n.constrain(sys, i + 2, j + 2,
                    sys.singleton(sys.index_of(kAllenNames[atom_of(n_iv, i, j)])));
      }
    try {
      if (!check_patchwork_instance(sys, m, n)) ++failures;
    } catch (const PreconditionViolatedError&) {
      ++precondition_misses;
    }
  }
  bool pass = failures == 0 && precondition_misses == 0;
  report(2, pass,
         "200 satisfiable network pairs with equal complete intersections, " +
             std::to_string(failures) + " patchwork failures");
  CHECK(failures == 0);
  CHECK(precondition_misses == 0);
}

TEST_CASE("criterion 3: tableau verdicts match bounded-domain enumeration") {
  auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(1003);
  int decided = 0, mismatches = 0, limit_hits = 0, too_big = 0, beyond_bound = 0;
  std::string first_mismatch;
  while (decided < 300) {
    KnowledgeBase kb = random_small_kb(rng);
    OracleVerdict want = kb_satisfiable(kb);
    if (want == OracleVerdict::TooBig) {
      ++too_big;
      continue;
    }
    ResourceLimits limits;
    limits.timeout_s = 10.0;
    Verdict got;
    ReducedKB rkb;
    try {
      rkb = preprocess(kb);
      Tableau engine(rkb, limits);
      got = engine.run();
    } catch (const PreprocessError&) {
      continue;  // irregular or otherwise rejected KBs are out of scope here
    }
    if (got.kind == VerdictKind::ResourceLimitExceeded) {
      ++limit_hits;
      continue;
    }
    ++decided;
    bool run_sat = got.kind == VerdictKind::Satisfiable;
    bool oracle_sat = want == OracleVerdict::Sat;
    if (oracle_sat && !run_sat) {
      // a model of size <= 3 exists and the engine missed it, or the engine
      // reported unsat that the enumerator refutes: both clauses violated
      ++mismatches;
      if (first_mismatch.empty()) first_mismatch = print_kb(kb);
    } else if (run_sat && !oracle_sat) {
      // satisfiable only beyond the enumerator's domain bound; the criterion
      // does not constrain this case, but the extracted model must still
      // survive the semantic checker
      if (validate_model(*got.model, rkb).empty()) {
        ++beyond_bound;
      } else {
        ++mismatches;
        if (first_mismatch.empty()) first_mismatch = print_kb(kb);
      }
    }
  }
  double secs = seconds_since(t0);
  bool pass = mismatches == 0 && decided >= 300;
  report(3, pass,
         std::to_string(decided) + " oracle-decidable KBs, " + std::to_string(mismatches) +
             " mismatches (" + std::to_string(beyond_bound) + " satisfiable beyond the bound, " +
             std::to_string(limit_hits) + " limit, " + std::to_string(too_big) +
             " oracle-skipped), " + std::to_string(secs) + " s");
  if (!first_mismatch.empty()) MESSAGE("first mismatching KB:\n" << first_mismatch);
  CHECK(mismatches == 0);
  CHECK(decided >= 300);
}

TEST_CASE("criterion 4: blocking regression") {
  bool pass = true;
  std::string detail;
  for (const char* text :
       {"(tbox (implies top (some R A)))",
        "(abox (instance a A)) (tbox (implies A (some R A)))"}) {
    auto t0 = std::chrono::steady_clock::now();
    ReducedKB rkb = preprocess(kb_of(text));
    Tableau engine(rkb, {});
    Verdict v = engine.run();
    double secs = seconds_since(t0);
    bool sat = v.kind == VerdictKind::Satisfiable;
    std::size_t violations = sat ? validate_model(*v.model, rkb).size() : 999;
    bool ok = sat && secs < 1.0 && v.stats.nodes <= 100 && violations == 0;
    pass = pass && ok;
    detail += std::string(ok ? "[ok " : "[FAIL ") + std::to_string(v.stats.nodes) +
              " nodes, " + std::to_string(secs) + " s, " + std::to_string(violations) +
              " violations] ";
    CHECK(sat);
    CHECK(secs < 1.0);
    CHECK(v.stats.nodes <= 100);
    CHECK(violations == 0);
  }
  report(4, pass, "blocking KBs terminate satisfiable: " + detail);
}

TEST_CASE("criterion 5: concrete-clash suite") {
  std::string base =
      "(constraint-system allen)\n"
      "(abox (cvalue a g i) (cvalue a g2 j)\n"
      "      (instance a (csome (path g) (path g2) before))\n"
      "      (instance a (call (path g) (path g2) %REL%)))\n"
      "(rbox (fxnl g) (fxnl g2))";
  auto run_with = [&](const char* rel) {
    std::string text = base;
    text.replace(text.find("%REL%"), 5, rel);
    auto t0 = std::chrono::steady_clock::now();
    Verdict v = decide(preprocess(kb_of(text)));
    return std::pair(v.kind, seconds_since(t0));
  };
  auto [bad_kind, bad_secs] = run_with("after");
  auto [good_kind, good_secs] = run_with("before");
  bool pass = bad_kind == VerdictKind::Unsatisfiable &&
              good_kind == VerdictKind::Satisfiable && bad_secs < 1.0 && good_secs < 1.0;
  report(5, pass,
         "functional-role contradiction unsat in " + std::to_string(bad_secs) +
             " s; before-variant sat in " + std::to_string(good_secs) + " s");
  CHECK(bad_kind == VerdictKind::Unsatisfiable);
  CHECK(good_kind == VerdictKind::Satisfiable);
  CHECK(bad_secs < 1.0);
  CHECK(good_secs < 1.0);
}

namespace {

std::set<std::vector<RoleExpr>> ria_language(const std::vector<AbstractRia>& rias,
                                             const RoleExpr& r, std::size_t max_len) {
  std::set<std::vector<RoleExpr>> words{{r}};
  bool changed = true;
  while (changed) {
    changed = false;
    std::set<std::vector<RoleExpr>> next = words;
    for (const auto& w : words)
      for (std::size_t i = 0; i < w.size(); ++i)
        for (const auto& ria : rias) {
          auto apply = [&](const RoleExpr& head, const std::vector<RoleExpr>& body) {
            if (!(w[i] == head)) return;
            std::vector<RoleExpr> out(w.begin(), w.begin() + i);
            out.insert(out.end(), body.begin(), body.end());
            out.insert(out.end(), w.begin() + i + 1, w.end());
            if (out.size() <= max_len && next.insert(out).second) changed = true;
          };
          apply(ria.rhs, ria.chain);
          std::vector<RoleExpr> inv_body;
          for (auto it = ria.chain.rbegin(); it != ria.chain.rend(); ++it)
            inv_body.push_back(it->inverted());
          apply(ria.rhs.inverted(), inv_body);
        }
    words = std::move(next);
  }
  std::set<std::vector<RoleExpr>> bounded;
  for (const auto& w : words)
    if (w.size() <= max_len) bounded.insert(w);
  return bounded;
}

int language_mismatches(const std::string& rbox_text, const std::string& role, int max_len) {
  KnowledgeBase kb = kb_of(rbox_text);
  RoleAnalysis an = analyze_roles(kb);
  auto automata = compile_automata(kb, an);
  const RoleAutomaton& b = automata.at(role);
  auto expected = ria_language(kb.rbox.abstract_rias, RoleExpr::named(role), max_len);
  std::set<std::string> names{role};
  for (const auto& ria : kb.rbox.abstract_rias) {
    for (const auto& e : ria.chain) names.insert(e.name);
    names.insert(ria.rhs.name);
  }
  std::vector<RoleExpr> alphabet;
  for (const auto& n : names) {
    alphabet.push_back(RoleExpr::named(n));
    alphabet.push_back(RoleExpr::inverse_of(n));
  }
  std::vector<std::vector<RoleExpr>> words{{}};
  std::size_t begin = 0;
  for (int len = 1; len <= max_len; ++len) {
    std::size_t end = words.size();
    for (std::size_t w = begin; w < end; ++w)
      for (const auto& sym : alphabet) {
        auto v = words[w];
        v.push_back(sym);
        words.push_back(v);
      }
    begin = end;
  }
  int mism = 0;
  for (const auto& w : words) {
    if (w.empty()) continue;
    if (b.accepts(w) != (expected.count(w) != 0)) ++mism;
  }
  return mism;
}

}  // namespace

TEST_CASE("criterion 6: NNF and automaton unit suite") {
  const ConstraintSystemDef* allen = &ConstraintSystemDef::allen();
  Concept a = Concept::atomic("A");
  Concept b = Concept::atomic("B");
  RoleExpr r = RoleExpr::named("R");
  auto neg = [&](Concept c) { return nnf(Concept::negation(c), allen); };
  bool nnf_ok = true;
  nnf_ok &= neg(Concept::negation(a)) == a;
  nnf_ok &= neg(Concept::conj(a, b)) ==
            Concept::disj(Concept::negation(a), Concept::negation(b));
  nnf_ok &= neg(Concept::disj(a, b)) ==
            Concept::conj(Concept::negation(a), Concept::negation(b));
  nnf_ok &= neg(Concept::exists(r, a)) == Concept::forall(r, Concept::negation(a));
  nnf_ok &= neg(Concept::forall(r, a)) == Concept::exists(r, Concept::negation(a));
  nnf_ok &= neg(Concept::at_most(1, r, a)) == Concept::at_least(2, r, a);
  nnf_ok &= neg(Concept::at_least(2, r, a)) == Concept::at_most(1, r, a);
  nnf_ok &= neg(Concept::at_least(0, r, a)) == Concept::bottom();
  nnf_ok &= neg(Concept::c_at_most(1, ConcreteRole{"g"})) ==
            Concept::c_at_least(2, ConcreteRole{"g"});
  nnf_ok &= neg(Concept::c_at_least(2, ConcreteRole{"g"})) ==
            Concept::c_at_most(1, ConcreteRole{"g"});
  nnf_ok &= neg(Concept::c_at_least(0, ConcreteRole{"g"})) == Concept::bottom();
  {
    Path pg{{}, ConcreteRole{"g"}};
    Concept cf = Concept::c_forall(pg, pg, "before");
    Concept out = neg(cf);
    int disjuncts = 1;
    Concept cur = out;
    while (cur.kind() == ConceptKind::Or) {
      ++disjuncts;
      nnf_ok &= cur.left().kind() == ConceptKind::CExists;
      cur = cur.right();
    }
    nnf_ok &= disjuncts == 12;
    Concept ce = Concept::c_exists(pg, pg, "before");
    nnf_ok &= neg(ce) == Concept::negation(ce);
  }
  CHECK(nnf_ok);

  int m1 = language_mismatches("(tbox (implies A (all R B)))", "R", 4);    // {R}
  int m2 = language_mismatches("(rbox (ria (chain R R) R))", "R", 4);      // RR <= R
  int m3 = language_mismatches("(rbox (ria (chain S T) R))", "R", 4);      // ST <= R
  int m4 = language_mismatches("(rbox (ria (chain (inv R)) R))", "R", 4);  // Inv(R) <= R
  bool aut_ok = m1 == 0 && m2 == 0 && m3 == 0 && m4 == 0;
  CHECK(m1 == 0);
  CHECK(m2 == 0);
  CHECK(m3 == 0);
  CHECK(m4 == 0);
  report(6, nnf_ok && aut_ok,
         "NNF rules verified; automaton language agreement on words <= 4 for {R}, {RR<=R}, "
         "{ST<=R}, {Inv(R)<=R}");
}

TEST_CASE("criterion 7: GC minimality and entailment agreement") {
  auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(1007);
  int minimality_checked = 0, minimality_violations = 0;
  int queries_checked = 0, query_mismatches = 0;
  std::string first_bad;
  while ((minimality_checked < 40 || queries_checked < 100) && seconds_since(t0) < 420.0) {
    KnowledgeBase kb = random_gc_kb(rng);
    auto enumerated = enumerate_grounded(kb);
    if (enumerated.too_big) continue;
    GcReasoner gc(kb, nullptr, {});
    GcVerdict v = gc.model_finder();
    if (v.kind == GcVerdictKind::ResourceLimitExceeded) continue;
    if (minimality_checked < 40) {
      ++minimality_checked;
      if (enumerated.extensions.empty()) {
        if (v.kind != GcVerdictKind::GcUnsatisfiable) {
          ++minimality_violations;
          if (first_bad.empty()) first_bad = print_kb(kb);
        }
      } else if (v.kind != GcVerdictKind::GcSatisfiable ||
                 enumerated.minimal().count(*v.extension) == 0) {
        ++minimality_violations;
        if (first_bad.empty()) first_bad = print_kb(kb);
      }
    }
    if (v.kind != GcVerdictKind::GcSatisfiable || queries_checked >= 100) continue;
    VocabularyReport vocab = free_vocabulary(kb);
    if (vocab.abstract_individuals.empty()) continue;
    std::vector<GcInstanceQuery> queries;
    for (const auto& ind : vocab.abstract_individuals) {
      queries.push_back({ind, Concept::atomic("A0")});
      queries.push_back({ind, Concept::disj(Concept::atomic("A0"), Concept::atomic("A1"))});
      if (queries.size() >= 4) break;
    }
    auto want = gc_entails_batch(kb, queries);
    if (!want) continue;
    GcReasoner gc2(kb, nullptr, {});
    auto minimal = gc2.minimal_extensions();
    if (!minimal) continue;
    for (std::size_t q = 0; q < queries.size() && queries_checked < 100; ++q) {
      GcAnswer got =
          gc2.entails_instance_on(*minimal, queries[q].individual, queries[q].concept_expr);
      if (!got.result) continue;
      ++queries_checked;
      if (*got.result != (*want)[q]) {
        ++query_mismatches;
        if (first_bad.empty())
          first_bad = print_concept(queries[q].concept_expr) + " @ " +
                      queries[q].individual + "\n" + print_kb(kb);
      }
    }
  }
  double secs = seconds_since(t0);
  bool pass = minimality_violations == 0 && query_mismatches == 0 &&
              minimality_checked >= 40 && queries_checked >= 100;
  report(7, pass,
         std::to_string(minimality_checked) + " KBs minimality-checked (" +
             std::to_string(minimality_violations) + " violations), " +
             std::to_string(queries_checked) + " entailment queries (" +
             std::to_string(query_mismatches) + " mismatches), " + std::to_string(secs) + " s");
  if (!first_bad.empty()) MESSAGE("first failing case:\n" << first_bad);
  CHECK(minimality_violations == 0);
  CHECK(query_mismatches == 0);
  CHECK(minimality_checked >= 40);
  CHECK(queries_checked >= 100);
}

TEST_CASE("criterion 8: round-trip and fuzz") {
  std::mt19937_64 rng(1008);
  int rt_failures = 0;
  for (int i = 0; i < 1000; ++i) {
    KnowledgeBase kb = canonical(random_grammar_kb(rng));
    ParseResult res = parse_document(print_kb(kb));
    if (!res.ok() || !(res.doc->kb == kb)) ++rt_failures;
  }
  int crashes = 0;  // any uncaught exception counts as a crash
  std::string base = print_kb(canonical(random_grammar_kb(rng)));
  for (int i = 0; i < 10000; ++i) {
    std::string text = base;
    int mutations = 1 + static_cast<int>(rng() % 10);
    for (int m = 0; m < mutations && !text.empty(); ++m) {
      std::size_t pos = rng() % text.size();
      switch (rng() % 3) {
        case 0: text[pos] = static_cast<char>(rng() % 256); break;
        case 1: text.erase(pos, 1); break;
        default: text.insert(pos, 1, static_cast<char>(rng() % 256)); break;
      }
    }
    try {
      (void)parse_document(text);
    } catch (...) {
      ++crashes;
    }
  }
  bool pass = rt_failures == 0 && crashes == 0;
  report(8, pass,
         "1000 random KBs round-tripped (" + std::to_string(rt_failures) +
             " failures); 10000 mutated inputs parsed (" + std::to_string(crashes) +
             " crashes)");
  CHECK(rt_failures == 0);
  CHECK(crashes == 0);
}
