#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "generator.hpp"
#include "oracle_models.hpp"
#include "sroiqc/preprocess.hpp"
#include "sroiqc/text.hpp"

using namespace sroiqc;
using testing::OracleVerdict;

namespace {

KnowledgeBase kb_of(const std::string& text) {
  ParseResult res = parse_document(text);
  REQUIRE_MESSAGE(res.ok(), "parse failure in test KB");
  return res.doc->kb;
}

bool mentions_universal(Concept c) {
  switch (c.kind()) {
    case ConceptKind::And:
    case ConceptKind::Or:
      return mentions_universal(c.left()) || mentions_universal(c.right());
    case ConceptKind::Not:
      return mentions_universal(c.child());
    case ConceptKind::Exists:
    case ConceptKind::Forall:
    case ConceptKind::AtLeast:
    case ConceptKind::AtMost:
      return c.role().universal || mentions_universal(c.child());
    case ConceptKind::SelfRestriction:
      return c.role().universal;
    default:
      return false;
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// eliminate_universal_role

TEST_CASE("universal role: KB without it is unchanged") {
  KnowledgeBase kb = kb_of("(tbox (implies A (some R B)))");
  CHECK(eliminate_universal_role(kb) == kb);
}

TEST_CASE("universal role: replacement and super-role axioms") {
  KnowledgeBase kb = kb_of("(tbox (implies top (all universal A)) (implies A (some R B)))");
  KnowledgeBase out = eliminate_universal_role(kb);
  for (const auto& gci : out.tbox) {
    CHECK_FALSE(mentions_universal(gci.lhs));
    CHECK_FALSE(mentions_universal(gci.rhs));
  }
  // R <= U' for every role occurring in the KB
  bool found_sub = false;
  std::string uprime;
  for (const auto& ria : out.rbox.abstract_rias)
    if (ria.chain.size() == 1 && ria.chain[0] == RoleExpr::named("R")) {
      found_sub = true;
      uprime = ria.rhs.name;
    }
  CHECK(found_sub);
  int tra = 0, sym = 0, ref = 0;
  for (const auto& ra : out.rbox.assertions) {
    if (ra.concrete || ra.r1.name != uprime) continue;
    if (ra.kind == RoleAssertionKind::Transitive) ++tra;
    if (ra.kind == RoleAssertionKind::Symmetric) ++sym;
    if (ra.kind == RoleAssertionKind::Reflexive) ++ref;
  }
  CHECK(tra == 1);
  CHECK(sym == 1);
  CHECK(ref == 1);
}

TEST_CASE("universal role: elimination preserves the oracle verdict") {
  KnowledgeBase kb = kb_of("(abox (instance a (some universal A)))");
  KnowledgeBase out = eliminate_universal_role(kb);
  CHECK(testing::kb_satisfiable(kb) == OracleVerdict::Sat);
  CHECK(testing::kb_satisfiable(out) == OracleVerdict::Sat);
}

// ---------------------------------------------------------------------------
// reduce_abox

TEST_CASE("abox reduction: concept assertion becomes nominal subsumption") {
  KnowledgeBase kb = kb_of("(abox (instance a A))");
  KnowledgeBase out = reduce_abox(kb);
  CHECK(out.abox.empty());
  REQUIRE(out.tbox.size() == 1);
  CHECK(out.tbox[0] == Gci{Concept::nominal("a"), Concept::atomic("A")});
}

TEST_CASE("abox reduction: role facts, negated role facts, distinctness") {
  KnowledgeBase kb = kb_of("(abox (related a b R) (not-related a b S) (distinct a b))");
  KnowledgeBase out = reduce_abox(kb);
  REQUIRE(out.tbox.size() == 3);
  CHECK(out.tbox[0] == Gci{Concept::nominal("a"),
                           Concept::exists(RoleExpr::named("R"), Concept::nominal("b"))});
  CHECK(out.tbox[1] ==
        Gci{Concept::nominal("a"),
            Concept::forall(RoleExpr::named("S"), Concept::negation(Concept::nominal("b")))});
  CHECK(out.tbox[2] == Gci{Concept::nominal("a"), Concept::negation(Concept::nominal("b"))});
  // the distinctness fact itself is retained for the initializer
  REQUIRE(out.abox.size() == 1);
  CHECK(std::holds_alternative<DistinctFact>(out.abox[0]));
}

TEST_CASE("abox reduction: empty KB is unchanged") {
  KnowledgeBase kb;
  CHECK(reduce_abox(kb) == kb);
}

TEST_CASE("abox reduction: cvalue and cconstraint facts are retained verbatim") {
  KnowledgeBase kb = kb_of(
      "(constraint-system point)\n"
      "(abox (cvalue a g i) (cvalue a g j) (cconstraint i lt j))");
  KnowledgeBase out = reduce_abox(kb);
  CHECK(out.abox.size() == 3);
  CHECK(out.tbox.empty());
}

TEST_CASE("abox reduction preserves the oracle verdict on small KBs") {
  std::mt19937_64 rng(11);
  int checked = 0;
  for (int i = 0; i < 40; ++i) {
    KnowledgeBase kb = testing::random_small_kb(rng);
    OracleVerdict before = testing::kb_satisfiable(kb);
    if (before == OracleVerdict::TooBig) continue;
    OracleVerdict after = testing::kb_satisfiable(reduce_abox(kb));
    if (after == OracleVerdict::TooBig) continue;
    CHECK(before == after);
    ++checked;
  }
  CHECK(checked > 10);
}

// ---------------------------------------------------------------------------
// rewrite_role_assertions

TEST_CASE("rewrites: functional concrete role") {
  KnowledgeBase kb = kb_of(
      "(constraint-system point)\n"
      "(abox (cvalue a g i))\n"
      "(rbox (fxnl g))");
  KnowledgeBase out = rewrite_role_assertions(kb);
  bool found = false;
  for (const auto& gci : out.tbox)
    if (gci == Gci{Concept::top(), Concept::c_at_most(1, ConcreteRole{"g"})}) found = true;
  CHECK(found);
  CHECK(out.rbox.assertions.empty());
}

TEST_CASE("rewrites: transitivity becomes a chain RIA") {
  KnowledgeBase kb = kb_of("(rbox (trans R))");
  KnowledgeBase out = rewrite_role_assertions(kb);
  REQUIRE(out.rbox.abstract_rias.size() == 1);
  CHECK(out.rbox.abstract_rias[0] ==
        AbstractRia{{RoleExpr::named("R"), RoleExpr::named("R")}, RoleExpr::named("R")});
}

TEST_CASE("rewrites: symmetry becomes an inverse RIA") {
  KnowledgeBase kb = kb_of("(rbox (sym R))");
  KnowledgeBase out = rewrite_role_assertions(kb);
  REQUIRE(out.rbox.abstract_rias.size() == 1);
  CHECK(out.rbox.abstract_rias[0] == AbstractRia{{RoleExpr::inverse_of("R")}, RoleExpr::named("R")});
}

TEST_CASE("rewrites: reflexivity on a simple role becomes a Self axiom") {
  KnowledgeBase kb = kb_of("(rbox (ref R))");
  KnowledgeBase out = rewrite_role_assertions(kb);
  bool found = false;
  for (const auto& gci : out.tbox)
    if (gci == Gci{Concept::top(), Concept::self_restriction(RoleExpr::named("R"))}) found = true;
  CHECK(found);
  CHECK(out.rbox.assertions.empty());
}

TEST_CASE("rewrites: reflexivity on a non-simple role stays in the R-Box") {
  KnowledgeBase kb = kb_of("(rbox (ref R) (trans R))");
  KnowledgeBase out = rewrite_role_assertions(kb);
  REQUIRE(out.rbox.assertions.size() == 1);
  CHECK(out.rbox.assertions[0].kind == RoleAssertionKind::Reflexive);
}

TEST_CASE("rewrites: functional abstract role uses the top filler") {
  KnowledgeBase kb = kb_of("(rbox (fxnl R))");
  KnowledgeBase out = rewrite_role_assertions(kb);
  bool found = false;
  for (const auto& gci : out.tbox)
    if (gci == Gci{Concept::top(), Concept::at_most(1, RoleExpr::named("R"), Concept::top())})
      found = true;
  CHECK(found);
}

TEST_CASE("rewrites: irreflexivity is retained and backed by a Self axiom") {
  KnowledgeBase kb = kb_of("(rbox (irr S))");
  KnowledgeBase out = rewrite_role_assertions(kb);
  REQUIRE(out.rbox.assertions.size() == 1);
  CHECK(out.rbox.assertions[0].kind == RoleAssertionKind::Irreflexive);
  bool found = false;
  for (const auto& gci : out.tbox)
    if (gci == Gci{Concept::top(),
                   Concept::negation(Concept::self_restriction(RoleExpr::named("S")))})
      found = true;
  CHECK(found);
}

// ---------------------------------------------------------------------------
// analyze_roles

TEST_CASE("analysis: RR <= R is regular and R is not simple") {
  KnowledgeBase kb = kb_of("(rbox (ria (chain R R) R))");
  RoleAnalysis an = analyze_roles(kb);
  CHECK(an.regular_order_witness.has_value());
  CHECK_FALSE(an.is_simple(RoleExpr::named("R")));
  CHECK_FALSE(an.is_simple(RoleExpr::inverse_of("R")));
}

TEST_CASE("analysis: crossing chain RIAs admit no regular order") {
  KnowledgeBase kb = kb_of("(rbox (ria (chain R S) S) (ria (chain S R) R))");
  CHECK_THROWS_AS((void)analyze_roles(kb), NotRegularError);
}

TEST_CASE("analysis: unit RIA keeps both roles simple") {
  KnowledgeBase kb = kb_of("(rbox (ria (chain P) Q))");
  RoleAnalysis an = analyze_roles(kb);
  CHECK(an.is_simple(RoleExpr::named("P")));
  CHECK(an.is_simple(RoleExpr::named("Q")));
  CHECK(an.is_simple(RoleExpr::inverse_of("P")));
  CHECK(an.is_simple(RoleExpr::inverse_of("Q")));
  CHECK(an.is_subrole(RoleExpr::named("P"), RoleExpr::named("Q")));
  CHECK(an.is_subrole(RoleExpr::inverse_of("P"), RoleExpr::inverse_of("Q")));
  CHECK_FALSE(an.is_subrole(RoleExpr::named("Q"), RoleExpr::named("P")));
}

TEST_CASE("analysis: non-simple roles are rejected in paths and counting") {
  KnowledgeBase kb = kb_of(
      "(constraint-system point)\n"
      "(abox (cvalue a g i))\n"
      "(rbox (trans R))\n"
      "(tbox (implies A (csome (path R g) (path g) lt)))");
  CHECK_THROWS_AS((void)analyze_roles(rewrite_role_assertions(kb)), PathViolationError);
  KnowledgeBase kb2 = kb_of("(rbox (trans R))\n(tbox (implies A (atleast 2 R B)))");
  CHECK_THROWS_AS((void)analyze_roles(rewrite_role_assertions(kb2)), PathViolationError);
}

TEST_CASE("analysis: simple roles never appear on the right of a long chain") {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 60; ++i) {
    KnowledgeBase kb = testing::random_small_kb(rng);
    RoleAnalysis an;
    try {
      an = analyze_roles(kb);
    } catch (const PreprocessError&) {
      continue;
    }
    for (const auto& ria : kb.rbox.abstract_rias)
      if (ria.chain.size() >= 2) CHECK_FALSE(an.is_simple(ria.rhs));
  }
}

// ---------------------------------------------------------------------------
// NNF

TEST_CASE("nnf: double negation") {
  Concept a = Concept::atomic("A");
  CHECK(nnf(Concept::negation(Concept::negation(a)), nullptr) == a);
}

TEST_CASE("nnf: all rewrite rules case by case") {
  const ConstraintSystemDef* allen = &ConstraintSystemDef::allen();
  Concept a = Concept::atomic("A");
  Concept b = Concept::atomic("B");
  RoleExpr r = RoleExpr::named("R");
  auto neg = [&](Concept c) { return nnf(Concept::negation(c), allen); };

  CHECK(neg(Concept::conj(a, b)) ==
        Concept::disj(Concept::negation(a), Concept::negation(b)));
  CHECK(neg(Concept::disj(a, b)) ==
        Concept::conj(Concept::negation(a), Concept::negation(b)));
  CHECK(neg(Concept::exists(r, a)) == Concept::forall(r, Concept::negation(a)));
  CHECK(neg(Concept::forall(r, a)) == Concept::exists(r, Concept::negation(a)));
  CHECK(neg(Concept::at_most(2, r, a)) == Concept::at_least(3, r, a));
  CHECK(neg(Concept::at_least(3, r, a)) == Concept::at_most(2, r, a));
  CHECK(neg(Concept::at_least(0, r, a)) == Concept::bottom());
  CHECK(neg(Concept::top()) == Concept::bottom());
  CHECK(neg(Concept::bottom()) == Concept::top());
  // concrete counting
  ConcreteRole g{"g"};
  CHECK(neg(Concept::c_at_most(2, g)) == Concept::c_at_least(3, g));
  CHECK(neg(Concept::c_at_least(3, g)) == Concept::c_at_most(2, g));
  CHECK(neg(Concept::c_at_least(0, g)) == Concept::bottom());
  // negation stays only on primary concepts
  CHECK(neg(a) == Concept::negation(a));
  CHECK(neg(Concept::nominal("x")) == Concept::negation(Concept::nominal("x")));
  CHECK(neg(Concept::self_restriction(r)) ==
        Concept::negation(Concept::self_restriction(r)));
  // negated concrete existentials are irreducible
  Path pg{{}, ConcreteRole{"g"}};
  Concept ce = Concept::c_exists(pg, pg, "before");
  CHECK(neg(ce) == Concept::negation(ce));
}

TEST_CASE("nnf: negated concrete universal becomes a 12-way disjunction") {
  const ConstraintSystemDef& allen = ConstraintSystemDef::allen();
  Path p1{{}, ConcreteRole{"g"}};
  Path p2{{}, ConcreteRole{"g2"}};
  Concept cf = Concept::c_forall(p1, p2, "before");
  Concept out = nnf(Concept::negation(cf), &allen);
  std::set<std::string> rels;
  Concept cur = out;
  while (cur.kind() == ConceptKind::Or) {
    Concept l = cur.left();
    REQUIRE(l.kind() == ConceptKind::CExists);
    rels.insert(l.relation());
    cur = cur.right();
  }
  REQUIRE(cur.kind() == ConceptKind::CExists);
  rels.insert(cur.relation());
  CHECK(rels.size() == 12);
  CHECK(rels.count("before") == 0);
}

TEST_CASE("nnf is idempotent") {
  std::mt19937_64 rng(3);
  const ConstraintSystemDef* point = &ConstraintSystemDef::point();
  for (int i = 0; i < 300; ++i) {
    Concept c = testing::random_concept(rng, 3, true);
    Concept once = nnf(c, point);
    CHECK(nnf(once, point) == once);
  }
}

TEST_CASE("nnf preserves satisfiability on the bounded-domain oracle") {
  std::mt19937_64 rng(17);
  int checked = 0;
  for (int i = 0; i < 80 && checked < 30; ++i) {
    Concept c = testing::random_concept(rng, 2, false);
    KnowledgeBase raw;
    raw.abox.push_back(ConceptAssertion{"zz", c});
    KnowledgeBase normal;
    normal.abox.push_back(ConceptAssertion{"zz", nnf(c, &ConstraintSystemDef::point())});
    OracleVerdict v1 = testing::kb_satisfiable(raw);
    OracleVerdict v2 = testing::kb_satisfiable(normal);
    if (v1 == OracleVerdict::TooBig || v2 == OracleVerdict::TooBig) continue;
    CHECK(v1 == v2);
    ++checked;
  }
  CHECK(checked >= 20);
}

// ---------------------------------------------------------------------------
// Automata

namespace {

// Brute-force language oracle: all role words derivable from R by RIA
// rewriting, up to the given length.
std::set<std::vector<RoleExpr>> ria_language(const std::vector<AbstractRia>& rias,
                                             const RoleExpr& r, std::size_t max_len) {
  std::set<std::vector<RoleExpr>> words{{r}};
  bool changed = true;
  while (changed) {
    changed = false;
    std::set<std::vector<RoleExpr>> next = words;
    for (const auto& w : words) {
      for (std::size_t i = 0; i < w.size(); ++i) {
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
      }
    }
    words = std::move(next);
  }
  std::set<std::vector<RoleExpr>> bounded;
  for (const auto& w : words)
    if (w.size() <= max_len) bounded.insert(w);
  return bounded;
}

KnowledgeBase kb_of2(const std::string& text) {
  ParseResult res = parse_document(text);
  REQUIRE(res.ok());
  return res.doc->kb;
}

void check_language(const std::string& rbox, const std::string& role_name,
                    std::size_t max_len) {
  KnowledgeBase kb = kb_of2(rbox);
  RoleAnalysis an = analyze_roles(kb);
  auto automata = compile_automata(kb, an);
  const RoleAutomaton& b = automata.at(role_name);
  std::set<std::vector<RoleExpr>> expected =
      ria_language(kb.rbox.abstract_rias, RoleExpr::named(role_name), max_len);
  std::set<std::string> names;
  for (const auto& ria : kb.rbox.abstract_rias) {
    for (const auto& e : ria.chain) names.insert(e.name);
    names.insert(ria.rhs.name);
  }
  names.insert(role_name);
  std::vector<RoleExpr> alphabet;
  for (const auto& n : names) {
    alphabet.push_back(RoleExpr::named(n));
    alphabet.push_back(RoleExpr::inverse_of(n));
  }
  std::vector<std::vector<RoleExpr>> words{{}};
  std::size_t begin = 0;
  for (std::size_t len = 1; len <= max_len; ++len) {
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
    bool want = expected.count(w) != 0;
    bool got = b.accepts(w);
    if (got != want) ++mism;
  }
  CHECK_MESSAGE(mism == 0, "language mismatch for " << role_name << " under " << rbox);
}

}  // namespace

TEST_CASE("automaton: role with no RIAs accepts exactly itself") {
  KnowledgeBase kb = kb_of("(tbox (implies A (all R B)))");
  RoleAnalysis an = analyze_roles(kb);
  auto automata = compile_automata(kb, an);
  const RoleAutomaton& b = automata.at("R");
  CHECK(b.accepts({RoleExpr::named("R")}));
  CHECK_FALSE(b.accepts({}));
  CHECK_FALSE(b.accepts({RoleExpr::named("R"), RoleExpr::named("R")}));
  CHECK_FALSE(b.accepts({RoleExpr::inverse_of("R")}));
}

TEST_CASE("automaton: transitive role accepts R+") {
  check_language("(rbox (ria (chain R R) R))", "R", 4);
}

TEST_CASE("automaton: chain RIA ST <= R") {
  check_language("(rbox (ria (chain S T) R))", "R", 4);
}

TEST_CASE("automaton: symmetric closure Inv(R) <= R") {
  check_language("(rbox (ria (chain (inv R)) R))", "R", 4);
}

TEST_CASE("automaton: hierarchy plus transitivity") {
  check_language("(rbox (ria (chain S) R) (ria (chain S S) S))", "R", 4);
}

TEST_CASE("automaton: left and right recursion shapes") {
  check_language("(rbox (ria (chain R S) S))", "S", 4);
  check_language("(rbox (ria (chain S R) R))", "R", 4);
}

TEST_CASE("automaton: mirrored automaton serves the inverse role") {
  KnowledgeBase kb = kb_of("(rbox (ria (chain S T) R))");
  ReducedKB rkb = preprocess(kb);
  const RoleAutomaton& binv = rkb.automaton(RoleExpr::inverse_of("R"));
  CHECK(binv.accepts({RoleExpr::inverse_of("R")}));
  CHECK(binv.accepts({RoleExpr::inverse_of("T"), RoleExpr::inverse_of("S")}));
  CHECK_FALSE(binv.accepts({RoleExpr::named("S"), RoleExpr::named("T")}));
}

// ---------------------------------------------------------------------------
// clos

TEST_CASE("clos: single subsumption") {
  KnowledgeBase kb = kb_of("(tbox (implies A B))");
  ReducedKB rkb = preprocess(kb);
  Concept internalized =
      Concept::disj(Concept::negation(Concept::atomic("A")), Concept::atomic("B"));
  CHECK(rkb.clos.count(internalized) == 1);
  CHECK(rkb.clos.count(Concept::negation(Concept::atomic("A"))) == 1);
  CHECK(rkb.clos.count(Concept::atomic("B")) == 1);
}

TEST_CASE("clos: universal restriction gains an automaton concept per state") {
  KnowledgeBase kb = kb_of("(tbox (implies A (all S B)))");
  ReducedKB rkb = preprocess(kb);
  const RoleAutomaton& aut = rkb.automaton(RoleExpr::named("S"));
  CHECK(aut.num_states == 2);
  for (std::uint32_t q = 0; q < aut.num_states; ++q)
    CHECK(rkb.clos.count(Concept::automaton_forall(RoleExpr::named("S"), q,
                                                   Concept::atomic("B"))) == 1);
}

TEST_CASE("clos: empty tbox") {
  KnowledgeBase kb;
  ReducedKB rkb = preprocess(kb);
  CHECK(rkb.clos.empty());
}

TEST_CASE("preprocess: unanchored constraint individuals are rejected") {
  KnowledgeBase kb = kb_of(
      "(constraint-system point)\n"
      "(abox (cvalue a g i))");
  CHECK_NOTHROW((void)preprocess(kb));
  KnowledgeBase bad = kb;
  bad.abox.push_back(ConstraintFact{"i", "lt", "k"});
  CHECK_THROWS_AS((void)preprocess(bad), PreprocessError);
}

TEST_CASE("whole pipeline keeps oracle verdicts stable across each transformation") {
  std::mt19937_64 rng(23);
  int checked = 0;
  for (int i = 0; i < 60 && checked < 25; ++i) {
    KnowledgeBase kb = testing::random_small_kb(rng);
    OracleVerdict v0 = testing::kb_satisfiable(kb);
    if (v0 == OracleVerdict::TooBig) continue;
    KnowledgeBase k1 = eliminate_universal_role(kb);
    OracleVerdict v1 = testing::kb_satisfiable(k1);
    if (v1 != OracleVerdict::TooBig) CHECK(v0 == v1);
    KnowledgeBase k2 = reduce_abox(k1);
    OracleVerdict v2 = testing::kb_satisfiable(k2);
    if (v2 != OracleVerdict::TooBig) CHECK(v0 == v2);
    KnowledgeBase k3 = rewrite_role_assertions(k2);
    OracleVerdict v3 = testing::kb_satisfiable(k3);
    if (v3 != OracleVerdict::TooBig) CHECK(v0 == v3);
    ++checked;
  }
  CHECK(checked >= 15);
}
