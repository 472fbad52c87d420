#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "generator.hpp"
#include "oracle_models.hpp"
#include "sroiqc/circumscription.hpp"
#include "sroiqc/preprocess.hpp"
#include "sroiqc/text.hpp"

using namespace sroiqc;

namespace {

KnowledgeBase kb_of(const std::string& text) {
  ParseResult res = parse_document(text);
  REQUIRE_MESSAGE(res.ok(), "parse failure in test KB");
  return res.doc->kb;
}

GcReasoner reasoner(const KnowledgeBase& kb) { return GcReasoner(kb, nullptr, {}); }

}  // namespace

TEST_CASE("nominal disjunction encodes the empty set as bottom") {
  CHECK(nominal_disjunction({}) == Concept::bottom());
  CHECK(nominal_disjunction({"a"}) == Concept::nominal("a"));
  CHECK(nominal_disjunction({"a", "b"}) ==
        Concept::disj(Concept::nominal("a"), Concept::nominal("b")));
}

TEST_CASE("init_tab: no minimized predicates behaves like plain satisfiability") {
  KnowledgeBase kb = kb_of("(abox (instance a A))");
  GcReasoner gc = reasoner(kb);
  Verdict v = gc.init_tab();
  CHECK(v.kind == VerdictKind::Satisfiable);
}

TEST_CASE("init_tab: minimized concept extension stays within named individuals") {
  KnowledgeBase kb = kb_of("(abox (instance a A)) (minimize A)");
  GcReasoner gc = reasoner(kb);
  Verdict v = gc.init_tab();
  REQUIRE(v.kind == VerdictKind::Satisfiable);
  GroundedExtension ext = gc.extract_extension(*v.model);
  REQUIRE(ext.concepts.count("A"));
  CHECK(ext.concepts.at("A") == std::set<std::string>{"a"});
}

TEST_CASE("init_tab: minimized role forced among named pairs") {
  KnowledgeBase kb = kb_of(
      "(abox (instance a A)) (tbox (implies A (some R A))) (minimize-role R)");
  GcReasoner gc = reasoner(kb);
  Verdict v = gc.init_tab();
  REQUIRE(v.kind == VerdictKind::Satisfiable);
  GroundedExtension ext = gc.extract_extension(*v.model);
  REQUIRE(ext.roles.count("R"));
  CHECK(ext.roles.at("R") ==
        std::set<std::pair<std::string, std::string>>{{"a", "a"}});
}

TEST_CASE("extract_extension: role extension with derived domain and range") {
  KnowledgeBase kb = kb_of("(abox (related a b R)) (minimize-role R)");
  GcReasoner gc = reasoner(kb);
  Verdict v = gc.init_tab();
  REQUIRE(v.kind == VerdictKind::Satisfiable);
  GroundedExtension ext = gc.extract_extension(*v.model);
  CHECK(ext.roles.at("R") ==
        std::set<std::pair<std::string, std::string>>{{"a", "b"}});
  CHECK(ext.role_domain("R") == std::set<std::string>{"a"});
  CHECK(ext.role_range("R") == std::set<std::string>{"b"});
  CHECK(ext.role_range_from("R", "a") == std::set<std::string>{"b"});
}

TEST_CASE("min_tab: empty extension admits nothing strictly below") {
  KnowledgeBase kb = kb_of("(abox (instance a top)) (minimize A)");
  GcReasoner gc = reasoner(kb);
  Verdict v0 = gc.init_tab();
  REQUIRE(v0.kind == VerdictKind::Satisfiable);
  GroundedExtension empty;
  empty.concepts["A"];
  Verdict v = gc.min_tab(empty);
  CHECK(v.kind == VerdictKind::Unsatisfiable);
}

TEST_CASE("min_tab: disjunction branch gives a strictly smaller model") {
  KnowledgeBase kb = kb_of("(abox (instance a (or A B))) (minimize A)");
  GcReasoner gc = reasoner(kb);
  GroundedExtension ext;
  ext.concepts["A"] = {"a"};  // as if the A-branch had been taken
  Verdict v = gc.min_tab(ext);
  REQUIRE(v.kind == VerdictKind::Satisfiable);
  GroundedExtension smaller = gc.extract_extension(*v.model);
  CHECK(smaller.concepts.at("A").empty());
  CHECK(smaller.strictly_below(ext));
}

TEST_CASE("min_tab: extension shrinks to what the KB forces") {
  KnowledgeBase kb = kb_of("(abox (instance a A) (instance b top)) (minimize A)");
  GcReasoner gc = reasoner(kb);
  GroundedExtension ext;
  ext.concepts["A"] = {"a", "b"};
  Verdict v = gc.min_tab(ext);
  REQUIRE(v.kind == VerdictKind::Satisfiable);
  GroundedExtension smaller = gc.extract_extension(*v.model);
  CHECK(smaller.concepts.at("A") == std::set<std::string>{"a"});
}

TEST_CASE("model_finder: unconstrained minimized concept ends empty") {
  KnowledgeBase kb = kb_of("(abox (instance a A)) (minimize B)");
  GcReasoner gc = reasoner(kb);
  GcVerdict v = gc.model_finder();
  REQUIRE(v.kind == GcVerdictKind::GcSatisfiable);
  CHECK(v.extension->concepts.at("B").empty());
}

TEST_CASE("model_finder: inconsistent KB is GC-unsatisfiable") {
  KnowledgeBase kb = kb_of("(abox (instance a A)) (tbox (implies A bottom)) (minimize A)");
  GcReasoner gc = reasoner(kb);
  GcVerdict v = gc.model_finder();
  CHECK(v.kind == GcVerdictKind::GcUnsatisfiable);
}

TEST_CASE("model_finder: disjunction minimizes away the minimized branch") {
  KnowledgeBase kb = kb_of("(abox (instance a (or A B))) (minimize A)");
  GcReasoner gc = reasoner(kb);
  GcVerdict v = gc.model_finder();
  REQUIRE(v.kind == GcVerdictKind::GcSatisfiable);
  CHECK(v.extension->concepts.at("A").empty());
}

TEST_CASE("model_finder: forced membership survives minimization") {
  KnowledgeBase kb = kb_of("(abox (instance a A)) (minimize A)");
  GcReasoner gc = reasoner(kb);
  GcVerdict v = gc.model_finder();
  REQUIRE(v.kind == GcVerdictKind::GcSatisfiable);
  CHECK(v.extension->concepts.at("A") == std::set<std::string>{"a"});
}

TEST_CASE("gc_entails: minimization forces the unminimized branch") {
  KnowledgeBase kb = kb_of("(abox (instance a (or A B))) (tbox (implies B C)) (minimize A)");
  GcReasoner gc = reasoner(kb);
  GcAnswer ans = gc.entails_instance("a", Concept::atomic("C"));
  REQUIRE(ans.result.has_value());
  CHECK(*ans.result == true);
  // classically (without minimization) C(a) is not entailed
  GcReasoner gc2 = reasoner(kb_of("(abox (instance a (or A B))) (tbox (implies B C))"));
  GcAnswer classical = gc2.entails_instance("a", Concept::atomic("C"));
  REQUIRE(classical.result.has_value());
  CHECK(*classical.result == false);
}

TEST_CASE("gc_entails: empty pattern is classical entailment") {
  KnowledgeBase kb = kb_of("(abox (instance a A))");
  GcReasoner gc = reasoner(kb);
  GcAnswer ans = gc.entails_instance("a", Concept::atomic("A"));
  REQUIRE(ans.result.has_value());
  CHECK(*ans.result == true);
}

TEST_CASE("gc concept satisfiability: minimized-away concept is unsatisfiable") {
  KnowledgeBase kb = kb_of("(abox (instance a A)) (minimize B)");
  GcReasoner gc = reasoner(kb);
  GcAnswer ans = gc.concept_satisfiable(Concept::atomic("B"));
  REQUIRE(ans.result.has_value());
  CHECK(*ans.result == false);
  GcAnswer a2 = reasoner(kb).concept_satisfiable(Concept::atomic("A"));
  REQUIRE(a2.result.has_value());
  CHECK(*a2.result == true);
}

TEST_CASE("gc_subsumes reduces to gc concept unsatisfiability") {
  KnowledgeBase kb = kb_of("(abox (instance a (or A B))) (minimize A)");
  // under minimization every GC-model keeps A empty, so A <= B holds
  GcAnswer ans = reasoner(kb).subsumes(Concept::atomic("A"), Concept::atomic("B"));
  REQUIRE(ans.result.has_value());
  CHECK(*ans.result == true);
}

TEST_CASE("model_finder minimality matches the grounded-enumeration oracle") {
  std::mt19937_64 rng(301);
  int checked = 0, i = 0;
  while (checked < 12 && i < 120) {
    ++i;
    KnowledgeBase kb = testing::random_gc_kb(rng);
    auto enumerated = testing::enumerate_grounded(kb);
    if (enumerated.too_big) continue;
    GcReasoner gc = reasoner(kb);
    GcVerdict v = gc.model_finder();
    if (v.kind == GcVerdictKind::ResourceLimitExceeded) continue;
    if (enumerated.extensions.empty()) {
      CHECK_MESSAGE(v.kind == GcVerdictKind::GcUnsatisfiable,
                    "expected GC-unsat for:\n" << print_kb(kb));
    } else {
      REQUIRE_MESSAGE(v.kind == GcVerdictKind::GcSatisfiable,
                      "expected GC-sat for:\n" << print_kb(kb));
      auto minimal = enumerated.minimal();
      CHECK_MESSAGE(minimal.count(*v.extension) == 1,
                    "non-minimal extension for:\n" << print_kb(kb));
    }
    ++checked;
  }
  CHECK(checked >= 10);
}

TEST_CASE("gc_entails agrees with the enumeration oracle on random queries") {
  std::mt19937_64 rng(302);
  int checked = 0, i = 0;
  while (checked < 10 && i < 100) {
    ++i;
    KnowledgeBase kb = testing::random_gc_kb(rng);
    auto enumerated = testing::enumerate_grounded(kb);
    if (enumerated.too_big || enumerated.extensions.empty()) continue;
    Concept query = (i % 2) ? Concept::atomic("A1")
                            : Concept::disj(Concept::atomic("A0"), Concept::atomic("A1"));
    VocabularyReport vocab = free_vocabulary(kb);
    if (vocab.abstract_individuals.empty()) continue;
    std::string ind = *vocab.abstract_individuals.begin();
    auto want = testing::gc_entails_instance(kb, ind, query);
    if (!want) continue;
    GcReasoner gc = reasoner(kb);
    GcAnswer got = gc.entails_instance(ind, query);
    if (!got.result) continue;
    CHECK_MESSAGE(*got.result == *want,
                  "entailment disagreement on " << print_concept(query) << " for:\n"
                                                << print_kb(kb));
    ++checked;
  }
  CHECK(checked >= 8);
}
