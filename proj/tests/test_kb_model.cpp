#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "sroiqc/kb.hpp"
#include "sroiqc/text.hpp"

using namespace sroiqc;

TEST_CASE("role expressions") {
  RoleExpr r = RoleExpr::named("R");
  CHECK(r.inverted().inverse);
  CHECK(r.inverted().inverted() == r);  // involutive
  RoleExpr u = RoleExpr::universal_role();
  CHECK(u.inverted() == u);  // the universal role never appears under inverse
}

TEST_CASE("concept interning gives syntactic equality") {
  Concept a1 = Concept::conj(Concept::atomic("A"), Concept::atomic("B"));
  Concept a2 = Concept::conj(Concept::atomic("A"), Concept::atomic("B"));
  CHECK(a1 == a2);
  CHECK(a1.id() == a2.id());
  Concept b = Concept::conj(Concept::atomic("B"), Concept::atomic("A"));
  CHECK(a1 != b);  // no semantic normalization
  CHECK(a1.left() == Concept::atomic("A"));
  CHECK(a1.right() == Concept::atomic("B"));
}

TEST_CASE("free_vocabulary: empty KB") {
  KnowledgeBase kb;
  VocabularyReport v = free_vocabulary(kb);
  CHECK(v.concepts.empty());
  CHECK(v.abstract_roles.empty());
  CHECK(v.concrete_roles.empty());
  CHECK(v.abstract_individuals.empty());
  CHECK(v.constraint_individuals.empty());
}

TEST_CASE("free_vocabulary: direct read-off") {
  KnowledgeBase kb;
  kb.abox.push_back(ConceptAssertion{"a", Concept::atomic("A")});
  kb.abox.push_back(ConcreteValueFact{"a", ConcreteRole{"g"}, "i"});
  VocabularyReport v = free_vocabulary(kb);
  CHECK(v.concepts == std::set<std::string>{"A"});
  CHECK(v.abstract_individuals == std::set<std::string>{"a"});
  CHECK(v.concrete_roles == std::set<std::string>{"g"});
  CHECK(v.constraint_individuals == std::set<std::string>{"i"});
  CHECK(v.nominals() == std::set<std::string>{"a"});
}

TEST_CASE("free_vocabulary: clash when one symbol is concept and role") {
  KnowledgeBase kb;
  kb.abox.push_back(ConceptAssertion{"a", Concept::atomic("R")});
  kb.abox.push_back(RoleFact{"a", "a", RoleExpr::named("R"), false});
  CHECK_THROWS_AS(free_vocabulary(kb), VocabularyClashError);
}

TEST_CASE("subexpressions: atomic") {
  Concept a = Concept::atomic("A");
  CHECK(subexpressions(a) == ConceptSet{a});
}

TEST_CASE("subexpressions: conjunction") {
  Concept a = Concept::atomic("A");
  Concept b = Concept::atomic("B");
  Concept ab = Concept::conj(a, b);
  CHECK(subexpressions(ab) == ConceptSet{ab, a, b});
}

TEST_CASE("subexpressions: recursive closure of exists over disjunction") {
  Concept a = Concept::atomic("A");
  Concept b = Concept::atomic("B");
  Concept ab = Concept::disj(a, b);
  Concept e = Concept::exists(RoleExpr::named("R"), ab);
  CHECK(subexpressions(e) == ConceptSet{e, ab, a, b});
}

TEST_CASE("subexpressions is monotone under membership") {
  Concept a = Concept::atomic("A");
  Concept c = Concept::forall(RoleExpr::named("R"),
                              Concept::conj(a, Concept::negation(Concept::atomic("B"))));
  ConceptSet outer = subexpressions(c);
  for (Concept x : outer) {
    for (Concept y : subexpressions(x)) CHECK(outer.count(y) == 1);
  }
}

TEST_CASE("every grammar constructor is representable and printable") {
  Path pg{{}, ConcreteRole{"g"}};
  Path prg{{RoleExpr::named("R")}, ConcreteRole{"g"}};
  std::vector<Concept> all = {
      Concept::atomic("A"),
      Concept::nominal("a"),
      Concept::top(),
      Concept::bottom(),
      Concept::conj(Concept::atomic("A"), Concept::atomic("B")),
      Concept::disj(Concept::atomic("A"), Concept::atomic("B")),
      Concept::negation(Concept::atomic("A")),
      Concept::exists(RoleExpr::named("R"), Concept::top()),
      Concept::forall(RoleExpr::inverse_of("R"), Concept::top()),
      Concept::at_least(2, RoleExpr::named("S"), Concept::atomic("A")),
      Concept::at_most(1, RoleExpr::named("S"), Concept::atomic("A")),
      Concept::self_restriction(RoleExpr::named("S")),
      Concept::c_at_least(1, ConcreteRole{"g"}),
      Concept::c_at_most(2, ConcreteRole{"g"}),
      Concept::c_exists(prg, pg, "before"),
      Concept::c_forall(pg, prg, "after"),
      Concept::c_exists_ind(pg, "i", IndividualSide::Right, "before"),
      Concept::c_forall_ind(pg, "i", IndividualSide::Left, "after"),
  };
  for (Concept c : all) CHECK(!print_concept(c).empty());
}
