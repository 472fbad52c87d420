#ifndef SROIQC_KB_HPP
#define SROIQC_KB_HPP

// Core vocabulary and AST for SROIQ(C) knowledge bases: roles, paths,
// concepts, axioms, assertions. Concepts are interned immutable trees;
// equality is syntactic (id comparison), no semantic normalization here.

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace sroiqc {

// ---------------------------------------------------------------------------
// Errors

struct KbError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct VocabularyClashError : KbError {
  using KbError::KbError;
};

// ---------------------------------------------------------------------------
// Roles and paths

// An abstract role: a named role, the inverse of a named role, or the
// universal role. Inverse is involutive at the type level; the universal
// role never appears under inverse.
struct RoleExpr {
  std::string name;      // empty iff universal
  bool inverse = false;
  bool universal = false;

  static RoleExpr named(std::string n) { return RoleExpr{std::move(n), false, false}; }
  static RoleExpr inverse_of(std::string n) { return RoleExpr{std::move(n), true, false}; }
  static RoleExpr universal_role() { return RoleExpr{"", false, true}; }

  // Inv(R): flips the inverse bit; Inv(U) = U.
  RoleExpr inverted() const {
    if (universal) return *this;
    return RoleExpr{name, !inverse, false};
  }

  bool operator==(const RoleExpr&) const = default;
  auto operator<=>(const RoleExpr&) const = default;
};

struct ConcreteRole {
  std::string name;
  bool operator==(const ConcreteRole&) const = default;
  auto operator<=>(const ConcreteRole&) const = default;
};

// A path: a (possibly empty, length <= 1 after PNF validation) abstract
// prefix followed by a concrete role.
struct Path {
  std::vector<RoleExpr> abstract_prefix;
  ConcreteRole concrete;

  std::size_t length() const { return abstract_prefix.size() + 1; }

  bool operator==(const Path&) const = default;
  auto operator<=>(const Path&) const = default;
};

// ---------------------------------------------------------------------------
// Concepts

enum class ConceptKind : std::uint8_t {
  Atomic,
  Nominal,
  Top,
  Bottom,
  And,
  Or,
  Not,
  Exists,
  Forall,
  AtLeast,
  AtMost,
  SelfRestriction,
  CAtLeast,          // >=_c n g
  CAtMost,           // <=_c n g
  CExists,           // exists_c U1,U2.r
  CForall,           // forall_c U1,U2.r
  CExistsInd,        // exists_c U,{i}.r  or  exists_c {i},U.r
  CForallInd,        // forall_c U,{i}.r  or  forall_c {i},U.r
  AutomatonForall,   // forall B(q).C  (tableau-internal)
};

// Which side of the relation the constraint individual occupies in the
// individual-anchored concrete concepts.
enum class IndividualSide : std::uint8_t { Left, Right };

// Interned concept handle. Construction goes through the static factories;
// two structurally equal concepts always share one id.
class Concept {
 public:
  Concept() : id_(0) {}  // default-constructed = Top (id 0 reserved below)

  static Concept atomic(const std::string& name);
  static Concept nominal(const std::string& individual);
  static Concept top();
  static Concept bottom();
  static Concept conj(Concept a, Concept b);
  static Concept disj(Concept a, Concept b);
  static Concept negation(Concept c);
  static Concept exists(const RoleExpr& r, Concept c);
  static Concept forall(const RoleExpr& r, Concept c);
  static Concept at_least(std::uint32_t n, const RoleExpr& r, Concept c);
  static Concept at_most(std::uint32_t n, const RoleExpr& r, Concept c);
  static Concept self_restriction(const RoleExpr& r);
  static Concept c_at_least(std::uint32_t n, const ConcreteRole& g);
  static Concept c_at_most(std::uint32_t n, const ConcreteRole& g);
  static Concept c_exists(const Path& u1, const Path& u2, const std::string& rel);
  static Concept c_forall(const Path& u1, const Path& u2, const std::string& rel);
  static Concept c_exists_ind(const Path& u, const std::string& individual,
                              IndividualSide side, const std::string& rel);
  static Concept c_forall_ind(const Path& u, const std::string& individual,
                              IndividualSide side, const std::string& rel);
  static Concept automaton_forall(const RoleExpr& role, std::uint32_t state, Concept filler);

  ConceptKind kind() const;
  // Accessors; only meaningful for the kinds that carry the field.
  const std::string& name() const;        // Atomic: concept name; Nominal: individual
  const std::string& relation() const;    // concrete concepts: relation symbol
  std::uint32_t cardinality() const;      // AtLeast/AtMost/CAtLeast/CAtMost
  std::uint32_t automaton_state() const;  // AutomatonForall
  const RoleExpr& role() const;           // role-quantified kinds
  const ConcreteRole& concrete_role() const;  // CAtLeast/CAtMost
  const Path& path1() const;              // CExists/CForall/CExistsInd/CForallInd
  const Path& path2() const;              // CExists/CForall
  IndividualSide individual_side() const; // CExistsInd/CForallInd
  Concept child() const;                  // Not / Exists / Forall / AtLeast / AtMost / AutomatonForall
  Concept left() const;                   // And/Or
  Concept right() const;                  // And/Or

  std::uint32_t id() const { return id_; }
  bool operator==(const Concept&) const = default;
  auto operator<=>(const Concept&) const = default;

 private:
  explicit Concept(std::uint32_t id) : id_(id) {}
  std::uint32_t id_;
  friend struct ConceptPool;
};

using ConceptSet = std::set<Concept>;

// sub(D): the closure of the three sub-expression clauses, computed as a
// fixpoint. Role-quantified forms (including negation) contribute their
// filler; And/Or contribute both operands; everything else only itself.
ConceptSet subexpressions(Concept d);

// ---------------------------------------------------------------------------
// Axioms

struct Gci {
  Concept lhs;
  Concept rhs;
  bool operator==(const Gci&) const = default;
  auto operator<=>(const Gci&) const = default;
};

struct AbstractRia {
  std::vector<RoleExpr> chain;  // length >= 1
  RoleExpr rhs;
  bool operator==(const AbstractRia&) const = default;
  auto operator<=>(const AbstractRia&) const = default;
};

struct ConcreteRia {
  ConcreteRole sub;
  ConcreteRole super;
  bool operator==(const ConcreteRia&) const = default;
  auto operator<=>(const ConcreteRia&) const = default;
};

enum class RoleAssertionKind : std::uint8_t {
  Reflexive,
  Irreflexive,
  Disjoint,
  Symmetric,
  Transitive,
  Functional,
};

// Role assertion over abstract roles, except Functional which may instead
// name a concrete role.
struct RoleAssertion {
  RoleAssertionKind kind;
  RoleExpr r1{};
  RoleExpr r2{};                         // Disjoint only
  std::optional<ConcreteRole> concrete;  // Functional on a concrete role
  bool operator==(const RoleAssertion&) const = default;
  auto operator<=>(const RoleAssertion&) const = default;
};

// ---------------------------------------------------------------------------
// Assertions

struct ConceptAssertion {
  std::string individual;
  Concept concept_expr;
  bool operator==(const ConceptAssertion&) const = default;
  auto operator<=>(const ConceptAssertion&) const = default;
};
struct RoleFact {  // R(a,b) or, when negated, not R(a,b)
  std::string a;
  std::string b;
  RoleExpr role;
  bool negated = false;
  bool operator==(const RoleFact&) const = default;
  auto operator<=>(const RoleFact&) const = default;
};
struct DistinctFact {
  std::string a;
  std::string b;
  bool operator==(const DistinctFact&) const = default;
  auto operator<=>(const DistinctFact&) const = default;
};
struct ConcreteValueFact {  // g(a, i)
  std::string individual;
  ConcreteRole role;
  std::string var;
  bool operator==(const ConcreteValueFact&) const = default;
  auto operator<=>(const ConcreteValueFact&) const = default;
};
struct ConstraintFact {  // (i r j)
  std::string v1;
  std::string rel;
  std::string v2;
  bool operator==(const ConstraintFact&) const = default;
  auto operator<=>(const ConstraintFact&) const = default;
};

using Assertion = std::variant<ConceptAssertion, RoleFact, DistinctFact,
                               ConcreteValueFact, ConstraintFact>;

// ---------------------------------------------------------------------------
// Knowledge base

struct CircumscriptionPattern {
  std::set<std::string> concepts;  // minimized atomic concept names
  std::set<std::string> roles;     // minimized named abstract roles
  bool empty() const { return concepts.empty() && roles.empty(); }
  bool operator==(const CircumscriptionPattern&) const = default;
};

struct RBox {
  std::vector<AbstractRia> abstract_rias;
  std::vector<ConcreteRia> concrete_rias;
  std::vector<RoleAssertion> assertions;
  bool operator==(const RBox&) const = default;
};

struct KnowledgeBase {
  std::vector<Assertion> abox;
  std::vector<Gci> tbox;
  RBox rbox;
  CircumscriptionPattern minimized;
  // From the (constraint-system ...) form; relations are validated against it.
  std::optional<std::string> constraint_system;

  bool operator==(const KnowledgeBase&) const = default;
};

// The five disjoint symbol sets plus the nominal set.
struct VocabularyReport {
  std::set<std::string> concepts;
  std::set<std::string> abstract_roles;
  std::set<std::string> concrete_roles;
  std::set<std::string> abstract_individuals;
  std::set<std::string> constraint_individuals;
  // Nominals correspond 1:1 to named abstract individuals.
  const std::set<std::string>& nominals() const { return abstract_individuals; }
};

// Collects the symbol sets of a KB; throws VocabularyClashError if one
// symbol is used in two syntactic categories.
VocabularyReport free_vocabulary(const KnowledgeBase& kb);

}  // namespace sroiqc

#endif  // SROIQC_KB_HPP
