#ifndef SROIQC_PREPROCESS_HPP
#define SROIQC_PREPROCESS_HPP

// Transforms a parsed KB into the reduced, normalized form the tableau
// consumes: universal-role elimination, A-Box partial reduction, role
// assertion rewriting, NNF, regularity/simplicity analysis, RIA-to-NFA
// compilation, and closure computation.

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "sroiqc/constraint.hpp"
#include "sroiqc/kb.hpp"

namespace sroiqc {

struct PreprocessError : KbError {
  using KbError::KbError;
};
struct NotRegularError : PreprocessError {
  using PreprocessError::PreprocessError;
};
struct PathViolationError : PreprocessError {
  using PreprocessError::PreprocessError;
};

// ---------------------------------------------------------------------------
// Role analysis

struct RoleAnalysis {
  // Role expressions (closed under inverse) that are simple.
  std::set<RoleExpr> simple_roles;
  // Role names in ascending precedence order; nullopt when no regular order
  // exists (analyze_roles then throws, so a stored analysis always has one).
  std::optional<std::vector<std::string>> regular_order_witness;
  // Reflexive-transitive closure of asserted unit inclusions, closed under
  // inverse, over abstract role expressions.
  std::set<std::pair<RoleExpr, RoleExpr>> subrole_closure;
  // Likewise for concrete roles (by name).
  std::set<std::pair<std::string, std::string>> concrete_subrole_closure;

  bool is_simple(const RoleExpr& r) const {
    if (r.universal) return false;
    return simple_roles.count(r) != 0;
  }
  bool is_subrole(const RoleExpr& sub, const RoleExpr& super) const {
    if (sub == super) return true;
    return subrole_closure.count({sub, super}) != 0;
  }
  bool is_concrete_subrole(const std::string& sub, const std::string& super) const {
    if (sub == super) return true;
    return concrete_subrole_closure.count({sub, super}) != 0;
  }
};

// ---------------------------------------------------------------------------
// Role automata

struct RoleAutomaton {
  struct Transition {
    std::uint32_t from;
    std::optional<RoleExpr> label;  // nullopt = epsilon
    std::uint32_t to;
    bool operator==(const Transition&) const = default;
    auto operator<=>(const Transition&) const = default;
  };

  std::uint32_t num_states = 0;
  std::uint32_t initial = 0;
  std::uint32_t final = 0;
  std::vector<Transition> transitions;

  std::set<std::uint32_t> eps_closure(std::uint32_t q) const;
  // Epsilon is in the language of the automaton started at q.
  bool accepts_epsilon_from(std::uint32_t q) const;
  // Role transitions available from q after epsilon closure, deterministic.
  std::vector<std::pair<RoleExpr, std::uint32_t>> role_moves(std::uint32_t q) const;
  // Word acceptance from the initial state (test support).
  bool accepts(const std::vector<RoleExpr>& word) const;
  // Mirror: initial/final swapped, transitions reversed with inverted labels.
  RoleAutomaton mirrored() const;
};

// ---------------------------------------------------------------------------
// Reduced KB

struct ReducedKB {
  // Internalized NNF(not C or D), one per GCI (including reduced A-Box
  // axioms and role-assertion rewrites).
  std::vector<Concept> tbox;
  // Residual A-Box facts, kept verbatim.
  std::vector<ConcreteValueFact> cvalues;
  std::vector<ConstraintFact> cconstraints;
  std::vector<DistinctFact> distincts;
  // Residual role assertions: Dis, Irr, plus Ref on non-simple roles (the
  // completion rules consume Ref directly when it cannot be rewritten to a
  // Self restriction).
  std::vector<RoleAssertion> residual_role_assertions;
  // One automaton per role name; inverse-role automata are mirrors.
  std::map<std::string, RoleAutomaton> automata;
  RoleAnalysis role_analysis;
  ConceptSet clos;
  const ConstraintSystemDef* system = nullptr;

  std::set<std::string> named_individuals;       // Nom is derived from these
  std::set<std::string> constraint_individuals;  // every one appears in a cvalue

  const RoleAutomaton& automaton(const RoleExpr& r) const;

 private:
  mutable std::map<std::string, RoleAutomaton> mirrored_cache_;
};

// ---------------------------------------------------------------------------
// Operations

// Replaces the universal role by a fresh transitive, symmetric, reflexive
// super-role of every role occurring in the KB. A KB without the universal
// role is returned unchanged.
KnowledgeBase eliminate_universal_role(const KnowledgeBase& kb);

// Rewrites C(a), R(a,b), not R(a,b) and distinctness assertions into GCIs
// over nominals; cvalue and cconstraint facts are retained.
KnowledgeBase reduce_abox(const KnowledgeBase& kb);

// Ref (on simple roles), Fxnl, Sym, Trans become GCIs or RIAs; Dis and Irr
// are retained (Irr additionally enforced through a Self restriction).
KnowledgeBase rewrite_role_assertions(const KnowledgeBase& kb);

// Simple-role computation, regular-order search, subrole closures, and the
// fatal path/simplicity validations. Throws NotRegularError (with the
// offending cycle) or PathViolationError.
RoleAnalysis analyze_roles(const KnowledgeBase& kb);

// Negation normal form. `sys` supplies the relation vocabulary for rewriting
// negated universal concrete concepts; it may be null for KBs without them.
Concept nnf(Concept c, const ConstraintSystemDef* sys);
// NNF(not c).
Concept nnf_negated(Concept c, const ConstraintSystemDef* sys);

// Builds the role automata for every role name occurring in the KB.
std::map<std::string, RoleAutomaton> compile_automata(const KnowledgeBase& kb,
                                                      const RoleAnalysis& analysis);

// Sub-closure of the internalized T-Box plus one automaton concept per
// universal restriction and automaton state.
ConceptSet compute_clos(const std::vector<Concept>& internalized_tbox, const ReducedKB& rkb);

struct PreprocessOptions {
  // Overrides the KB's (constraint-system ...) declaration.
  const ConstraintSystemDef* system_override = nullptr;
};

// The full pipeline, in order: universal-role elimination, A-Box reduction,
// role-assertion rewriting, role analysis, NNF internalization, automaton
// compilation, closure computation.
ReducedKB preprocess(const KnowledgeBase& kb, const PreprocessOptions& opts = {});

}  // namespace sroiqc

#endif  // SROIQC_PREPROCESS_HPP
