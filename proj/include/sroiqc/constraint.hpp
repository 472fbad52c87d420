#ifndef SROIQC_CONSTRAINT_HPP
#define SROIQC_CONSTRAINT_HPP

// Qualitative constraint systems (Allen interval algebra, RCC8, point
// algebra, or custom TSV-loaded tables) plus Rel-networks, satisfiability,
// and complete-refinement enumeration. The model set of a system is never
// materialized: the decision procedure plus the completion enumerator stand
// in for membership tests.

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace sroiqc {

struct ConstraintError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct UnknownRelationError : ConstraintError {
  using ConstraintError::ConstraintError;
};
struct EmptyLabelError : ConstraintError {
  using ConstraintError::ConstraintError;
};
struct PreconditionViolatedError : ConstraintError {
  using ConstraintError::ConstraintError;
};

// Disjunctive label over base relations, one bit per relation index.
using RelSet = std::uint64_t;

// A finite JEPD base-relation vocabulary with converse and composition
// tables. Immutable once built; safe to share.
class ConstraintSystemDef {
 public:
  ConstraintSystemDef(std::string name, std::vector<std::string> relations,
                      std::vector<std::uint8_t> converse,
                      std::vector<std::vector<RelSet>> composition,
                      std::uint8_t identity);

  const std::string& name() const { return name_; }
  std::size_t arity() const { return relations_.size(); }
  const std::vector<std::string>& relations() const { return relations_; }
  const std::string& relation_name(std::size_t i) const { return relations_[i]; }
  std::uint8_t identity() const { return identity_; }

  // Index of a relation symbol; throws UnknownRelationError if absent.
  std::uint8_t index_of(const std::string& rel) const;
  bool has_relation(const std::string& rel) const;

  std::uint8_t converse(std::uint8_t r) const { return converse_[r]; }
  RelSet converse_set(RelSet s) const;
  RelSet compose(std::uint8_t r, std::uint8_t s) const { return composition_[r][s]; }
  RelSet compose_sets(RelSet a, RelSet b) const;

  RelSet universal_set() const { return (arity() >= 64) ? ~RelSet{0} : ((RelSet{1} << arity()) - 1); }
  RelSet singleton(std::uint8_t r) const { return RelSet{1} << r; }

  // Coherence checks over the embedded tables: converse involution,
  // identity behavior, and the converse/composition duality
  // comp(r,s) = conv(comp(conv(s), conv(r))). Throws ConstraintError.
  void self_check() const;

  static const ConstraintSystemDef& allen();
  static const ConstraintSystemDef& rcc8();
  static const ConstraintSystemDef& point();
  // Lookup by surface name ("allen" | "rcc8" | "point"); null if unknown.
  static const ConstraintSystemDef* by_name(const std::string& name);

  // Custom system from TSV lines `relation TAB relation TAB r1,r2,...`.
  // Converse is inferred from composition with the identity relation, which
  // must be named `eq`.
  static ConstraintSystemDef from_tsv(std::istream& in, const std::string& name);

 private:
  std::string name_;
  std::vector<std::string> relations_;
  std::vector<std::uint8_t> converse_;
  std::vector<std::vector<RelSet>> composition_;
  std::uint8_t identity_;
};

// A finite network of Rel-constraints over integer variable ids. Labels are
// stored once per unordered pair in canonical (lo, hi) orientation; the
// other orientation is the converse image. An absent pair means the
// universal label. Self-pairs are never stored.
class RelNetwork {
 public:
  const std::set<std::uint32_t>& variables() const { return vars_; }
  bool has_variable(std::uint32_t v) const { return vars_.count(v) != 0; }
  void add_variable(std::uint32_t v) { vars_.insert(v); }
  // Removes a variable and every constraint mentioning it.
  void remove_variable(std::uint32_t v);

  // Intersects the label of (a, b) with `rel`; creates variables as needed.
  // An empty intersection marks the network inconsistent.
  void constrain(const ConstraintSystemDef& sys, std::uint32_t a, std::uint32_t b, RelSet rel);

  // Oriented label of (a, b); universal if unconstrained.
  RelSet label(const ConstraintSystemDef& sys, std::uint32_t a, std::uint32_t b) const;
  bool has_constraint(std::uint32_t a, std::uint32_t b) const;

  // True once some label intersection has become empty.
  bool inconsistent() const { return inconsistent_; }

  // Every ordered pair of distinct variables carries a singleton label.
  bool complete(const ConstraintSystemDef& sys) const;

  // Renames `from` to `into` in all constraints, intersecting on collisions.
  // Empty intersections mark the network inconsistent.
  void rename_variable(const ConstraintSystemDef& sys, std::uint32_t from, std::uint32_t into);

  // Restriction to a variable subset.
  RelNetwork restricted_to(const std::set<std::uint32_t>& vs) const;

  // Union of constraints (intersecting shared pairs).
  static RelNetwork merge_networks(const ConstraintSystemDef& sys, const RelNetwork& a,
                                   const RelNetwork& b);

  // Stored constraints in canonical orientation, deterministic order.
  const std::map<std::pair<std::uint32_t, std::uint32_t>, RelSet>& stored() const {
    return labels_;
  }

  bool operator==(const RelNetwork&) const = default;

 private:
  std::set<std::uint32_t> vars_;
  std::map<std::pair<std::uint32_t, std::uint32_t>, RelSet> labels_;
  bool inconsistent_ = false;
};

// Decides satisfiability by backtracking over base relations with
// path-consistency propagation; for the shipped algebras a path-consistent
// atomic scenario is realizable.
bool is_satisfiable(const ConstraintSystemDef& sys, const RelNetwork& n);

// First complete singleton refinement of the whole network in deterministic
// order, if one exists.
std::optional<RelNetwork> solve_scenario(const ConstraintSystemDef& sys, const RelNetwork& n);

// All complete satisfiable singleton refinements of n restricted to `vars`,
// in lexicographic (variable-pair, relation-index) order.
std::vector<RelNetwork> enumerate_completions(const ConstraintSystemDef& sys,
                                              const RelNetwork& n,
                                              const std::set<std::uint32_t>& vars);

// Renames `from` into `into`; conflicting labels are intersected and an
// empty intersection raises EmptyLabelError.
RelNetwork merge_variable(const ConstraintSystemDef& sys, const RelNetwork& n,
                          std::uint32_t from, std::uint32_t into);

// Sanity probe for the patchwork property: requires the common part of m
// and n to be complete and equal on both sides, then reports whether the
// union is satisfiable.
bool check_patchwork_instance(const ConstraintSystemDef& sys, const RelNetwork& m,
                              const RelNetwork& n);

}  // namespace sroiqc

#endif  // SROIQC_CONSTRAINT_HPP
