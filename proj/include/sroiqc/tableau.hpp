#ifndef SROIQC_TABLEAU_HPP
#define SROIQC_TABLEAU_HPP

// The SROIQ(C) completion-system engine: state representation, completion
// rules, blocking, merging/pruning, clash detection, rule priority, and a
// chronological-backtracking search over nondeterministic choices.

#include <chrono>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "sroiqc/constraint.hpp"
#include "sroiqc/kb.hpp"
#include "sroiqc/preprocess.hpp"

namespace sroiqc {

struct MergeForbiddenError : KbError {
  using KbError::KbError;
};

using NodeId = std::uint32_t;
using CNodeId = std::uint32_t;

// ---------------------------------------------------------------------------
// Completion system

struct AbstractNode {
  bool alive = true;
  bool nominal = false;
  std::int32_t level = -1;           // NN bookkeeping; input nominals are 0
  std::optional<NodeId> pred;        // creation parent (tree among blockables)
  ConceptSet label;
};

struct ConcreteNode {
  bool alive = true;
  bool named = false;  // constraint individual (unique name assumption)
  std::string name;
};

struct TemplateEntry {
  std::uint32_t q1 = 0;
  std::uint32_t q2 = 0;
  std::uint8_t rel = 0;
  bool negative = false;
};

enum class RuleId : std::uint8_t {
  Connect,
  Complete,
  ORule,
  NN,
  AtMost,       // abstract <=-rule
  Gci,
  Conj,
  Forall1,
  Forall2,
  Forall3,
  SelfLoop,
  CForallU,
  CForallI,
  NegCExistsU,
  NegCExistsI,
  Disj,
  Choose,
  CAtMost,
  Exists,
  AtLeast,
  CExistsU,
  CExistsI,
  CAtLeast,
};

const char* rule_name(RuleId r);

// Full tableau state; a value type so choice points can snapshot it.
struct CompletionSystem {
  std::vector<AbstractNode> anodes;
  std::vector<ConcreteNode> cnodes;
  std::map<std::pair<NodeId, NodeId>, std::set<RoleExpr>> aedges;     // directed
  std::map<std::pair<NodeId, CNodeId>, std::set<std::string>> cedges; // directed
  RelNetwork net;
  std::vector<TemplateEntry> templates;
  std::map<CNodeId, std::set<std::uint32_t>> markers;
  std::set<std::pair<NodeId, NodeId>> aineq;   // normalized lo < hi
  std::set<std::pair<CNodeId, CNodeId>> cineq; // normalized lo < hi
  std::uint32_t next_marker = 0;
  std::uint32_t fresh_nominal_counter = 0;
  // Generating rules fire at most once per (rule, node, trigger); survives
  // merges by key transfer.
  std::set<std::tuple<std::uint8_t, NodeId, Concept>> fired;
  std::set<std::pair<NodeId, NodeId>> rcomplete_fired;
  std::uint64_t net_version = 0;
};

// ---------------------------------------------------------------------------
// Verdicts and models

struct ResourceLimits {
  std::uint64_t max_nodes = 50000;  // total abstract nodes created per run
  double timeout_s = 60.0;
};

struct Statistics {
  std::uint64_t nodes = 0;
  std::uint64_t rule_applications = 0;
  std::uint64_t branches = 0;
  double millis = 0.0;
};

enum class VerdictKind : std::uint8_t { Satisfiable, Unsatisfiable, ResourceLimitExceeded };

struct ExtractedModel {
  CompletionSystem system;
  RelNetwork scenario;  // one satisfying complete scenario of the network
  std::map<NodeId, NodeId> blocked_by;
  std::set<NodeId> indirectly_blocked;
};

struct Verdict {
  VerdictKind kind = VerdictKind::Unsatisfiable;
  std::optional<ExtractedModel> model;
  Statistics stats;
};

// ---------------------------------------------------------------------------
// Rule instances

struct RuleInstance {
  RuleId rule = RuleId::Gci;
  NodeId node = 0;
  Concept trigger;
  NodeId other = 0;             // o-rule partner / choose neighbour / Forall2 target
  RoleExpr via;                 // Forall2 transition label
  std::uint32_t state = 0;      // Forall2 target automaton state
  std::size_t template_idx = 0; // Connect
  CNodeId c1 = 0, c2 = 0;       // concrete rule operands / Connect nodes
  std::pair<NodeId, NodeId> block_pair{0, 0};  // Complete
  // merge alternatives for AtMost/CAtMost: (from, into), direction resolved
  std::vector<std::pair<std::uint32_t, std::uint32_t>> merge_pairs;
  // completion alternatives for Complete, frozen when the instance is built
  std::vector<RelNetwork> completions;
  std::uint32_t num_alternatives = 1;
};

// ---------------------------------------------------------------------------
// Engine

class Tableau {
 public:
  using TraceFn = std::function<void(const std::string&)>;
  // Decides what to do with a complete clash-free system.
  enum class Visit : std::uint8_t { Accept, RejectContinue };
  using Visitor = std::function<Visit(const CompletionSystem&)>;

  Tableau(const ReducedKB& rkb, ResourceLimits limits, TraceFn trace = nullptr);

  // Depth-first search: apply rules by priority, backtrack on clash, return
  // the first complete clash-free system (or exhaust all choices).
  Verdict run();
  // Same search, but every complete clash-free system is offered to the
  // visitor; RejectContinue treats it as a dead end and keeps searching.
  Verdict run(const Visitor& visitor);

  const Statistics& stats() const { return stats_; }

  // --- exposed for unit tests and the circumscription layer ---
  CompletionSystem initial_state() const;
  std::optional<RuleInstance> applicable_rule(const CompletionSystem& s) const;
  // Applies one alternative of an instance in place.
  void apply_rule(CompletionSystem& s, const RuleInstance& inst, std::uint32_t alternative);
  // Clash report: empty string means clean.
  std::string check_clash(const CompletionSystem& s) const;

  struct Blocking {
    // directly_blocked[b] = blocker; descendants of those are indirect.
    std::map<NodeId, NodeId> direct;
    std::set<NodeId> indirect;
    bool blocked(NodeId n) const { return direct.count(n) || indirect.count(n); }
    bool indirectly(NodeId n) const { return indirect.count(n) != 0; }
  };
  Blocking compute_blocking(const CompletionSystem& s) const;

  // Merges abstract node y into x (label union, edge rewiring, concrete
  // successor transfer, pruning). Throws MergeForbiddenError when y and x
  // are asserted distinct.
  void merge_abstract(CompletionSystem& s, NodeId y, NodeId x) const;

  ExtractedModel extract_model(const CompletionSystem& s) const;

  // Finds the node currently labeled with the nominal of `individual`.
  static std::optional<NodeId> node_of_individual(const CompletionSystem& s,
                                                  const std::string& individual);

 private:
  friend struct TableauTestPeer;
  struct ScanContext;

  void scan_rules(const CompletionSystem& s, const Blocking& blk,
                  std::optional<RuleInstance>& out) const;
  bool node_has_pending_work(const CompletionSystem& s, NodeId n) const;

  void merge_concrete(CompletionSystem& s, CNodeId from, CNodeId into) const;
  void prune_abstract(CompletionSystem& s, NodeId n) const;
  void prune_concrete(CompletionSystem& s, CNodeId c) const;

  NodeId new_abstract(CompletionSystem& s, bool nominal, std::optional<NodeId> pred,
                      ConceptSet label, std::int32_t level = -1) const;
  CNodeId new_concrete(CompletionSystem& s, bool named, std::string name = "") const;
  void add_aedge(CompletionSystem& s, NodeId from, NodeId to, const RoleExpr& r) const;
  void add_cedge(CompletionSystem& s, NodeId from, CNodeId to, const std::string& g) const;
  // Creates the U-successor structure for a path and returns the concrete end.
  CNodeId create_path_successor(CompletionSystem& s, NodeId a, const Path& u) const;

  // BC checks
  bool bc1(const CompletionSystem& s, NodeId a, NodeId b) const;
  struct Phi {
    std::map<CNodeId, CNodeId> map;
  };
  std::optional<Phi> bc2(const CompletionSystem& s, NodeId a, NodeId b) const;
  bool bc3(const CompletionSystem& s, NodeId a, NodeId b, const Phi& phi) const;
  std::set<CNodeId> relevant_cnodes(const CompletionSystem& s, NodeId n) const;
  std::set<CNodeId> cnet_nodes(const CompletionSystem& s, NodeId a, NodeId b,
                               const Phi& phi, bool side_a) const;
  std::set<CNodeId> internal_cnodes(const CompletionSystem& s, NodeId a, NodeId b) const;
  std::set<CNodeId> fixed_cnodes(const CompletionSystem& s, NodeId a, NodeId b) const;

  // Negative-template exclusions folded into network satisfiability.
  RelNetwork network_with_exclusions(const CompletionSystem& s) const;

  const ReducedKB& rkb_;
  ResourceLimits limits_;
  TraceFn trace_;
  mutable Statistics stats_;
  std::string fresh_nominal_prefix_;
  mutable std::optional<std::pair<std::uint64_t, bool>> nsat_cache_;
  std::chrono::steady_clock::time_point deadline_;
};

// Directional role lookup on the completion graph: `to` is an R-neighbour
// of `from` (explicit edge modulo the subrole closure, either orientation).
bool role_edge_between(const ReducedKB& rkb, const CompletionSystem& s, NodeId from, NodeId to,
                       const RoleExpr& r);

// Checks every proposition decidable on the finite completion-system
// surrogate (existence obligations modulo blocked-node redirection).
// Returns human-readable violations; a sound model yields an empty list.
std::vector<std::string> validate_model(const ExtractedModel& m, const ReducedKB& rkb);

// Convenience wrapper: preprocess + run.
Verdict decide(const ReducedKB& rkb, const ResourceLimits& limits = {},
               Tableau::TraceFn trace = nullptr);

}  // namespace sroiqc

#endif  // SROIQC_TABLEAU_HPP
