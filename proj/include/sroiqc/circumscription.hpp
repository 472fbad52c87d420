#ifndef SROIQC_CIRCUMSCRIPTION_HPP
#define SROIQC_CIRCUMSCRIPTION_HPP

// Grounded circumscription over the tableau engine: grounding axioms, the
// minimization loop with the preference clash, model-finder coordination,
// and GC entailment queries.

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "sroiqc/kb.hpp"
#include "sroiqc/tableau.hpp"
#include "sroiqc/text.hpp"

namespace sroiqc {

struct NotGroundedError : KbError {
  using KbError::KbError;
};

// Per-predicate extensions over named individuals.
struct GroundedExtension {
  std::map<std::string, std::set<std::string>> concepts;
  std::map<std::string, std::set<std::pair<std::string, std::string>>> roles;

  bool operator==(const GroundedExtension&) const = default;
  auto operator<=>(const GroundedExtension&) const = default;

  std::set<std::string> role_domain(const std::string& r) const;
  std::set<std::string> role_range(const std::string& r) const;
  // Range restricted to edges leaving `source`.
  std::set<std::string> role_range_from(const std::string& r, const std::string& source) const;

  // Componentwise subset with at least one strict inclusion.
  bool strictly_below(const GroundedExtension& other) const;
  std::size_t total_size() const;
};

enum class GcVerdictKind : std::uint8_t { GcSatisfiable, GcUnsatisfiable, ResourceLimitExceeded };

struct GcVerdict {
  GcVerdictKind kind = GcVerdictKind::GcUnsatisfiable;
  std::optional<GroundedExtension> extension;
  std::optional<ExtractedModel> model;
  std::uint32_t iterations = 0;  // minimization rounds taken
  Statistics stats;              // accumulated over all tableau runs
};

struct GcAnswer {
  std::optional<bool> result;  // empty = resource limit exceeded
  Statistics stats;
};

class GcReasoner {
 public:
  GcReasoner(KnowledgeBase kb, const ConstraintSystemDef* system_override,
             ResourceLimits limits);

  // Runs the tableau on the KB augmented with the grounding axioms
  // (minimized concepts and role domains/ranges bounded by Nom).
  Verdict init_tab();

  // Reads the minimized-predicate extensions off a completion system.
  // Throws NotGroundedError if a minimized predicate holds at an unnamed
  // node (an InitTab axiom bug).
  GroundedExtension extract_extension(const ExtractedModel& m) const;

  // Runs the tableau with the bounding axioms for `ext` and the preference
  // clash active: Satisfiable means a strictly smaller grounded model
  // exists (carried in the verdict).
  Verdict min_tab(const GroundedExtension& ext);

  // init_tab, then iterate min_tab until no strictly smaller model exists.
  GcVerdict model_finder();

  // Entailment queries; search is over all minimal grounded extensions.
  GcAnswer entails_instance(const std::string& individual, Concept c);
  GcAnswer concept_satisfiable(Concept c);
  GcAnswer subsumes(Concept sub, Concept super);

  // All minimal grounded extensions reachable within the budget; nullopt on
  // resource exhaustion. Useful to share across several queries.
  std::optional<std::vector<GroundedExtension>> minimal_extensions();
  // entails_instance against a precomputed extension set.
  GcAnswer entails_instance_on(const std::vector<GroundedExtension>& minimal,
                               const std::string& individual, Concept c);

 private:
  Verdict run_on(const KnowledgeBase& kb, const Tableau::Visitor& visitor,
                 const ReducedKB** rkb_out = nullptr);
  KnowledgeBase grounded_kb() const;
  KnowledgeBase bounded_kb(const GroundedExtension& ext) const;
  GroundedExtension extract_from(const ReducedKB& rkb, const CompletionSystem& s) const;

  ResourceLimits remaining_limits() const;
  void charge(const Statistics& stats);

  KnowledgeBase kb_;
  const ConstraintSystemDef* system_override_;
  ResourceLimits limits_;
  Statistics total_;
  std::vector<ReducedKB> rkb_pool_;  // keeps ReducedKBs alive for models
};

// Nominal disjunction encoding of a set of individuals; Bottom when empty.
Concept nominal_disjunction(const std::set<std::string>& individuals);

}  // namespace sroiqc

#endif  // SROIQC_CIRCUMSCRIPTION_HPP
