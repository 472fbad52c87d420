#ifndef SROIQC_QUERY_HPP
#define SROIQC_QUERY_HPP

// Query layer: reduces satisfiability, subsumption and instance checking to
// KB satisfiability (the tableau stays ignorant of query kinds), dispatches
// GC queries, and runs expectation-annotated corpora.

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "sroiqc/circumscription.hpp"
#include "sroiqc/kb.hpp"
#include "sroiqc/tableau.hpp"
#include "sroiqc/text.hpp"

namespace sroiqc {

struct RunOptions {
  ResourceLimits limits;
  const ConstraintSystemDef* system_override = nullptr;
  Tableau::TraceFn trace;
};

struct QueryOutcome {
  enum class Kind : std::uint8_t { Positive, Negative, ResourceLimit } kind = Kind::Negative;
  Statistics stats;
  std::optional<ExtractedModel> model;          // satisfiability-style queries
  std::optional<GroundedExtension> extension;   // GC queries
  std::uint32_t gc_iterations = 0;
  // The ReducedKB the model was produced against (needed to interpret it).
  std::shared_ptr<const ReducedKB> reduced;
};

// Fresh individual name not colliding with any KB symbol.
std::string fresh_individual(const KnowledgeBase& kb, const std::string& base);

QueryOutcome run_query(const KnowledgeBase& kb, const Query& q, const RunOptions& opts);

// Maps an outcome to the corpus verdict vocabulary: sat / unsat / entailed /
// not-entailed / limit.
std::string verdict_string(const Query& q, const QueryOutcome& out);

struct CorpusEntry {
  std::string file;
  std::string expected;
  std::string actual;
  bool pass = false;
};
struct CorpusReport {
  std::vector<CorpusEntry> entries;
  bool all_pass = true;
};

// Runs every .kbx file in a directory against its `; expect: <verdict>`
// header; files without queries default to KB satisfiability.
CorpusReport run_corpus(const std::string& dir, const RunOptions& opts);

}  // namespace sroiqc

#endif  // SROIQC_QUERY_HPP
