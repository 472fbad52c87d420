#include "sroiqc/query.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "sroiqc/preprocess.hpp"

namespace sroiqc {

std::string fresh_individual(const KnowledgeBase& kb, const std::string& base) {
  VocabularyReport vocab = free_vocabulary(kb);
  auto taken = [&](const std::string& n) {
    return vocab.abstract_individuals.count(n) || vocab.constraint_individuals.count(n) ||
           vocab.concepts.count(n) || vocab.abstract_roles.count(n) ||
           vocab.concrete_roles.count(n);
  };
  if (!taken(base)) return base;
  for (int i = 0;; ++i) {
    std::string cand = base + std::to_string(i);
    if (!taken(cand)) return cand;
  }
}

namespace {

// Plain satisfiability of a KB; positive = satisfiable.
QueryOutcome run_sat(const KnowledgeBase& kb, const RunOptions& opts) {
  QueryOutcome out;
  PreprocessOptions popts;
  popts.system_override = opts.system_override;
  auto rkb = std::make_shared<ReducedKB>(preprocess(kb, popts));
  Tableau engine(*rkb, opts.limits, opts.trace);
  Verdict v = engine.run();
  out.stats = v.stats;
  out.reduced = rkb;
  switch (v.kind) {
    case VerdictKind::Satisfiable:
      out.kind = QueryOutcome::Kind::Positive;
      out.model = std::move(v.model);
      break;
    case VerdictKind::Unsatisfiable:
      out.kind = QueryOutcome::Kind::Negative;
      break;
    case VerdictKind::ResourceLimitExceeded:
      out.kind = QueryOutcome::Kind::ResourceLimit;
      break;
  }
  return out;
}

QueryOutcome invert(QueryOutcome out) {
  if (out.kind == QueryOutcome::Kind::Positive)
    out.kind = QueryOutcome::Kind::Negative;
  else if (out.kind == QueryOutcome::Kind::Negative)
    out.kind = QueryOutcome::Kind::Positive;
  return out;
}

QueryOutcome from_gc_answer(const GcAnswer& ans) {
  QueryOutcome out;
  out.stats = ans.stats;
  if (!ans.result)
    out.kind = QueryOutcome::Kind::ResourceLimit;
  else
    out.kind = *ans.result ? QueryOutcome::Kind::Positive : QueryOutcome::Kind::Negative;
  return out;
}

}  // namespace

QueryOutcome run_query(const KnowledgeBase& kb, const Query& q, const RunOptions& opts) {
  return std::visit(
      [&](const auto& query) -> QueryOutcome {
        using T = std::decay_t<decltype(query)>;
        if constexpr (std::is_same_v<T, QueryKbSat>) {
          return run_sat(kb, opts);
        } else if constexpr (std::is_same_v<T, QueryConceptSat>) {
          KnowledgeBase k = kb;
          k.abox.push_back(ConceptAssertion{fresh_individual(kb, "_q"), query.concept_expr});
          return run_sat(k, opts);
        } else if constexpr (std::is_same_v<T, QuerySubsumes>) {
          // C subsumed by D iff {x} |= C and not D is unsatisfiable
          KnowledgeBase k = kb;
          k.abox.push_back(ConceptAssertion{
              fresh_individual(kb, "_q"),
              Concept::conj(query.sub, Concept::negation(query.super))});
          return invert(run_sat(k, opts));
        } else if constexpr (std::is_same_v<T, QueryInstance>) {
          KnowledgeBase k = kb;
          k.abox.push_back(
              ConceptAssertion{query.individual, Concept::negation(query.concept_expr)});
          return invert(run_sat(k, opts));
        } else if constexpr (std::is_same_v<T, QueryGcSat>) {
          GcReasoner gc(kb, opts.system_override, opts.limits);
          GcVerdict v = gc.model_finder();
          QueryOutcome out;
          out.stats = v.stats;
          out.gc_iterations = v.iterations;
          switch (v.kind) {
            case GcVerdictKind::GcSatisfiable:
              out.kind = QueryOutcome::Kind::Positive;
              out.extension = v.extension;
              out.model = v.model;
              break;
            case GcVerdictKind::GcUnsatisfiable:
              out.kind = QueryOutcome::Kind::Negative;
              break;
            case GcVerdictKind::ResourceLimitExceeded:
              out.kind = QueryOutcome::Kind::ResourceLimit;
              break;
          }
          return out;
        } else if constexpr (std::is_same_v<T, QueryGcInstance>) {
          GcReasoner gc(kb, opts.system_override, opts.limits);
          return from_gc_answer(gc.entails_instance(query.individual, query.concept_expr));
        } else if constexpr (std::is_same_v<T, QueryGcConceptSat>) {
          GcReasoner gc(kb, opts.system_override, opts.limits);
          return from_gc_answer(gc.concept_satisfiable(query.concept_expr));
        } else {
          GcReasoner gc(kb, opts.system_override, opts.limits);
          return from_gc_answer(gc.subsumes(query.sub, query.super));
        }
      },
      q);
}

std::string verdict_string(const Query& q, const QueryOutcome& out) {
  if (out.kind == QueryOutcome::Kind::ResourceLimit) return "limit";
  bool positive = out.kind == QueryOutcome::Kind::Positive;
  bool entailment = std::holds_alternative<QuerySubsumes>(q) ||
                    std::holds_alternative<QueryInstance>(q) ||
                    std::holds_alternative<QueryGcInstance>(q) ||
                    std::holds_alternative<QueryGcSubsumes>(q);
  if (entailment) return positive ? "entailed" : "not-entailed";
  return positive ? "sat" : "unsat";
}

CorpusReport run_corpus(const std::string& dir, const RunOptions& opts) {
  CorpusReport report;
  std::vector<std::filesystem::path> files;
  if (std::filesystem::exists(dir))
    for (const auto& e : std::filesystem::directory_iterator(dir))
      if (e.is_regular_file() && e.path().extension() == ".kbx") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  for (const auto& path : files) {
    CorpusEntry entry;
    entry.file = path.filename().string();
    std::ifstream in(path);
    std::stringstream buf;
    buf << in.rdbuf();
    std::string text = buf.str();
    // expectation header: `; expect: <verdict>`
    entry.expected = "";
    {
      std::istringstream lines(text);
      std::string line;
      while (std::getline(lines, line)) {
        auto pos = line.find("expect:");
        if (!line.empty() && line[0] == ';' && pos != std::string::npos) {
          std::istringstream rest(line.substr(pos + 7));
          rest >> entry.expected;
          break;
        }
      }
    }
    ParseResult parsed = parse_document(text);
    if (!parsed.ok()) {
      entry.actual = "error";
    } else {
      Query q = parsed.doc->queries.empty() ? Query{QueryKbSat{}} : parsed.doc->queries.front();
      try {
        QueryOutcome out = run_query(parsed.doc->kb, q, opts);
        entry.actual = verdict_string(q, out);
      } catch (const KbError&) {
        entry.actual = "error";
      } catch (const ConstraintError&) {
        entry.actual = "error";
      }
    }
    entry.pass = !entry.expected.empty() && entry.expected == entry.actual;
    report.all_pass = report.all_pass && entry.pass;
    report.entries.push_back(std::move(entry));
  }
  return report;
}

}  // namespace sroiqc
