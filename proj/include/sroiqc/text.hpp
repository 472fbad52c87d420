#ifndef SROIQC_TEXT_HPP
#define SROIQC_TEXT_HPP

// Concrete text syntax for knowledge bases and queries (.kbx files):
// s-expression reader, validating loader, and canonical pretty-printer.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "sroiqc/kb.hpp"

namespace sroiqc {

struct SourceSpan {
  std::uint32_t start = 0;  // byte offsets into the original source
  std::uint32_t end = 0;
  std::uint32_t line = 1;
  std::uint32_t column = 1;
};

enum class Severity : std::uint8_t { Error, Warning };

struct ParseDiagnostic {
  Severity severity = Severity::Error;
  std::string message;
  SourceSpan span;
};

// ---------------------------------------------------------------------------
// Queries

struct QueryKbSat {
  bool operator==(const QueryKbSat&) const = default;
};
struct QueryConceptSat {
  Concept concept_expr;
  bool operator==(const QueryConceptSat&) const = default;
};
struct QuerySubsumes {
  Concept sub;
  Concept super;
  bool operator==(const QuerySubsumes&) const = default;
};
struct QueryInstance {
  std::string individual;
  Concept concept_expr;
  bool operator==(const QueryInstance&) const = default;
};
struct QueryGcSat {
  bool operator==(const QueryGcSat&) const = default;
};
struct QueryGcInstance {
  std::string individual;
  Concept concept_expr;
  bool operator==(const QueryGcInstance&) const = default;
};
struct QueryGcConceptSat {
  Concept concept_expr;
  bool operator==(const QueryGcConceptSat&) const = default;
};
struct QueryGcSubsumes {
  Concept sub;
  Concept super;
  bool operator==(const QueryGcSubsumes&) const = default;
};

using Query = std::variant<QueryKbSat, QueryConceptSat, QuerySubsumes, QueryInstance,
                           QueryGcSat, QueryGcInstance, QueryGcConceptSat, QueryGcSubsumes>;

// ---------------------------------------------------------------------------
// Parsing

struct ParseOptions {
  std::uint32_t max_cardinality = 1u << 16;
};

struct Document {
  KnowledgeBase kb;
  std::vector<Query> queries;
};

struct ParseResult {
  std::optional<Document> doc;
  std::vector<ParseDiagnostic> diagnostics;
  bool ok() const { return doc.has_value(); }
};

// Parses a whole .kbx document. Never throws on malformed input; failures
// come back as diagnostics.
ParseResult parse_document(std::string_view text, const ParseOptions& opts = {});

// Parses a document expected to contain only KB forms.
ParseResult parse_kb(std::string_view text, const ParseOptions& opts = {});

struct ConceptParseResult {
  std::optional<Concept> concept_expr;
  std::vector<ParseDiagnostic> diagnostics;
};
// Parses a single concept expression, e.g. "(and A (some R B))".
ConceptParseResult parse_concept(std::string_view text, const ParseOptions& opts = {});

struct QueryParseResult {
  std::optional<Query> query;
  std::vector<ParseDiagnostic> diagnostics;
};
// Parses a single (query ...) form.
QueryParseResult parse_query(std::string_view text, const ParseOptions& opts = {});

// ---------------------------------------------------------------------------
// Printing

std::string print_concept(Concept c);
std::string print_role(const RoleExpr& r);
std::string print_assertion(const Assertion& a);
std::string print_query(const Query& q);

// Canonical form: one axiom per line; abox, tbox, rbox sections each sorted
// lexicographically by printed form. parse(print(kb)) equals canonical(kb).
std::string print_kb(const KnowledgeBase& kb);

// Sorts every section into the printer's canonical order.
KnowledgeBase canonical(KnowledgeBase kb);

}  // namespace sroiqc

#endif  // SROIQC_TEXT_HPP
