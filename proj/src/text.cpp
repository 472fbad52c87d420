#include "sroiqc/text.hpp"

#include <algorithm>
#include <cctype>
#include <functional>
#include <sstream>

#include "sroiqc/constraint.hpp"

namespace sroiqc {

namespace {

// ---------------------------------------------------------------------------
// S-expression reader

struct Sexp {
  bool is_list = false;
  std::string atom;
  std::vector<Sexp> items;
  SourceSpan span;
};

class Reader {
 public:
  Reader(std::string_view text, std::vector<ParseDiagnostic>& diags)
      : text_(text), diags_(diags) {}

  std::vector<Sexp> read_all() {
    std::vector<Sexp> forms;
    skip_ws();
    while (pos_ < text_.size()) {
      auto form = read_form();
      if (form) forms.push_back(std::move(*form));
      skip_ws();
    }
    return forms;
  }

 private:
  SourceSpan here(std::uint32_t start) const {
    SourceSpan s;
    s.start = start;
    s.end = static_cast<std::uint32_t>(pos_);
    s.line = line_at(start);
    s.column = col_at(start);
    return s;
  }

  std::uint32_t line_at(std::uint32_t off) const {
    std::uint32_t line = 1;
    for (std::uint32_t i = 0; i < off && i < text_.size(); ++i)
      if (text_[i] == '\n') ++line;
    return line;
  }
  std::uint32_t col_at(std::uint32_t off) const {
    std::uint32_t col = 1;
    for (std::uint32_t i = 0; i < off && i < text_.size(); ++i) {
      if (text_[i] == '\n')
        col = 1;
      else
        ++col;
    }
    return col;
  }

  void skip_ws() {
    while (pos_ < text_.size()) {
      char c = text_[pos_];
      if (c == ';') {
        while (pos_ < text_.size() && text_[pos_] != '\n') ++pos_;
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  std::optional<Sexp> read_form() {
    std::uint32_t start = static_cast<std::uint32_t>(pos_);
    char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      Sexp list;
      list.is_list = true;
      skip_ws();
      while (pos_ < text_.size() && text_[pos_] != ')') {
        auto item = read_form();
        if (item) list.items.push_back(std::move(*item));
        skip_ws();
      }
      if (pos_ >= text_.size()) {
        list.span = here(start);
        diags_.push_back({Severity::Error, "unbalanced '(': missing ')'", list.span});
        return list;
      }
      ++pos_;  // consume ')'
      list.span = here(start);
      return list;
    }
    if (c == ')') {
      ++pos_;
      diags_.push_back({Severity::Error, "unexpected ')'", here(start)});
      return std::nullopt;
    }
    // atom
    Sexp a;
    while (pos_ < text_.size()) {
      char d = text_[pos_];
      if (d == '(' || d == ')' || d == ';' || std::isspace(static_cast<unsigned char>(d))) break;
      a.atom.push_back(d);
      ++pos_;
    }
    a.span = here(start);
    return a;
  }

  std::string_view text_;
  std::vector<ParseDiagnostic>& diags_;
  std::size_t pos_ = 0;
};

bool is_identifier(const std::string& s) {
  if (s.empty()) return false;
  char c0 = s[0];
  if (!(std::isalpha(static_cast<unsigned char>(c0)) || c0 == '_')) return false;
  for (char c : s)
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-')) return false;
  return true;
}

bool is_number(const std::string& s) {
  if (s.empty()) return false;
  for (char c : s)
    if (!std::isdigit(static_cast<unsigned char>(c))) return false;
  return true;
}

// Names with a fixed meaning in concept/role positions.
bool is_reserved(const std::string& s) {
  return s == "top" || s == "bottom" || s == "universal";
}

// ---------------------------------------------------------------------------
// Form parser

struct PendingFunctional {
  std::string name;
  SourceSpan span;
  std::size_t slot;  // index into kb.rbox.assertions
};

class FormParser {
 public:
  FormParser(const ParseOptions& opts, std::vector<ParseDiagnostic>& diags)
      : opts_(opts), diags_(diags) {}

  Document parse(const std::vector<Sexp>& forms) {
    Document doc;
    for (const auto& f : forms) top_form(f, doc);
    resolve_functionals(doc.kb);
    validate(doc.kb);
    return doc;
  }

  std::optional<Concept> concept_only(const Sexp& s) { return parse_conceptx(s); }
  std::optional<Query> query_only(const Sexp& s) {
    if (!s.is_list || s.items.empty() || !is_atom(s.items[0], "query")) {
      error(s.span, "expected (query ...)");
      return std::nullopt;
    }
    return parse_query_form(s);
  }

 private:
  void error(const SourceSpan& sp, const std::string& msg) {
    diags_.push_back({Severity::Error, msg, sp});
  }
  void warn(const SourceSpan& sp, const std::string& msg) {
    diags_.push_back({Severity::Warning, msg, sp});
  }

  static bool is_atom(const Sexp& s, std::string_view a) { return !s.is_list && s.atom == a; }

  bool check_arity(const Sexp& s, std::size_t n, const char* what) {
    if (s.items.size() != n) {
      error(s.span, std::string(what) + ": expected " + std::to_string(n - 1) +
                        " argument(s), got " + std::to_string(s.items.size() - 1));
      return false;
    }
    return true;
  }

  std::optional<std::string> identifier(const Sexp& s, const char* what) {
    if (s.is_list || !is_identifier(s.atom) || is_reserved(s.atom)) {
      error(s.span, std::string("expected ") + what + " identifier");
      return std::nullopt;
    }
    return s.atom;
  }

  std::optional<std::uint32_t> number(const Sexp& s) {
    if (s.is_list || !is_number(s.atom)) {
      error(s.span, "expected a nonnegative decimal integer");
      return std::nullopt;
    }
    unsigned long long v = 0;
    try {
      v = std::stoull(s.atom);
    } catch (...) {
      error(s.span, "integer literal out of range");
      return std::nullopt;
    }
    if (v > opts_.max_cardinality) {
      error(s.span, "cardinality " + s.atom + " exceeds the configured maximum " +
                        std::to_string(opts_.max_cardinality));
      return std::nullopt;
    }
    return static_cast<std::uint32_t>(v);
  }

  std::optional<RoleExpr> parse_role(const Sexp& s) {
    if (!s.is_list) {
      if (s.atom == "universal") return RoleExpr::universal_role();
      if (!is_identifier(s.atom) || is_reserved(s.atom)) {
        error(s.span, "expected a role name, 'universal', or (inv R)");
        return std::nullopt;
      }
      return RoleExpr::named(s.atom);
    }
    if (s.items.size() == 2 && is_atom(s.items[0], "inv")) {
      const Sexp& arg = s.items[1];
      if (arg.is_list || !is_identifier(arg.atom) || is_reserved(arg.atom)) {
        error(arg.span, "inv takes a named role (the universal role has no inverse)");
        return std::nullopt;
      }
      return RoleExpr::inverse_of(arg.atom);
    }
    error(s.span, "expected a role name or (inv R)");
    return std::nullopt;
  }

  std::optional<ConcreteRole> parse_concrete_role(const Sexp& s) {
    auto n = identifier(s, "concrete role");
    if (!n) return std::nullopt;
    return ConcreteRole{*n};
  }

  std::optional<Path> parse_path(const Sexp& s) {
    if (!s.is_list || s.items.empty() || !is_atom(s.items[0], "path")) {
      error(s.span, "expected (path g) or (path R g)");
      return std::nullopt;
    }
    if (s.items.size() == 2) {
      auto g = parse_concrete_role(s.items[1]);
      if (!g) return std::nullopt;
      return Path{{}, *g};
    }
    if (s.items.size() == 3) {
      auto r = parse_role(s.items[1]);
      auto g = parse_concrete_role(s.items[2]);
      if (!r || !g) return std::nullopt;
      if (r->universal) {
        error(s.items[1].span, "the universal role cannot appear in a path");
        return std::nullopt;
      }
      return Path{{*r}, *g};
    }
    error(s.span, "path: expected 1 or 2 roles");
    return std::nullopt;
  }

  std::optional<std::string> parse_relation(const Sexp& s) {
    auto n = identifier(s, "constraint relation");
    if (!n) return std::nullopt;
    used_relations_.emplace_back(*n, s.span);
    return n;
  }

  std::optional<Concept> parse_conceptx(const Sexp& s) {
    if (!s.is_list) {
      if (s.atom == "top") return Concept::top();
      if (s.atom == "bottom") return Concept::bottom();
      if (!is_identifier(s.atom) || is_reserved(s.atom)) {
        error(s.span, "expected a concept");
        return std::nullopt;
      }
      return Concept::atomic(s.atom);
    }
    if (s.items.empty() || s.items[0].is_list) {
      error(s.span, "expected a concept form");
      return std::nullopt;
    }
    const std::string& head = s.items[0].atom;
    auto bin = [&](Concept (*make)(Concept, Concept)) -> std::optional<Concept> {
      if (!check_arity(s, 3, head.c_str())) return std::nullopt;
      auto a = parse_conceptx(s.items[1]);
      auto b = parse_conceptx(s.items[2]);
      if (!a || !b) return std::nullopt;
      return make(*a, *b);
    };
    if (head == "and") return bin(&Concept::conj);
    if (head == "or") return bin(&Concept::disj);
    if (head == "not") {
      if (!check_arity(s, 2, "not")) return std::nullopt;
      auto c = parse_conceptx(s.items[1]);
      if (!c) return std::nullopt;
      return Concept::negation(*c);
    }
    if (head == "some" || head == "all") {
      if (!check_arity(s, 3, head.c_str())) return std::nullopt;
      auto r = parse_role(s.items[1]);
      auto c = parse_conceptx(s.items[2]);
      if (!r || !c) return std::nullopt;
      return head == "some" ? Concept::exists(*r, *c) : Concept::forall(*r, *c);
    }
    if (head == "atleast" || head == "atmost") {
      if (!check_arity(s, 4, head.c_str())) return std::nullopt;
      auto n = number(s.items[1]);
      auto r = parse_role(s.items[2]);
      auto c = parse_conceptx(s.items[3]);
      if (!n || !r || !c) return std::nullopt;
      if (r->universal) {
        error(s.items[2].span, "number restrictions require a simple role, not 'universal'");
        return std::nullopt;
      }
      return head == "atleast" ? Concept::at_least(*n, *r, *c) : Concept::at_most(*n, *r, *c);
    }
    if (head == "self") {
      if (!check_arity(s, 2, "self")) return std::nullopt;
      auto r = parse_role(s.items[1]);
      if (!r) return std::nullopt;
      if (r->universal) {
        error(s.items[1].span, "self requires a simple role, not 'universal'");
        return std::nullopt;
      }
      return Concept::self_restriction(*r);
    }
    if (head == "one") {
      if (!check_arity(s, 2, "one")) return std::nullopt;
      auto a = identifier(s.items[1], "individual");
      if (!a) return std::nullopt;
      return Concept::nominal(*a);
    }
    if (head == "catleast" || head == "catmost") {
      if (!check_arity(s, 3, head.c_str())) return std::nullopt;
      auto n = number(s.items[1]);
      auto g = parse_concrete_role(s.items[2]);
      if (!n || !g) return std::nullopt;
      return head == "catleast" ? Concept::c_at_least(*n, *g) : Concept::c_at_most(*n, *g);
    }
    if (head == "csome" || head == "call") {
      if (!check_arity(s, 4, head.c_str())) return std::nullopt;
      auto p1 = parse_path(s.items[1]);
      auto p2 = parse_path(s.items[2]);
      auto rel = parse_relation(s.items[3]);
      if (!p1 || !p2 || !rel) return std::nullopt;
      if (p1->length() == 2 && p2->length() == 2)
        warn(s.span, "paths violate PNF: permissible shapes are (Rg,g), (g,g), (g,Rg)");
      return head == "csome" ? Concept::c_exists(*p1, *p2, *rel)
                             : Concept::c_forall(*p1, *p2, *rel);
    }
    if (head == "csome-ind" || head == "call-ind") {
      if (!check_arity(s, 4, head.c_str())) return std::nullopt;
      auto p = parse_path(s.items[1]);
      auto i = identifier(s.items[2], "constraint individual");
      auto rel = parse_relation(s.items[3]);
      if (!p || !i || !rel) return std::nullopt;
      return head == "csome-ind"
                 ? Concept::c_exists_ind(*p, *i, IndividualSide::Right, *rel)
                 : Concept::c_forall_ind(*p, *i, IndividualSide::Right, *rel);
    }
    if (head == "cind-some" || head == "cind-all") {
      if (!check_arity(s, 4, head.c_str())) return std::nullopt;
      auto i = identifier(s.items[1], "constraint individual");
      auto p = parse_path(s.items[2]);
      auto rel = parse_relation(s.items[3]);
      if (!p || !i || !rel) return std::nullopt;
      return head == "cind-some"
                 ? Concept::c_exists_ind(*p, *i, IndividualSide::Left, *rel)
                 : Concept::c_forall_ind(*p, *i, IndividualSide::Left, *rel);
    }
    error(s.span, "unknown concept form '" + head + "'");
    return std::nullopt;
  }

  void parse_abox_item(const Sexp& s, KnowledgeBase& kb) {
    if (!s.is_list || s.items.empty() || s.items[0].is_list) {
      error(s.span, "expected an assertion form");
      return;
    }
    const std::string& head = s.items[0].atom;
    if (head == "instance") {
      if (!check_arity(s, 3, "instance")) return;
      auto a = identifier(s.items[1], "individual");
      auto c = parse_conceptx(s.items[2]);
      if (a && c) kb.abox.push_back(ConceptAssertion{*a, *c});
    } else if (head == "related" || head == "not-related") {
      if (!check_arity(s, 4, head.c_str())) return;
      auto a = identifier(s.items[1], "individual");
      auto b = identifier(s.items[2], "individual");
      auto r = parse_role(s.items[3]);
      if (a && b && r) kb.abox.push_back(RoleFact{*a, *b, *r, head == "not-related"});
    } else if (head == "distinct") {
      if (!check_arity(s, 3, "distinct")) return;
      auto a = identifier(s.items[1], "individual");
      auto b = identifier(s.items[2], "individual");
      if (a && b) kb.abox.push_back(DistinctFact{*a, *b});
    } else if (head == "cvalue") {
      if (!check_arity(s, 4, "cvalue")) return;
      auto a = identifier(s.items[1], "individual");
      auto g = parse_concrete_role(s.items[2]);
      auto i = identifier(s.items[3], "constraint individual");
      if (a && g && i) kb.abox.push_back(ConcreteValueFact{*a, *g, *i});
    } else if (head == "cconstraint") {
      if (!check_arity(s, 4, "cconstraint")) return;
      auto i = identifier(s.items[1], "constraint individual");
      auto r = parse_relation(s.items[2]);
      auto j = identifier(s.items[3], "constraint individual");
      if (i && r && j) kb.abox.push_back(ConstraintFact{*i, *r, *j});
    } else {
      error(s.span, "unknown assertion form '" + head + "'");
    }
  }

  void parse_tbox_item(const Sexp& s, KnowledgeBase& kb) {
    if (!s.is_list || s.items.empty() || !is_atom(s.items[0], "implies")) {
      error(s.span, "expected (implies C D)");
      return;
    }
    if (!check_arity(s, 3, "implies")) return;
    auto l = parse_conceptx(s.items[1]);
    auto r = parse_conceptx(s.items[2]);
    if (l && r) kb.tbox.push_back(Gci{*l, *r});
  }

  void parse_rbox_item(const Sexp& s, KnowledgeBase& kb) {
    if (!s.is_list || s.items.empty() || s.items[0].is_list) {
      error(s.span, "expected an R-Box form");
      return;
    }
    const std::string& head = s.items[0].atom;
    if (head == "ria") {
      if (!check_arity(s, 3, "ria")) return;
      const Sexp& chain = s.items[1];
      if (!chain.is_list || chain.items.empty() || !is_atom(chain.items[0], "chain")) {
        error(chain.span, "expected (chain R1 R2 ...)");
        return;
      }
      AbstractRia ria;
      bool ok = chain.items.size() >= 2;
      if (!ok) error(chain.span, "chain must contain at least one role");
      for (std::size_t i = 1; i < chain.items.size(); ++i) {
        auto r = parse_role(chain.items[i]);
        if (!r) {
          ok = false;
          continue;
        }
        if (r->universal) {
          error(chain.items[i].span, "the universal role cannot occur in a role chain");
          ok = false;
        }
        ria.chain.push_back(*r);
      }
      auto rhs = parse_role(s.items[2]);
      if (!rhs) return;
      if (rhs->universal) {
        error(s.items[2].span, "the universal role cannot be the right side of a RIA");
        return;
      }
      ria.rhs = *rhs;
      if (ok) kb.rbox.abstract_rias.push_back(std::move(ria));
    } else if (head == "cria") {
      if (!check_arity(s, 3, "cria")) return;
      auto g1 = parse_concrete_role(s.items[1]);
      auto g2 = parse_concrete_role(s.items[2]);
      if (g1 && g2) kb.rbox.concrete_rias.push_back(ConcreteRia{*g1, *g2});
    } else if (head == "ref" || head == "irr" || head == "sym" || head == "trans") {
      if (!check_arity(s, 2, head.c_str())) return;
      auto r = parse_role(s.items[1]);
      if (!r) return;
      if (r->universal) {
        error(s.items[1].span, "role assertions do not apply to the universal role");
        return;
      }
      RoleAssertionKind k = head == "ref"   ? RoleAssertionKind::Reflexive
                            : head == "irr" ? RoleAssertionKind::Irreflexive
                            : head == "sym" ? RoleAssertionKind::Symmetric
                                            : RoleAssertionKind::Transitive;
      kb.rbox.assertions.push_back(RoleAssertion{k, *r, {}, std::nullopt});
    } else if (head == "dis") {
      if (!check_arity(s, 3, "dis")) return;
      auto r1 = parse_role(s.items[1]);
      auto r2 = parse_role(s.items[2]);
      if (!r1 || !r2) return;
      if (r1->universal || r2->universal) {
        error(s.span, "dis requires simple roles, not 'universal'");
        return;
      }
      kb.rbox.assertions.push_back(RoleAssertion{RoleAssertionKind::Disjoint, *r1, *r2, std::nullopt});
    } else if (head == "fxnl") {
      if (!check_arity(s, 2, "fxnl")) return;
      const Sexp& arg = s.items[1];
      if (arg.is_list) {
        auto r = parse_role(arg);  // (inv R) is abstract for sure
        if (!r) return;
        kb.rbox.assertions.push_back(RoleAssertion{RoleAssertionKind::Functional, *r, {}, std::nullopt});
      } else {
        auto n = identifier(arg, "role");
        if (!n) return;
        // Abstract vs concrete resolved after the whole document is read.
        kb.rbox.assertions.push_back(
            RoleAssertion{RoleAssertionKind::Functional, RoleExpr::named(*n), {}, std::nullopt});
        pending_functionals_.push_back({*n, arg.span, kb.rbox.assertions.size() - 1});
      }
    } else {
      error(s.span, "unknown R-Box form '" + head + "'");
    }
  }

  std::optional<Query> parse_query_form(const Sexp& s) {
    if (s.items.size() < 2 || s.items[1].is_list) {
      error(s.span, "query: expected a query kind");
      return std::nullopt;
    }
    const std::string& kind = s.items[1].atom;
    if (kind == "sat") {
      if (!check_arity(s, 2, "query sat")) return std::nullopt;
      return Query{QueryKbSat{}};
    }
    if (kind == "concept-sat" || kind == "gc-concept-sat") {
      if (!check_arity(s, 3, "query concept-sat")) return std::nullopt;
      auto c = parse_conceptx(s.items[2]);
      if (!c) return std::nullopt;
      if (kind == "concept-sat") return Query{QueryConceptSat{*c}};
      return Query{QueryGcConceptSat{*c}};
    }
    if (kind == "subsumes" || kind == "gc-subsumes") {
      if (!check_arity(s, 4, "query subsumes")) return std::nullopt;
      auto c = parse_conceptx(s.items[2]);
      auto d = parse_conceptx(s.items[3]);
      if (!c || !d) return std::nullopt;
      if (kind == "subsumes") return Query{QuerySubsumes{*c, *d}};
      return Query{QueryGcSubsumes{*c, *d}};
    }
    if (kind == "instance" || kind == "gc-instance") {
      if (!check_arity(s, 4, "query instance")) return std::nullopt;
      auto a = identifier(s.items[2], "individual");
      auto c = parse_conceptx(s.items[3]);
      if (!a || !c) return std::nullopt;
      if (kind == "instance") return Query{QueryInstance{*a, *c}};
      return Query{QueryGcInstance{*a, *c}};
    }
    if (kind == "gc-sat") {
      if (!check_arity(s, 2, "query gc-sat")) return std::nullopt;
      return Query{QueryGcSat{}};
    }
    error(s.items[1].span, "unknown query kind '" + kind + "'");
    return std::nullopt;
  }

  void top_form(const Sexp& s, Document& doc) {
    if (!s.is_list || s.items.empty() || s.items[0].is_list) {
      error(s.span, "expected a top-level form");
      return;
    }
    const std::string& head = s.items[0].atom;
    if (head == "abox") {
      for (std::size_t i = 1; i < s.items.size(); ++i) parse_abox_item(s.items[i], doc.kb);
    } else if (head == "tbox") {
      for (std::size_t i = 1; i < s.items.size(); ++i) parse_tbox_item(s.items[i], doc.kb);
    } else if (head == "rbox") {
      for (std::size_t i = 1; i < s.items.size(); ++i) parse_rbox_item(s.items[i], doc.kb);
    } else if (head == "minimize") {
      if (s.items.size() < 2) {
        error(s.span, "minimize: expected at least one concept name");
        return;
      }
      for (std::size_t i = 1; i < s.items.size(); ++i) {
        auto n = identifier(s.items[i], "concept");
        if (n) doc.kb.minimized.concepts.insert(*n);
      }
    } else if (head == "minimize-role") {
      if (s.items.size() < 2) {
        error(s.span, "minimize-role: expected at least one role name");
        return;
      }
      for (std::size_t i = 1; i < s.items.size(); ++i) {
        auto n = identifier(s.items[i], "role");
        if (n) doc.kb.minimized.roles.insert(*n);
      }
    } else if (head == "constraint-system") {
      if (!check_arity(s, 2, "constraint-system")) return;
      auto n = identifier(s.items[1], "constraint system");
      if (!n) return;
      if (doc.kb.constraint_system && *doc.kb.constraint_system != *n)
        error(s.span, "conflicting constraint-system declarations");
      doc.kb.constraint_system = *n;
      if (!ConstraintSystemDef::by_name(*n))
        error(s.items[1].span, "unknown constraint system '" + *n + "'");
    } else if (head == "query") {
      auto q = parse_query_form(s);
      if (q) doc.queries.push_back(*q);
    } else {
      error(s.span, "unknown top-level form '" + head + "'");
    }
  }

  void resolve_functionals(KnowledgeBase& kb) {
    if (pending_functionals_.empty()) return;
    // Names already used in unambiguous concrete-role positions.
    std::set<std::string> concrete;
    auto path_roles = [&](Concept c, auto&& self) -> void {
      switch (c.kind()) {
        case ConceptKind::CAtLeast:
        case ConceptKind::CAtMost:
          concrete.insert(c.concrete_role().name);
          break;
        case ConceptKind::CExists:
        case ConceptKind::CForall:
          concrete.insert(c.path1().concrete.name);
          concrete.insert(c.path2().concrete.name);
          break;
        case ConceptKind::CExistsInd:
        case ConceptKind::CForallInd:
          concrete.insert(c.path1().concrete.name);
          break;
        case ConceptKind::And:
        case ConceptKind::Or:
          self(c.left(), self);
          self(c.right(), self);
          break;
        case ConceptKind::Not:
        case ConceptKind::Exists:
        case ConceptKind::Forall:
        case ConceptKind::AtLeast:
        case ConceptKind::AtMost:
          self(c.child(), self);
          break;
        default:
          break;
      }
    };
    for (const auto& gci : kb.tbox) {
      path_roles(gci.lhs, path_roles);
      path_roles(gci.rhs, path_roles);
    }
    for (const auto& a : kb.abox) {
      if (const auto* ca = std::get_if<ConceptAssertion>(&a))
        path_roles(ca->concept_expr, path_roles);
      else if (const auto* cv = std::get_if<ConcreteValueFact>(&a))
        concrete.insert(cv->role.name);
    }
    for (const auto& cria : kb.rbox.concrete_rias) {
      concrete.insert(cria.sub.name);
      concrete.insert(cria.super.name);
    }
    for (const auto& pf : pending_functionals_) {
      if (concrete.count(pf.name)) {
        kb.rbox.assertions[pf.slot] =
            RoleAssertion{RoleAssertionKind::Functional, {}, {}, ConcreteRole{pf.name}};
      }
      // otherwise it stays an abstract functional role
    }
  }

  void validate(KnowledgeBase& kb) {
    // All relation symbols must belong to the declared system.
    const ConstraintSystemDef* sys = nullptr;
    if (kb.constraint_system) sys = ConstraintSystemDef::by_name(*kb.constraint_system);
    for (const auto& [rel, span] : used_relations_) {
      if (!kb.constraint_system) {
        error(span, "constraint relation '" + rel +
                        "' used without a (constraint-system ...) declaration");
        break;
      }
      if (sys && !sys->has_relation(rel))
        error(span, "relation '" + rel + "' is not part of constraint system " +
                        *kb.constraint_system);
    }
    try {
      free_vocabulary(kb);
    } catch (const VocabularyClashError& e) {
      error({}, e.what());
    }
  }

  const ParseOptions& opts_;
  std::vector<ParseDiagnostic>& diags_;
  std::vector<std::pair<std::string, SourceSpan>> used_relations_;
  std::vector<PendingFunctional> pending_functionals_;
};

bool has_error(const std::vector<ParseDiagnostic>& diags) {
  return std::any_of(diags.begin(), diags.end(),
                     [](const ParseDiagnostic& d) { return d.severity == Severity::Error; });
}

}  // namespace

ParseResult parse_document(std::string_view text, const ParseOptions& opts) {
  ParseResult res;
  Reader reader(text, res.diagnostics);
  auto forms = reader.read_all();
  FormParser fp(opts, res.diagnostics);
  Document doc = fp.parse(forms);
  if (!has_error(res.diagnostics)) res.doc = std::move(doc);
  return res;
}

ParseResult parse_kb(std::string_view text, const ParseOptions& opts) {
  ParseResult res = parse_document(text, opts);
  return res;
}

ConceptParseResult parse_concept(std::string_view text, const ParseOptions& opts) {
  ConceptParseResult out;
  Reader reader(text, out.diagnostics);
  auto forms = reader.read_all();
  if (forms.size() != 1) {
    out.diagnostics.push_back({Severity::Error, "expected exactly one concept expression", {}});
    return out;
  }
  FormParser fp(opts, out.diagnostics);
  auto c = fp.concept_only(forms[0]);
  if (c && !has_error(out.diagnostics)) out.concept_expr = *c;
  return out;
}

QueryParseResult parse_query(std::string_view text, const ParseOptions& opts) {
  QueryParseResult out;
  Reader reader(text, out.diagnostics);
  auto forms = reader.read_all();
  if (forms.size() != 1) {
    out.diagnostics.push_back({Severity::Error, "expected exactly one (query ...) form", {}});
    return out;
  }
  FormParser fp(opts, out.diagnostics);
  auto q = fp.query_only(forms[0]);
  if (q && !has_error(out.diagnostics)) out.query = *q;
  return out;
}

// ---------------------------------------------------------------------------
// Printing

std::string print_role(const RoleExpr& r) {
  if (r.universal) return "universal";
  if (r.inverse) return "(inv " + r.name + ")";
  return r.name;
}

static std::string print_path(const Path& p) {
  std::string out = "(path ";
  for (const auto& r : p.abstract_prefix) out += print_role(r) + " ";
  out += p.concrete.name + ")";
  return out;
}

std::string print_concept(Concept c) {
  switch (c.kind()) {
    case ConceptKind::Atomic: return c.name();
    case ConceptKind::Nominal: return "(one " + c.name() + ")";
    case ConceptKind::Top: return "top";
    case ConceptKind::Bottom: return "bottom";
    case ConceptKind::And:
      return "(and " + print_concept(c.left()) + " " + print_concept(c.right()) + ")";
    case ConceptKind::Or:
      return "(or " + print_concept(c.left()) + " " + print_concept(c.right()) + ")";
    case ConceptKind::Not: return "(not " + print_concept(c.child()) + ")";
    case ConceptKind::Exists:
      return "(some " + print_role(c.role()) + " " + print_concept(c.child()) + ")";
    case ConceptKind::Forall:
      return "(all " + print_role(c.role()) + " " + print_concept(c.child()) + ")";
    case ConceptKind::AtLeast:
      return "(atleast " + std::to_string(c.cardinality()) + " " + print_role(c.role()) + " " +
             print_concept(c.child()) + ")";
    case ConceptKind::AtMost:
      return "(atmost " + std::to_string(c.cardinality()) + " " + print_role(c.role()) + " " +
             print_concept(c.child()) + ")";
    case ConceptKind::SelfRestriction: return "(self " + print_role(c.role()) + ")";
    case ConceptKind::CAtLeast:
      return "(catleast " + std::to_string(c.cardinality()) + " " + c.concrete_role().name + ")";
    case ConceptKind::CAtMost:
      return "(catmost " + std::to_string(c.cardinality()) + " " + c.concrete_role().name + ")";
    case ConceptKind::CExists:
      return "(csome " + print_path(c.path1()) + " " + print_path(c.path2()) + " " +
             c.relation() + ")";
    case ConceptKind::CForall:
      return "(call " + print_path(c.path1()) + " " + print_path(c.path2()) + " " +
             c.relation() + ")";
    case ConceptKind::CExistsInd:
      if (c.individual_side() == IndividualSide::Right)
        return "(csome-ind " + print_path(c.path1()) + " " + c.name() + " " + c.relation() + ")";
      return "(cind-some " + c.name() + " " + print_path(c.path1()) + " " + c.relation() + ")";
    case ConceptKind::CForallInd:
      if (c.individual_side() == IndividualSide::Right)
        return "(call-ind " + print_path(c.path1()) + " " + c.name() + " " + c.relation() + ")";
      return "(cind-all " + c.name() + " " + print_path(c.path1()) + " " + c.relation() + ")";
    case ConceptKind::AutomatonForall:
      // Tableau-internal form; printable for traces and dumps, never parsed.
      return "(auto-forall " + print_role(c.role()) + " " + std::to_string(c.automaton_state()) +
             " " + print_concept(c.child()) + ")";
  }
  return "?";
}

std::string print_assertion(const Assertion& a) {
  return std::visit(
      [](const auto& f) -> std::string {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, ConceptAssertion>) {
          return "(instance " + f.individual + " " + print_concept(f.concept_expr) + ")";
        } else if constexpr (std::is_same_v<T, RoleFact>) {
          return std::string(f.negated ? "(not-related " : "(related ") + f.a + " " + f.b + " " +
                 print_role(f.role) + ")";
        } else if constexpr (std::is_same_v<T, DistinctFact>) {
          return "(distinct " + f.a + " " + f.b + ")";
        } else if constexpr (std::is_same_v<T, ConcreteValueFact>) {
          return "(cvalue " + f.individual + " " + f.role.name + " " + f.var + ")";
        } else {
          return "(cconstraint " + f.v1 + " " + f.rel + " " + f.v2 + ")";
        }
      },
      a);
}

static std::string print_gci(const Gci& g) {
  return "(implies " + print_concept(g.lhs) + " " + print_concept(g.rhs) + ")";
}

static std::string print_abstract_ria(const AbstractRia& r) {
  std::string out = "(ria (chain";
  for (const auto& role : r.chain) out += " " + print_role(role);
  out += ") " + print_role(r.rhs) + ")";
  return out;
}

static std::string print_role_assertion(const RoleAssertion& ra) {
  switch (ra.kind) {
    case RoleAssertionKind::Reflexive: return "(ref " + print_role(ra.r1) + ")";
    case RoleAssertionKind::Irreflexive: return "(irr " + print_role(ra.r1) + ")";
    case RoleAssertionKind::Disjoint:
      return "(dis " + print_role(ra.r1) + " " + print_role(ra.r2) + ")";
    case RoleAssertionKind::Symmetric: return "(sym " + print_role(ra.r1) + ")";
    case RoleAssertionKind::Transitive: return "(trans " + print_role(ra.r1) + ")";
    case RoleAssertionKind::Functional:
      return "(fxnl " + (ra.concrete ? ra.concrete->name : print_role(ra.r1)) + ")";
  }
  return "?";
}

std::string print_query(const Query& q) {
  return std::visit(
      [](const auto& v) -> std::string {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, QueryKbSat>) {
          return "(query sat)";
        } else if constexpr (std::is_same_v<T, QueryConceptSat>) {
          return "(query concept-sat " + print_concept(v.concept_expr) + ")";
        } else if constexpr (std::is_same_v<T, QuerySubsumes>) {
          return "(query subsumes " + print_concept(v.sub) + " " + print_concept(v.super) + ")";
        } else if constexpr (std::is_same_v<T, QueryInstance>) {
          return "(query instance " + v.individual + " " + print_concept(v.concept_expr) + ")";
        } else if constexpr (std::is_same_v<T, QueryGcSat>) {
          return "(query gc-sat)";
        } else if constexpr (std::is_same_v<T, QueryGcInstance>) {
          return "(query gc-instance " + v.individual + " " + print_concept(v.concept_expr) + ")";
        } else if constexpr (std::is_same_v<T, QueryGcConceptSat>) {
          return "(query gc-concept-sat " + print_concept(v.concept_expr) + ")";
        } else {
          return "(query gc-subsumes " + print_concept(v.sub) + " " + print_concept(v.super) + ")";
        }
      },
      q);
}

KnowledgeBase canonical(KnowledgeBase kb) {
  std::sort(kb.abox.begin(), kb.abox.end(), [](const Assertion& a, const Assertion& b) {
    return print_assertion(a) < print_assertion(b);
  });
  std::sort(kb.tbox.begin(), kb.tbox.end(),
            [](const Gci& a, const Gci& b) { return print_gci(a) < print_gci(b); });
  std::sort(kb.rbox.abstract_rias.begin(), kb.rbox.abstract_rias.end(),
            [](const AbstractRia& a, const AbstractRia& b) {
              return print_abstract_ria(a) < print_abstract_ria(b);
            });
  std::sort(kb.rbox.concrete_rias.begin(), kb.rbox.concrete_rias.end(),
            [](const ConcreteRia& a, const ConcreteRia& b) {
              return std::pair(a.sub.name, a.super.name) < std::pair(b.sub.name, b.super.name);
            });
  std::sort(kb.rbox.assertions.begin(), kb.rbox.assertions.end(),
            [](const RoleAssertion& a, const RoleAssertion& b) {
              return print_role_assertion(a) < print_role_assertion(b);
            });
  return kb;
}

std::string print_kb(const KnowledgeBase& kb_in) {
  KnowledgeBase kb = canonical(kb_in);
  std::ostringstream out;
  if (kb.constraint_system) out << "(constraint-system " << *kb.constraint_system << ")\n";
  out << "; abox\n";
  if (!kb.abox.empty()) {
    out << "(abox";
    for (const auto& a : kb.abox) out << "\n  " << print_assertion(a);
    out << ")\n";
  }
  out << "; tbox\n";
  if (!kb.tbox.empty()) {
    out << "(tbox";
    for (const auto& g : kb.tbox) out << "\n  " << print_gci(g);
    out << ")\n";
  }
  out << "; rbox\n";
  if (!kb.rbox.abstract_rias.empty() || !kb.rbox.concrete_rias.empty() ||
      !kb.rbox.assertions.empty()) {
    out << "(rbox";
    for (const auto& r : kb.rbox.abstract_rias) out << "\n  " << print_abstract_ria(r);
    for (const auto& r : kb.rbox.concrete_rias)
      out << "\n  (cria " << r.sub.name << " " << r.super.name << ")";
    for (const auto& ra : kb.rbox.assertions) out << "\n  " << print_role_assertion(ra);
    out << ")\n";
  }
  if (!kb.minimized.empty()) {
    out << "; circumscription\n";
    for (const auto& c : kb.minimized.concepts) out << "(minimize " << c << ")\n";
    for (const auto& r : kb.minimized.roles) out << "(minimize-role " << r << ")\n";
  }
  return out.str();
}

}  // namespace sroiqc
