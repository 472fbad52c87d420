#include "sroiqc/preprocess.hpp"

#include <algorithm>
#include <functional>

#include "sroiqc/text.hpp"

namespace sroiqc {

// ---------------------------------------------------------------------------
// RoleAutomaton

std::set<std::uint32_t> RoleAutomaton::eps_closure(std::uint32_t q) const {
  std::set<std::uint32_t> out{q};
  std::vector<std::uint32_t> work{q};
  while (!work.empty()) {
    std::uint32_t s = work.back();
    work.pop_back();
    for (const auto& t : transitions)
      if (t.from == s && !t.label && out.insert(t.to).second) work.push_back(t.to);
  }
  return out;
}

bool RoleAutomaton::accepts_epsilon_from(std::uint32_t q) const {
  return eps_closure(q).count(final) != 0;
}

std::vector<std::pair<RoleExpr, std::uint32_t>> RoleAutomaton::role_moves(std::uint32_t q) const {
  std::set<std::pair<RoleExpr, std::uint32_t>> out;
  for (std::uint32_t s : eps_closure(q))
    for (const auto& t : transitions)
      if (t.from == s && t.label) out.insert({*t.label, t.to});
  return {out.begin(), out.end()};
}

bool RoleAutomaton::accepts(const std::vector<RoleExpr>& word) const {
  std::set<std::uint32_t> states = eps_closure(initial);
  for (const auto& sym : word) {
    std::set<std::uint32_t> next;
    for (std::uint32_t s : states)
      for (const auto& t : transitions)
        if (t.from == s && t.label && *t.label == sym)
          for (std::uint32_t c : eps_closure(t.to)) next.insert(c);
    states = std::move(next);
    if (states.empty()) return false;
  }
  return states.count(final) != 0;
}

RoleAutomaton RoleAutomaton::mirrored() const {
  RoleAutomaton m;
  m.num_states = num_states;
  m.initial = final;
  m.final = initial;
  for (const auto& t : transitions) {
    if (t.label)
      m.transitions.push_back({t.to, t.label->inverted(), t.from});
    else
      m.transitions.push_back({t.to, std::nullopt, t.from});
  }
  return m;
}

const RoleAutomaton& ReducedKB::automaton(const RoleExpr& r) const {
  auto it = automata.find(r.name);
  if (it == automata.end())
    throw PreprocessError("no automaton for role " + print_role(r));
  if (!r.inverse) return it->second;
  auto mit = mirrored_cache_.find(r.name);
  if (mit == mirrored_cache_.end())
    mit = mirrored_cache_.emplace(r.name, it->second.mirrored()).first;
  return mit->second;
}

// ---------------------------------------------------------------------------
// Concept rewriting helpers

namespace {

Concept map_concept_roles(Concept c, const std::function<RoleExpr(const RoleExpr&)>& f) {
  switch (c.kind()) {
    case ConceptKind::And:
      return Concept::conj(map_concept_roles(c.left(), f), map_concept_roles(c.right(), f));
    case ConceptKind::Or:
      return Concept::disj(map_concept_roles(c.left(), f), map_concept_roles(c.right(), f));
    case ConceptKind::Not:
      return Concept::negation(map_concept_roles(c.child(), f));
    case ConceptKind::Exists:
      return Concept::exists(f(c.role()), map_concept_roles(c.child(), f));
    case ConceptKind::Forall:
      return Concept::forall(f(c.role()), map_concept_roles(c.child(), f));
    case ConceptKind::AtLeast:
      return Concept::at_least(c.cardinality(), f(c.role()), map_concept_roles(c.child(), f));
    case ConceptKind::AtMost:
      return Concept::at_most(c.cardinality(), f(c.role()), map_concept_roles(c.child(), f));
    case ConceptKind::SelfRestriction:
      return Concept::self_restriction(f(c.role()));
    default:
      return c;  // paths contain only simple roles, never the universal role
  }
}

void collect_role_names(Concept c, std::set<std::string>& names, bool& uses_universal) {
  switch (c.kind()) {
    case ConceptKind::And:
    case ConceptKind::Or:
      collect_role_names(c.left(), names, uses_universal);
      collect_role_names(c.right(), names, uses_universal);
      break;
    case ConceptKind::Not:
      collect_role_names(c.child(), names, uses_universal);
      break;
    case ConceptKind::Exists:
    case ConceptKind::Forall:
    case ConceptKind::AtLeast:
    case ConceptKind::AtMost:
      if (c.role().universal)
        uses_universal = true;
      else
        names.insert(c.role().name);
      collect_role_names(c.child(), names, uses_universal);
      break;
    case ConceptKind::SelfRestriction:
      if (c.role().universal)
        uses_universal = true;
      else
        names.insert(c.role().name);
      break;
    case ConceptKind::CExists:
    case ConceptKind::CForall:
      for (const auto& p : {c.path1(), c.path2()})
        for (const auto& r : p.abstract_prefix) names.insert(r.name);
      break;
    case ConceptKind::CExistsInd:
    case ConceptKind::CForallInd:
      for (const auto& r : c.path1().abstract_prefix) names.insert(r.name);
      break;
    default:
      break;
  }
}

std::string fresh_name(const std::set<std::string>& taken, std::string base) {
  if (!taken.count(base)) return base;
  for (int i = 1;; ++i) {
    std::string cand = base + "-" + std::to_string(i);
    if (!taken.count(cand)) return cand;
  }
}

std::set<std::string> all_symbols(const KnowledgeBase& kb) {
  VocabularyReport v = free_vocabulary(kb);
  std::set<std::string> out;
  for (const auto* s : {&v.concepts, &v.abstract_roles, &v.concrete_roles,
                        &v.abstract_individuals, &v.constraint_individuals})
    out.insert(s->begin(), s->end());
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// Universal role elimination

KnowledgeBase eliminate_universal_role(const KnowledgeBase& kb) {
  bool uses_universal = false;
  std::set<std::string> role_names;
  for (const auto& gci : kb.tbox) {
    collect_role_names(gci.lhs, role_names, uses_universal);
    collect_role_names(gci.rhs, role_names, uses_universal);
  }
  for (const auto& a : kb.abox) {
    if (const auto* ca = std::get_if<ConceptAssertion>(&a))
      collect_role_names(ca->concept_expr, role_names, uses_universal);
    else if (const auto* rf = std::get_if<RoleFact>(&a)) {
      if (rf->role.universal)
        uses_universal = true;
      else
        role_names.insert(rf->role.name);
    }
  }
  for (const auto& ria : kb.rbox.abstract_rias) {
    for (const auto& r : ria.chain) role_names.insert(r.name);
    role_names.insert(ria.rhs.name);
  }
  for (const auto& ra : kb.rbox.assertions) {
    if (ra.concrete) continue;
    role_names.insert(ra.r1.name);
    if (ra.kind == RoleAssertionKind::Disjoint) role_names.insert(ra.r2.name);
  }
  if (!uses_universal) return kb;

  KnowledgeBase out = kb;
  std::string uprime = fresh_name(all_symbols(kb), "u-univ");
  RoleExpr u = RoleExpr::named(uprime);
  auto subst = [&](const RoleExpr& r) { return r.universal ? u : r; };
  for (auto& gci : out.tbox) {
    gci.lhs = map_concept_roles(gci.lhs, subst);
    gci.rhs = map_concept_roles(gci.rhs, subst);
  }
  for (auto& a : out.abox) {
    if (auto* ca = std::get_if<ConceptAssertion>(&a))
      ca->concept_expr = map_concept_roles(ca->concept_expr, subst);
    else if (auto* rf = std::get_if<RoleFact>(&a))
      rf->role = subst(rf->role);
  }
  for (const auto& name : role_names)
    out.rbox.abstract_rias.push_back(AbstractRia{{RoleExpr::named(name)}, u});
  out.rbox.assertions.push_back(RoleAssertion{RoleAssertionKind::Transitive, u, {}, std::nullopt});
  out.rbox.assertions.push_back(RoleAssertion{RoleAssertionKind::Symmetric, u, {}, std::nullopt});
  out.rbox.assertions.push_back(RoleAssertion{RoleAssertionKind::Reflexive, u, {}, std::nullopt});
  return out;
}

// ---------------------------------------------------------------------------
// A-Box partial reduction

KnowledgeBase reduce_abox(const KnowledgeBase& kb) {
  KnowledgeBase out = kb;
  out.abox.clear();
  for (const auto& a : kb.abox) {
    std::visit(
        [&](const auto& fact) {
          using T = std::decay_t<decltype(fact)>;
          if constexpr (std::is_same_v<T, ConceptAssertion>) {
            out.tbox.push_back(Gci{Concept::nominal(fact.individual), fact.concept_expr});
          } else if constexpr (std::is_same_v<T, RoleFact>) {
            Concept oa = Concept::nominal(fact.a);
            Concept ob = Concept::nominal(fact.b);
            if (!fact.negated)
              out.tbox.push_back(Gci{oa, Concept::exists(fact.role, ob)});
            else
              out.tbox.push_back(Gci{oa, Concept::forall(fact.role, Concept::negation(ob))});
          } else if constexpr (std::is_same_v<T, DistinctFact>) {
            out.tbox.push_back(Gci{Concept::nominal(fact.a),
                                   Concept::negation(Concept::nominal(fact.b))});
            out.abox.push_back(fact);  // kept for the initializer's inequality seeding
          } else {
            out.abox.push_back(fact);  // cvalue / cconstraint are not reduced
          }
        },
        a);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Role assertion rewriting

namespace {

// Simplicity w.r.t. a RIA list: used both by rewrite (to decide whether a
// Ref assertion can become a Self restriction) and by analyze_roles.
std::set<std::string> non_simple_names(const std::vector<AbstractRia>& rias) {
  // Normalize RIAs so the right-hand side is a role name.
  std::vector<std::pair<std::vector<RoleExpr>, std::string>> norm;
  for (const auto& ria : rias) {
    std::vector<RoleExpr> chain = ria.chain;
    if (ria.rhs.inverse) {
      std::reverse(chain.begin(), chain.end());
      for (auto& r : chain) r = r.inverted();
    }
    norm.push_back({std::move(chain), ria.rhs.name});
  }
  std::set<std::string> non_simple;
  for (const auto& [chain, rhs] : norm)
    if (chain.size() >= 2) non_simple.insert(rhs);
  bool changed = true;
  while (changed) {
    changed = false;
    for (const auto& [chain, rhs] : norm)
      if (chain.size() == 1 && non_simple.count(chain[0].name) && !non_simple.count(rhs)) {
        non_simple.insert(rhs);
        changed = true;
      }
  }
  return non_simple;
}

}  // namespace

KnowledgeBase rewrite_role_assertions(const KnowledgeBase& kb) {
  KnowledgeBase out = kb;
  out.rbox.assertions.clear();
  // Sym/Trans first: their RIAs decide which roles stay simple, which in
  // turn decides whether Ref can be rewritten.
  for (const auto& ra : kb.rbox.assertions) {
    switch (ra.kind) {
      case RoleAssertionKind::Symmetric:
        out.rbox.abstract_rias.push_back(AbstractRia{{ra.r1.inverted()}, ra.r1});
        break;
      case RoleAssertionKind::Transitive:
        out.rbox.abstract_rias.push_back(AbstractRia{{ra.r1, ra.r1}, ra.r1});
        break;
      default:
        break;
    }
  }
  std::set<std::string> non_simple = non_simple_names(out.rbox.abstract_rias);
  for (const auto& ra : kb.rbox.assertions) {
    switch (ra.kind) {
      case RoleAssertionKind::Symmetric:
      case RoleAssertionKind::Transitive:
        break;  // already rewritten
      case RoleAssertionKind::Reflexive:
        if (!non_simple.count(ra.r1.name)) {
          out.tbox.push_back(Gci{Concept::top(), Concept::self_restriction(ra.r1)});
        } else {
          // Self restrictions require simple roles; the completion rules
          // consume Ref assertions on non-simple roles directly.
          out.rbox.assertions.push_back(ra);
        }
        break;
      case RoleAssertionKind::Functional:
        if (ra.concrete)
          out.tbox.push_back(Gci{Concept::top(), Concept::c_at_most(1, *ra.concrete)});
        else
          out.tbox.push_back(Gci{Concept::top(), Concept::at_most(1, ra.r1, Concept::top())});
        break;
      case RoleAssertionKind::Irreflexive:
        out.rbox.assertions.push_back(ra);
        // No dedicated irreflexivity clash exists; the Self-loop clash
        // covers it once every node carries the negated Self restriction.
        out.tbox.push_back(
            Gci{Concept::top(), Concept::negation(Concept::self_restriction(ra.r1))});
        break;
      case RoleAssertionKind::Disjoint:
        out.rbox.assertions.push_back(ra);
        break;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Role analysis

namespace {

struct NormalizedRia {
  std::vector<RoleExpr> chain;
  std::string rhs;  // role name
};

std::vector<NormalizedRia> normalize_rias(const std::vector<AbstractRia>& rias) {
  std::vector<NormalizedRia> out;
  for (const auto& ria : rias) {
    NormalizedRia n;
    n.chain = ria.chain;
    if (ria.rhs.inverse) {
      std::reverse(n.chain.begin(), n.chain.end());
      for (auto& r : n.chain) r = r.inverted();
    }
    n.rhs = ria.rhs.name;
    out.push_back(std::move(n));
  }
  return out;
}

void validate_concept_paths(Concept c, const RoleAnalysis& an) {
  auto check_path = [&](const Path& p) {
    for (const auto& r : p.abstract_prefix)
      if (!an.is_simple(r))
        throw PathViolationError("path uses non-simple role " + print_role(r) + " in " +
                                 print_concept(c));
  };
  switch (c.kind()) {
    case ConceptKind::And:
    case ConceptKind::Or:
      validate_concept_paths(c.left(), an);
      validate_concept_paths(c.right(), an);
      break;
    case ConceptKind::Not:
      validate_concept_paths(c.child(), an);
      break;
    case ConceptKind::Exists:
    case ConceptKind::Forall:
      validate_concept_paths(c.child(), an);
      break;
    case ConceptKind::AtLeast:
    case ConceptKind::AtMost:
      if (!an.is_simple(c.role()))
        throw PathViolationError("number restriction on non-simple role in " + print_concept(c));
      validate_concept_paths(c.child(), an);
      break;
    case ConceptKind::SelfRestriction:
      if (!an.is_simple(c.role()))
        throw PathViolationError("Self restriction on non-simple role in " + print_concept(c));
      break;
    case ConceptKind::CExists:
    case ConceptKind::CForall: {
      check_path(c.path1());
      check_path(c.path2());
      if (c.path1().length() == 2 && c.path2().length() == 2)
        throw PathViolationError("paths violate PNF in " + print_concept(c));
      break;
    }
    case ConceptKind::CExistsInd:
    case ConceptKind::CForallInd:
      check_path(c.path1());
      break;
    default:
      break;
  }
}

}  // namespace

RoleAnalysis analyze_roles(const KnowledgeBase& kb) {
  RoleAnalysis an;
  auto norm = normalize_rias(kb.rbox.abstract_rias);

  // Collect every role name in sight.
  std::set<std::string> names;
  bool uses_universal = false;
  for (const auto& gci : kb.tbox) {
    collect_role_names(gci.lhs, names, uses_universal);
    collect_role_names(gci.rhs, names, uses_universal);
  }
  for (const auto& a : kb.abox)
    if (const auto* ca = std::get_if<ConceptAssertion>(&a))
      collect_role_names(ca->concept_expr, names, uses_universal);
  for (const auto& n : norm) {
    for (const auto& r : n.chain) names.insert(r.name);
    names.insert(n.rhs);
  }
  for (const auto& ra : kb.rbox.assertions)
    if (!ra.concrete) {
      names.insert(ra.r1.name);
      if (ra.kind == RoleAssertionKind::Disjoint) names.insert(ra.r2.name);
    }

  // Simple roles.
  std::set<std::string> non_simple = non_simple_names(kb.rbox.abstract_rias);
  for (const auto& name : names)
    if (!non_simple.count(name)) {
      an.simple_roles.insert(RoleExpr::named(name));
      an.simple_roles.insert(RoleExpr::inverse_of(name));
    }

  // Regular order: each RIA contributes a unique precedence-constraint set
  // determined by its shape; a strict order exists iff the constraint
  // digraph over role names is acyclic.
  std::map<std::string, std::set<std::string>> prec;  // a -> {b : a < b}
  for (const auto& name : names) prec[name];
  auto add_prec = [&](const std::string& lo, const std::string& hi) {
    if (lo == hi)
      throw NotRegularError("RIA requires " + lo + " to precede itself");
    prec[lo].insert(hi);
  };
  for (const auto& n : norm) {
    const auto& w = n.chain;
    if (w.size() == 1) {
      if (w[0].name == n.rhs) continue;  // R <= R or Inv(R) <= R: no constraint
      add_prec(w[0].name, n.rhs);
      continue;
    }
    bool starts = !w.front().inverse && w.front().name == n.rhs;
    bool ends = !w.back().inverse && w.back().name == n.rhs;
    if (w.size() == 2 && starts && ends) continue;  // RR <= R
    if (starts && ends)
      throw NotRegularError("RIA " + print_role(RoleExpr::named(n.rhs)) +
                            ": chain both starts and ends with the defined role");
    std::size_t lo = starts ? 1 : 0;
    std::size_t hi = ends ? w.size() - 1 : w.size();
    for (std::size_t i = lo; i < hi; ++i) add_prec(w[i].name, n.rhs);
  }
  // Cycle check via DFS; report the offending cycle.
  {
    std::map<std::string, int> state;  // 0 new, 1 active, 2 done
    std::vector<std::string> stack;
    std::function<void(const std::string&)> dfs = [&](const std::string& v) {
      state[v] = 1;
      stack.push_back(v);
      for (const auto& w : prec[v]) {
        if (state[w] == 1) {
          std::string cycle;
          auto it = std::find(stack.begin(), stack.end(), w);
          for (; it != stack.end(); ++it) cycle += *it + " < ";
          cycle += w;
          throw NotRegularError("no regular order exists: " + cycle);
        }
        if (state[w] == 0) dfs(w);
      }
      state[v] = 2;
      stack.pop_back();
    };
    for (const auto& [v, _] : prec)
      if (state[v] == 0) dfs(v);
  }
  // Witness: deterministic topological order (ascending precedence).
  {
    std::map<std::string, std::size_t> indeg;
    for (const auto& [v, _] : prec) indeg[v];
    for (const auto& [v, succs] : prec)
      for (const auto& w : succs) indeg[w]++;
    std::vector<std::string> order;
    std::set<std::string> ready;
    for (const auto& [v, d] : indeg)
      if (d == 0) ready.insert(v);
    while (!ready.empty()) {
      std::string v = *ready.begin();
      ready.erase(ready.begin());
      order.push_back(v);
      for (const auto& w : prec[v])
        if (--indeg[w] == 0) ready.insert(w);
    }
    an.regular_order_witness = order;
  }

  // Subrole closures.
  {
    std::set<RoleExpr> exprs;
    for (const auto& name : names) {
      exprs.insert(RoleExpr::named(name));
      exprs.insert(RoleExpr::inverse_of(name));
    }
    std::set<std::pair<RoleExpr, RoleExpr>> direct;
    for (const auto& n : norm)
      if (n.chain.size() == 1) {
        RoleExpr sub = n.chain[0];
        RoleExpr sup = RoleExpr::named(n.rhs);
        direct.insert({sub, sup});
        direct.insert({sub.inverted(), sup.inverted()});
      }
    // reflexive-transitive closure
    std::set<std::pair<RoleExpr, RoleExpr>> closure = direct;
    for (const auto& e : exprs) closure.insert({e, e});
    bool changed = true;
    while (changed) {
      changed = false;
      for (const auto& [a, b] : std::set<std::pair<RoleExpr, RoleExpr>>(closure))
        for (const auto& [c, d] : direct)
          if (b == c && closure.insert({a, d}).second) changed = true;
    }
    an.subrole_closure = std::move(closure);
  }
  {
    std::set<std::pair<std::string, std::string>> closure;
    std::set<std::string> cnames;
    for (const auto& cria : kb.rbox.concrete_rias) {
      closure.insert({cria.sub.name, cria.super.name});
      cnames.insert(cria.sub.name);
      cnames.insert(cria.super.name);
    }
    for (const auto& n : cnames) closure.insert({n, n});
    bool changed = true;
    while (changed) {
      changed = false;
      for (const auto& [a, b] : std::set<std::pair<std::string, std::string>>(closure))
        for (const auto& [c, d] : std::set<std::pair<std::string, std::string>>(closure))
          if (b == c && closure.insert({a, d}).second) changed = true;
    }
    an.concrete_subrole_closure = std::move(closure);
  }

  // Fatal validations: PNF, simple roles in paths and number restrictions,
  // simplicity of Dis/Irr/Fxnl operands.
  for (const auto& gci : kb.tbox) {
    validate_concept_paths(gci.lhs, an);
    validate_concept_paths(gci.rhs, an);
  }
  for (const auto& a : kb.abox)
    if (const auto* ca = std::get_if<ConceptAssertion>(&a))
      validate_concept_paths(ca->concept_expr, an);
  for (const auto& ra : kb.rbox.assertions) {
    if (ra.concrete) continue;
    switch (ra.kind) {
      case RoleAssertionKind::Disjoint:
        if (!an.is_simple(ra.r1) || !an.is_simple(ra.r2))
          throw PathViolationError("Dis requires simple roles");
        break;
      case RoleAssertionKind::Irreflexive:
        if (!an.is_simple(ra.r1)) throw PathViolationError("Irr requires a simple role");
        break;
      case RoleAssertionKind::Functional:
        if (!an.is_simple(ra.r1))
          throw PathViolationError("Fxnl requires a simple abstract role");
        break;
      default:
        break;
    }
  }
  return an;
}

// ---------------------------------------------------------------------------
// NNF

Concept nnf(Concept c, const ConstraintSystemDef* sys) {
  switch (c.kind()) {
    case ConceptKind::And:
      return Concept::conj(nnf(c.left(), sys), nnf(c.right(), sys));
    case ConceptKind::Or:
      return Concept::disj(nnf(c.left(), sys), nnf(c.right(), sys));
    case ConceptKind::Not:
      return nnf_negated(c.child(), sys);
    case ConceptKind::Exists:
      return Concept::exists(c.role(), nnf(c.child(), sys));
    case ConceptKind::Forall:
      return Concept::forall(c.role(), nnf(c.child(), sys));
    case ConceptKind::AtLeast:
      return Concept::at_least(c.cardinality(), c.role(), nnf(c.child(), sys));
    case ConceptKind::AtMost:
      return Concept::at_most(c.cardinality(), c.role(), nnf(c.child(), sys));
    default:
      return c;
  }
}

Concept nnf_negated(Concept c, const ConstraintSystemDef* sys) {
  switch (c.kind()) {
    case ConceptKind::Top:
      return Concept::bottom();
    case ConceptKind::Bottom:
      return Concept::top();
    case ConceptKind::Atomic:
    case ConceptKind::Nominal:
    case ConceptKind::SelfRestriction:
      return Concept::negation(c);
    case ConceptKind::Not:
      return nnf(c.child(), sys);
    case ConceptKind::And:
      return Concept::disj(nnf_negated(c.left(), sys), nnf_negated(c.right(), sys));
    case ConceptKind::Or:
      return Concept::conj(nnf_negated(c.left(), sys), nnf_negated(c.right(), sys));
    case ConceptKind::Exists:
      return Concept::forall(c.role(), nnf_negated(c.child(), sys));
    case ConceptKind::Forall:
      return Concept::exists(c.role(), nnf_negated(c.child(), sys));
    case ConceptKind::AtLeast:
      if (c.cardinality() == 0) return Concept::bottom();
      return Concept::at_most(c.cardinality() - 1, c.role(), nnf(c.child(), sys));
    case ConceptKind::AtMost:
      return Concept::at_least(c.cardinality() + 1, c.role(), nnf(c.child(), sys));
    case ConceptKind::CAtLeast:
      if (c.cardinality() == 0) return Concept::bottom();
      return Concept::c_at_most(c.cardinality() - 1, c.concrete_role());
    case ConceptKind::CAtMost:
      return Concept::c_at_least(c.cardinality() + 1, c.concrete_role());
    case ConceptKind::CForall: {
      if (!sys)
        throw PreprocessError("negated universal concrete concept without a constraint system");
      // Disjunction over all other base relations, right-folded in Rel order.
      std::vector<Concept> parts;
      for (const auto& rel : sys->relations())
        if (rel != c.relation()) parts.push_back(Concept::c_exists(c.path1(), c.path2(), rel));
      if (parts.empty()) return Concept::bottom();
      Concept out = parts.back();
      for (auto it = parts.rbegin() + 1; it != parts.rend(); ++it)
        out = Concept::disj(*it, out);
      return out;
    }
    case ConceptKind::CForallInd: {
      if (!sys)
        throw PreprocessError("negated universal concrete concept without a constraint system");
      std::vector<Concept> parts;
      for (const auto& rel : sys->relations())
        if (rel != c.relation())
          parts.push_back(Concept::c_exists_ind(c.path1(), c.name(), c.individual_side(), rel));
      if (parts.empty()) return Concept::bottom();
      Concept out = parts.back();
      for (auto it = parts.rbegin() + 1; it != parts.rend(); ++it)
        out = Concept::disj(*it, out);
      return out;
    }
    case ConceptKind::CExists:
    case ConceptKind::CExistsInd:
      // Irreducible: handled by negative templates and clash conditions.
      return Concept::negation(c);
    case ConceptKind::AutomatonForall:
      throw PreprocessError("automaton concepts are never negated");
  }
  return Concept::negation(c);
}

// ---------------------------------------------------------------------------
// Automaton compilation

namespace {

struct AutomatonBuilder {
  const std::vector<NormalizedRia>& rias;
  std::map<std::string, RoleAutomaton> done;

  explicit AutomatonBuilder(const std::vector<NormalizedRia>& r) : rias(r) {}

  // Base automaton A_R from the RIA transition schemas.
  RoleAutomaton base(const std::string& name) {
    RoleAutomaton a;
    a.num_states = 2;
    a.initial = 0;
    a.final = 1;
    a.transitions.push_back({0, RoleExpr::named(name), 1});
    for (const auto& ria : rias) {
      if (ria.rhs != name) continue;
      const auto& w = ria.chain;
      if (w.size() == 1) {
        if (w[0].name == name) {
          if (!w[0].inverse && w.size() == 1) continue;  // R <= R: vacuous
          continue;  // Inv(R) <= R handled by the mirrored-copy step
        }
        // unit RIA: i_R -e-> s -S-> t -e-> f_R
        std::uint32_t s = a.num_states++, t = a.num_states++;
        a.transitions.push_back({a.initial, std::nullopt, s});
        a.transitions.push_back({s, w[0], t});
        a.transitions.push_back({t, std::nullopt, a.final});
        continue;
      }
      bool starts = !w.front().inverse && w.front().name == name;
      bool ends = !w.back().inverse && w.back().name == name;
      if (w.size() == 2 && starts && ends) {
        // RR <= R: epsilon from final back to initial
        a.transitions.push_back({a.final, std::nullopt, a.initial});
        continue;
      }
      if (starts) {
        // w = R R2..Rn: f_R -e-> s1 -R2-> ... -Rn-> sk -e-> f_R
        std::uint32_t prev = a.num_states++;
        a.transitions.push_back({a.final, std::nullopt, prev});
        for (std::size_t i = 1; i < w.size(); ++i) {
          std::uint32_t next = a.num_states++;
          a.transitions.push_back({prev, w[i], next});
          prev = next;
        }
        a.transitions.push_back({prev, std::nullopt, a.final});
      } else if (ends) {
        // w = R1..R(n-1) R: i_R -e-> s1 -R1-> ... -R(n-1)-> sk -e-> i_R
        std::uint32_t prev = a.num_states++;
        a.transitions.push_back({a.initial, std::nullopt, prev});
        for (std::size_t i = 0; i + 1 < w.size(); ++i) {
          std::uint32_t next = a.num_states++;
          a.transitions.push_back({prev, w[i], next});
          prev = next;
        }
        a.transitions.push_back({prev, std::nullopt, a.initial});
      } else {
        // generic: i_R -e-> s1 -R1-> ... -Rn-> sk -e-> f_R
        std::uint32_t prev = a.num_states++;
        a.transitions.push_back({a.initial, std::nullopt, prev});
        for (const auto& sym : w) {
          std::uint32_t next = a.num_states++;
          a.transitions.push_back({prev, sym, next});
          prev = next;
        }
        a.transitions.push_back({prev, std::nullopt, a.final});
      }
    }
    return a;
  }

  // A-hat: symmetric closure when Inv(R) <= R is asserted.
  RoleAutomaton hat(const std::string& name) {
    RoleAutomaton a = base(name);
    bool symmetric = false;
    for (const auto& ria : rias)
      if (ria.rhs == name && ria.chain.size() == 1 && ria.chain[0].inverse &&
          ria.chain[0].name == name)
        symmetric = true;
    if (!symmetric) return a;
    RoleAutomaton m = a.mirrored();
    std::uint32_t offset = a.num_states;
    RoleAutomaton out = a;
    out.num_states += m.num_states;
    for (const auto& t : m.transitions)
      out.transitions.push_back({t.from + offset, t.label, t.to + offset});
    std::uint32_t f_copy = m.initial + offset;  // mirror of f_R is the mirror's initial
    std::uint32_t i_copy = m.final + offset;    // mirror of i_R is the mirror's final
    out.transitions.push_back({out.initial, std::nullopt, f_copy});
    out.transitions.push_back({i_copy, std::nullopt, out.final});
    return out;
  }

  // B_R: inductively splice sub-automata over the precedence order.
  const RoleAutomaton& build(const std::string& name) {
    auto it = done.find(name);
    if (it != done.end()) return it->second;
    RoleAutomaton a = hat(name);
    RoleAutomaton out;
    out.num_states = a.num_states;
    out.initial = a.initial;
    out.final = a.final;
    for (const auto& t : a.transitions) {
      out.transitions.push_back(t);
      if (!t.label || t.label->name == name) continue;
      // Splice a copy of B_S between the endpoints. Precedence acyclicity
      // bounds the recursion.
      const RoleAutomaton& sub_base = build(t.label->name);
      RoleAutomaton sub = t.label->inverse ? sub_base.mirrored() : sub_base;
      std::uint32_t offset = out.num_states;
      out.num_states += sub.num_states;
      for (const auto& st : sub.transitions)
        out.transitions.push_back({st.from + offset, st.label, st.to + offset});
      out.transitions.push_back({t.from, std::nullopt, sub.initial + offset});
      out.transitions.push_back({sub.final + offset, std::nullopt, t.to});
    }
    return done.emplace(name, std::move(out)).first->second;
  }
};

}  // namespace

std::map<std::string, RoleAutomaton> compile_automata(const KnowledgeBase& kb,
                                                      const RoleAnalysis& analysis) {
  if (!analysis.regular_order_witness)
    throw NotRegularError("cannot compile automata without a regular order");
  auto norm = normalize_rias(kb.rbox.abstract_rias);
  AutomatonBuilder builder(norm);
  std::map<std::string, RoleAutomaton> out;
  for (const auto& name : *analysis.regular_order_witness) builder.build(name);
  for (auto& [name, a] : builder.done) out[name] = a;
  return out;
}

// ---------------------------------------------------------------------------
// Closure

namespace {

// Sub(D): sub-expression closure together with NNF'd negations.
void sub_with_negations(Concept c, const ConstraintSystemDef* sys, ConceptSet& out) {
  std::vector<Concept> work{c};
  while (!work.empty()) {
    Concept x = work.back();
    work.pop_back();
    if (!out.insert(x).second) continue;
    switch (x.kind()) {
      case ConceptKind::Not:
      case ConceptKind::Exists:
      case ConceptKind::Forall:
      case ConceptKind::AtLeast:
      case ConceptKind::AtMost:
        work.push_back(x.child());
        break;
      case ConceptKind::And:
      case ConceptKind::Or:
        work.push_back(x.left());
        work.push_back(x.right());
        break;
      default:
        break;
    }
    if (x.kind() != ConceptKind::AutomatonForall) work.push_back(nnf_negated(x, sys));
  }
}

}  // namespace

ConceptSet compute_clos(const std::vector<Concept>& internalized_tbox, const ReducedKB& rkb) {
  ConceptSet out;
  for (Concept c : internalized_tbox) sub_with_negations(c, rkb.system, out);
  // forall B_S(q).D for every universal restriction and automaton state
  ConceptSet snapshot = out;
  for (Concept c : snapshot) {
    if (c.kind() != ConceptKind::Forall) continue;
    const RoleAutomaton& aut = rkb.automaton(c.role());
    for (std::uint32_t q = 0; q < aut.num_states; ++q)
      out.insert(Concept::automaton_forall(c.role(), q, c.child()));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Pipeline

ReducedKB preprocess(const KnowledgeBase& kb, const PreprocessOptions& opts) {
  VocabularyReport vocab = free_vocabulary(kb);

  ReducedKB rkb;
  if (opts.system_override)
    rkb.system = opts.system_override;
  else if (kb.constraint_system)
    rkb.system = ConstraintSystemDef::by_name(*kb.constraint_system);
  if (!rkb.system) rkb.system = &ConstraintSystemDef::point();  // unused default

  KnowledgeBase k = eliminate_universal_role(kb);
  k = reduce_abox(k);
  k = rewrite_role_assertions(k);
  rkb.role_analysis = analyze_roles(k);

  for (const auto& a : k.abox) {
    if (const auto* cv = std::get_if<ConcreteValueFact>(&a))
      rkb.cvalues.push_back(*cv);
    else if (const auto* cc = std::get_if<ConstraintFact>(&a))
      rkb.cconstraints.push_back(*cc);
    else if (const auto* d = std::get_if<DistinctFact>(&a))
      rkb.distincts.push_back(*d);
  }
  rkb.residual_role_assertions = k.rbox.assertions;
  rkb.automata = compile_automata(k, rkb.role_analysis);

  for (const auto& gci : k.tbox)
    rkb.tbox.push_back(nnf(Concept::disj(Concept::negation(gci.lhs), gci.rhs), rkb.system));
  // Deduplicate while preserving first-occurrence order.
  {
    ConceptSet seen;
    std::vector<Concept> dedup;
    for (Concept c : rkb.tbox)
      if (seen.insert(c).second) dedup.push_back(c);
    rkb.tbox = std::move(dedup);
  }
  rkb.clos = compute_clos(rkb.tbox, rkb);

  rkb.named_individuals = vocab.abstract_individuals;
  rkb.constraint_individuals = vocab.constraint_individuals;

  // Every constraint individual must be anchored by some cvalue fact.
  std::set<std::string> anchored;
  for (const auto& cv : rkb.cvalues) anchored.insert(cv.var);
  for (const auto& i : rkb.constraint_individuals)
    if (!anchored.count(i))
      throw PreprocessError("constraint individual '" + i +
                            "' does not appear in any cvalue assertion");
  return rkb;
}

}  // namespace sroiqc
