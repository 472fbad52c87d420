#include "sroiqc/kb.hpp"

#include <mutex>
#include <tuple>
#include <unordered_map>

namespace sroiqc {

namespace {

struct ConceptNode {
  ConceptKind kind;
  std::uint32_t n = 0;  // cardinality, or automaton state
  std::uint32_t child0 = 0;
  std::uint32_t child1 = 0;
  RoleExpr role{};
  ConcreteRole crole{};
  Path p1{};
  Path p2{};
  std::string name{};
  std::string rel{};
  IndividualSide side = IndividualSide::Left;

  bool operator==(const ConceptNode&) const = default;
};

struct NodeHash {
  std::size_t operator()(const ConceptNode& n) const {
    std::size_t h = static_cast<std::size_t>(n.kind);
    auto mix = [&h](std::size_t v) { h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2); };
    mix(n.n);
    mix(n.child0);
    mix(n.child1);
    mix(std::hash<std::string>{}(n.role.name));
    mix(n.role.inverse * 2u + n.role.universal);
    mix(std::hash<std::string>{}(n.crole.name));
    mix(std::hash<std::string>{}(n.name));
    mix(std::hash<std::string>{}(n.rel));
    mix(static_cast<std::size_t>(n.side));
    auto mix_path = [&](const Path& p) {
      mix(p.abstract_prefix.size());
      for (const auto& r : p.abstract_prefix) {
        mix(std::hash<std::string>{}(r.name));
        mix(r.inverse * 2u + r.universal);
      }
      mix(std::hash<std::string>{}(p.concrete.name));
    };
    mix_path(n.p1);
    mix_path(n.p2);
    return h;
  }
};

}  // namespace

// Process-wide intern pool. Ids are stable for the process lifetime, so a
// Concept handle can be shared freely across threads; interning itself is
// guarded by a mutex.
struct ConceptPool {
  std::mutex mu;
  std::vector<ConceptNode> nodes;
  std::unordered_map<ConceptNode, std::uint32_t, NodeHash> index;

  ConceptPool() {
    // id 0 = Top, id 1 = Bottom; keeps default Concept meaningful.
    intern(ConceptNode{ConceptKind::Top});
    intern(ConceptNode{ConceptKind::Bottom});
  }

  std::uint32_t intern(const ConceptNode& node) {
    std::lock_guard<std::mutex> lock(mu);
    auto it = index.find(node);
    if (it != index.end()) return it->second;
    std::uint32_t id = static_cast<std::uint32_t>(nodes.size());
    nodes.push_back(node);
    index.emplace(node, id);
    return id;
  }

  const ConceptNode& at(std::uint32_t id) const { return nodes[id]; }

  static ConceptPool& instance() {
    static ConceptPool pool;
    return pool;
  }

  static Concept wrap(std::uint32_t id) { return Concept(id); }
};

static const ConceptNode& node_of(const Concept& c) {
  return ConceptPool::instance().at(c.id());
}

static Concept make(const ConceptNode& n) {
  return ConceptPool::wrap(ConceptPool::instance().intern(n));
}

Concept Concept::atomic(const std::string& name) {
  ConceptNode n{ConceptKind::Atomic};
  n.name = name;
  return make(n);
}
Concept Concept::nominal(const std::string& individual) {
  ConceptNode n{ConceptKind::Nominal};
  n.name = individual;
  return make(n);
}
Concept Concept::top() {
  return make(ConceptNode{ConceptKind::Top});
}
Concept Concept::bottom() {
  return make(ConceptNode{ConceptKind::Bottom});
}
Concept Concept::conj(Concept a, Concept b) {
  ConceptNode n{ConceptKind::And};
  n.child0 = a.id();
  n.child1 = b.id();
  return make(n);
}
Concept Concept::disj(Concept a, Concept b) {
  ConceptNode n{ConceptKind::Or};
  n.child0 = a.id();
  n.child1 = b.id();
  return make(n);
}
Concept Concept::negation(Concept c) {
  ConceptNode n{ConceptKind::Not};
  n.child0 = c.id();
  return make(n);
}
Concept Concept::exists(const RoleExpr& r, Concept c) {
  ConceptNode n{ConceptKind::Exists};
  n.role = r;
  n.child0 = c.id();
  return make(n);
}
Concept Concept::forall(const RoleExpr& r, Concept c) {
  ConceptNode n{ConceptKind::Forall};
  n.role = r;
  n.child0 = c.id();
  return make(n);
}
Concept Concept::at_least(std::uint32_t k, const RoleExpr& r, Concept c) {
  ConceptNode n{ConceptKind::AtLeast};
  n.n = k;
  n.role = r;
  n.child0 = c.id();
  return make(n);
}
Concept Concept::at_most(std::uint32_t k, const RoleExpr& r, Concept c) {
  ConceptNode n{ConceptKind::AtMost};
  n.n = k;
  n.role = r;
  n.child0 = c.id();
  return make(n);
}
Concept Concept::self_restriction(const RoleExpr& r) {
  ConceptNode n{ConceptKind::SelfRestriction};
  n.role = r;
  return make(n);
}
Concept Concept::c_at_least(std::uint32_t k, const ConcreteRole& g) {
  ConceptNode n{ConceptKind::CAtLeast};
  n.n = k;
  n.crole = g;
  return make(n);
}
Concept Concept::c_at_most(std::uint32_t k, const ConcreteRole& g) {
  ConceptNode n{ConceptKind::CAtMost};
  n.n = k;
  n.crole = g;
  return make(n);
}
Concept Concept::c_exists(const Path& u1, const Path& u2, const std::string& rel) {
  ConceptNode n{ConceptKind::CExists};
  n.p1 = u1;
  n.p2 = u2;
  n.rel = rel;
  return make(n);
}
Concept Concept::c_forall(const Path& u1, const Path& u2, const std::string& rel) {
  ConceptNode n{ConceptKind::CForall};
  n.p1 = u1;
  n.p2 = u2;
  n.rel = rel;
  return make(n);
}
Concept Concept::c_exists_ind(const Path& u, const std::string& individual,
                              IndividualSide side, const std::string& rel) {
  ConceptNode n{ConceptKind::CExistsInd};
  n.p1 = u;
  n.name = individual;
  n.side = side;
  n.rel = rel;
  return make(n);
}
Concept Concept::c_forall_ind(const Path& u, const std::string& individual,
                              IndividualSide side, const std::string& rel) {
  ConceptNode n{ConceptKind::CForallInd};
  n.p1 = u;
  n.name = individual;
  n.side = side;
  n.rel = rel;
  return make(n);
}
Concept Concept::automaton_forall(const RoleExpr& role, std::uint32_t state, Concept filler) {
  ConceptNode n{ConceptKind::AutomatonForall};
  n.role = role;
  n.n = state;
  n.child0 = filler.id();
  return make(n);
}

ConceptKind Concept::kind() const { return node_of(*this).kind; }
const std::string& Concept::name() const { return node_of(*this).name; }
const std::string& Concept::relation() const { return node_of(*this).rel; }
std::uint32_t Concept::cardinality() const { return node_of(*this).n; }
std::uint32_t Concept::automaton_state() const { return node_of(*this).n; }
const RoleExpr& Concept::role() const { return node_of(*this).role; }
const ConcreteRole& Concept::concrete_role() const { return node_of(*this).crole; }
const Path& Concept::path1() const { return node_of(*this).p1; }
const Path& Concept::path2() const { return node_of(*this).p2; }
IndividualSide Concept::individual_side() const { return node_of(*this).side; }
Concept Concept::child() const { return ConceptPool::wrap(node_of(*this).child0); }
Concept Concept::left() const { return child(); }
Concept Concept::right() const { return ConceptPool::wrap(node_of(*this).child1); }

ConceptSet subexpressions(Concept d) {
  ConceptSet out;
  std::vector<Concept> work{d};
  while (!work.empty()) {
    Concept c = work.back();
    work.pop_back();
    if (!out.insert(c).second) continue;
    switch (c.kind()) {
      case ConceptKind::Not:
      case ConceptKind::Exists:
      case ConceptKind::Forall:
      case ConceptKind::AtLeast:
      case ConceptKind::AtMost:
        work.push_back(c.child());
        break;
      case ConceptKind::And:
      case ConceptKind::Or:
        work.push_back(c.left());
        work.push_back(c.right());
        break;
      default:
        break;  // atomic, nominal, Top/Bottom, Self, concrete, automaton
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Vocabulary

namespace {

enum class SymCat { Concept, AbstractRole, ConcreteRole, AbstractInd, ConstraintInd };

const char* cat_name(SymCat c) {
  switch (c) {
    case SymCat::Concept: return "concept";
    case SymCat::AbstractRole: return "abstract role";
    case SymCat::ConcreteRole: return "concrete role";
    case SymCat::AbstractInd: return "abstract individual";
    case SymCat::ConstraintInd: return "constraint individual";
  }
  return "?";
}

struct VocabCollector {
  std::map<std::string, SymCat> seen;
  VocabularyReport report;

  void add(const std::string& sym, SymCat cat) {
    auto [it, fresh] = seen.emplace(sym, cat);
    if (!fresh && it->second != cat) {
      throw VocabularyClashError("symbol '" + sym + "' used both as " +
                                 cat_name(it->second) + " and as " + cat_name(cat));
    }
    switch (cat) {
      case SymCat::Concept: report.concepts.insert(sym); break;
      case SymCat::AbstractRole: report.abstract_roles.insert(sym); break;
      case SymCat::ConcreteRole: report.concrete_roles.insert(sym); break;
      case SymCat::AbstractInd: report.abstract_individuals.insert(sym); break;
      case SymCat::ConstraintInd: report.constraint_individuals.insert(sym); break;
    }
  }

  void add_role(const RoleExpr& r) {
    if (!r.universal) add(r.name, SymCat::AbstractRole);
  }
  void add_path(const Path& p) {
    for (const auto& r : p.abstract_prefix) add_role(r);
    add(p.concrete.name, SymCat::ConcreteRole);
  }

  void add_concept(Concept c) {
    switch (c.kind()) {
      case ConceptKind::Atomic: add(c.name(), SymCat::Concept); break;
      case ConceptKind::Nominal: add(c.name(), SymCat::AbstractInd); break;
      case ConceptKind::Top:
      case ConceptKind::Bottom: break;
      case ConceptKind::And:
      case ConceptKind::Or:
        add_concept(c.left());
        add_concept(c.right());
        break;
      case ConceptKind::Not: add_concept(c.child()); break;
      case ConceptKind::Exists:
      case ConceptKind::Forall:
      case ConceptKind::AtLeast:
      case ConceptKind::AtMost:
        add_role(c.role());
        add_concept(c.child());
        break;
      case ConceptKind::SelfRestriction: add_role(c.role()); break;
      case ConceptKind::CAtLeast:
      case ConceptKind::CAtMost:
        add(c.concrete_role().name, SymCat::ConcreteRole);
        break;
      case ConceptKind::CExists:
      case ConceptKind::CForall:
        add_path(c.path1());
        add_path(c.path2());
        break;
      case ConceptKind::CExistsInd:
      case ConceptKind::CForallInd:
        add_path(c.path1());
        add(c.name(), SymCat::ConstraintInd);
        break;
      case ConceptKind::AutomatonForall:
        add_role(c.role());
        add_concept(c.child());
        break;
    }
  }
};

}  // namespace

VocabularyReport free_vocabulary(const KnowledgeBase& kb) {
  VocabCollector v;
  for (const auto& a : kb.abox) {
    std::visit(
        [&](const auto& fact) {
          using T = std::decay_t<decltype(fact)>;
          if constexpr (std::is_same_v<T, ConceptAssertion>) {
            v.add(fact.individual, SymCat::AbstractInd);
            v.add_concept(fact.concept_expr);
          } else if constexpr (std::is_same_v<T, RoleFact>) {
            v.add(fact.a, SymCat::AbstractInd);
            v.add(fact.b, SymCat::AbstractInd);
            v.add_role(fact.role);
          } else if constexpr (std::is_same_v<T, DistinctFact>) {
            v.add(fact.a, SymCat::AbstractInd);
            v.add(fact.b, SymCat::AbstractInd);
          } else if constexpr (std::is_same_v<T, ConcreteValueFact>) {
            v.add(fact.individual, SymCat::AbstractInd);
            v.add(fact.role.name, SymCat::ConcreteRole);
            v.add(fact.var, SymCat::ConstraintInd);
          } else if constexpr (std::is_same_v<T, ConstraintFact>) {
            v.add(fact.v1, SymCat::ConstraintInd);
            v.add(fact.v2, SymCat::ConstraintInd);
          }
        },
        a);
  }
  for (const auto& gci : kb.tbox) {
    v.add_concept(gci.lhs);
    v.add_concept(gci.rhs);
  }
  for (const auto& ria : kb.rbox.abstract_rias) {
    for (const auto& r : ria.chain) v.add_role(r);
    v.add_role(ria.rhs);
  }
  for (const auto& cria : kb.rbox.concrete_rias) {
    v.add(cria.sub.name, SymCat::ConcreteRole);
    v.add(cria.super.name, SymCat::ConcreteRole);
  }
  for (const auto& ra : kb.rbox.assertions) {
    if (ra.concrete) {
      v.add(ra.concrete->name, SymCat::ConcreteRole);
    } else {
      v.add_role(ra.r1);
      if (ra.kind == RoleAssertionKind::Disjoint) v.add_role(ra.r2);
    }
  }
  for (const auto& c : kb.minimized.concepts) v.add(c, SymCat::Concept);
  for (const auto& r : kb.minimized.roles) v.add(r, SymCat::AbstractRole);
  return v.report;
}

}  // namespace sroiqc
