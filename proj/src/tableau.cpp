#include "sroiqc/tableau.hpp"

#include <algorithm>
#include <bit>
#include <sstream>

#include "sroiqc/text.hpp"

namespace sroiqc {

const char* rule_name(RuleId r) {
  switch (r) {
    case RuleId::Connect: return "Rconnect";
    case RuleId::Complete: return "Rcomplete";
    case RuleId::ORule: return "o-rule";
    case RuleId::NN: return "NN-rule";
    case RuleId::AtMost: return "<=-rule";
    case RuleId::Gci: return "Rgci";
    case RuleId::Conj: return "Rand";
    case RuleId::Forall1: return "Rall1";
    case RuleId::Forall2: return "Rall2";
    case RuleId::Forall3: return "Rall3";
    case RuleId::SelfLoop: return "Rself";
    case RuleId::CForallU: return "RcallU";
    case RuleId::CForallI: return "RcallI";
    case RuleId::NegCExistsU: return "RnegcsomeU";
    case RuleId::NegCExistsI: return "RnegcsomeI";
    case RuleId::Disj: return "Ror";
    case RuleId::Choose: return "choose-rule";
    case RuleId::CAtMost: return "Rcatmost";
    case RuleId::Exists: return "Rsome";
    case RuleId::AtLeast: return ">=-rule";
    case RuleId::CExistsU: return "RcsomeU";
    case RuleId::CExistsI: return "RcsomeI";
    case RuleId::CAtLeast: return "Rcatleast";
  }
  return "?";
}

namespace {

// ---------------------------------------------------------------------------
// Shared graph helpers (used by the engine and by validate_model)

bool role_successor(const ReducedKB& rkb, const CompletionSystem& s, NodeId x, NodeId y,
                    const RoleExpr& r) {
  auto it = s.aedges.find({x, y});
  if (it == s.aedges.end()) return false;
  for (const auto& lbl : it->second)
    if (rkb.role_analysis.is_subrole(lbl, r)) return true;
  return false;
}

bool role_neighbour(const ReducedKB& rkb, const CompletionSystem& s, NodeId x, NodeId y,
                    const RoleExpr& r) {
  return role_successor(rkb, s, x, y, r) || role_successor(rkb, s, y, x, r.inverted());
}

std::vector<NodeId> role_neighbours(const ReducedKB& rkb, const CompletionSystem& s, NodeId x,
                                    const RoleExpr& r) {
  std::set<NodeId> out;
  RoleExpr rinv = r.inverted();
  for (const auto& [key, labels] : s.aedges) {
    if (key.first == x && s.anodes[key.second].alive) {
      for (const auto& lbl : labels)
        if (rkb.role_analysis.is_subrole(lbl, r)) {
          out.insert(key.second);
          break;
        }
    }
    if (key.second == x && s.anodes[key.first].alive) {
      for (const auto& lbl : labels)
        if (rkb.role_analysis.is_subrole(lbl, rinv)) {
          out.insert(key.first);
          break;
        }
    }
  }
  return {out.begin(), out.end()};
}

std::vector<CNodeId> g_successors(const ReducedKB& rkb, const CompletionSystem& s, NodeId x,
                                  const std::string& g) {
  std::vector<CNodeId> out;
  for (const auto& [key, labels] : s.cedges) {
    if (key.first != x) continue;
    if (!s.cnodes[key.second].alive) continue;
    for (const auto& lbl : labels)
      if (rkb.role_analysis.is_concrete_subrole(lbl, g)) {
        out.push_back(key.second);
        break;
      }
  }
  return out;
}

// Concrete U-neighbours of x for a path U = [R?, g].
std::vector<CNodeId> path_neighbours(const ReducedKB& rkb, const CompletionSystem& s, NodeId x,
                                     const Path& u) {
  if (u.abstract_prefix.empty()) return g_successors(rkb, s, x, u.concrete.name);
  std::set<CNodeId> out;
  const RoleExpr& r = u.abstract_prefix.front();
  for (NodeId mid = 0; mid < s.anodes.size(); ++mid) {
    if (!s.anodes[mid].alive || !role_neighbour(rkb, s, x, mid, r)) continue;
    for (CNodeId c : g_successors(rkb, s, mid, u.concrete.name)) out.insert(c);
  }
  return {out.begin(), out.end()};
}

bool distinct_abstract(const CompletionSystem& s, NodeId a, NodeId b) {
  if (a == b) return false;
  return s.aineq.count({std::min(a, b), std::max(a, b)}) != 0;
}

bool distinct_concrete(const CompletionSystem& s, CNodeId a, CNodeId b) {
  if (a == b) return false;
  return s.cineq.count({std::min(a, b), std::max(a, b)}) != 0;
}

std::optional<CNodeId> concrete_node_of(const CompletionSystem& s, const std::string& name) {
  for (CNodeId c = 0; c < s.cnodes.size(); ++c)
    if (s.cnodes[c].alive && s.cnodes[c].named && s.cnodes[c].name == name) return c;
  return std::nullopt;
}

bool is_ancestor(const CompletionSystem& s, NodeId anc, NodeId n) {
  std::optional<NodeId> cur = s.anodes[n].pred;
  while (cur) {
    if (*cur == anc) return true;
    cur = s.anodes[*cur].pred;
  }
  return false;
}

// Positive templates that relate markers of c1 and c2 with relation rel.
bool has_positive_template(const CompletionSystem& s, CNodeId c1, CNodeId c2,
                           std::uint8_t rel) {
  auto m1 = s.markers.find(c1);
  auto m2 = s.markers.find(c2);
  if (m1 == s.markers.end() || m2 == s.markers.end()) return false;
  for (const auto& t : s.templates) {
    if (t.negative || t.rel != rel) continue;
    if (m1->second.count(t.q1) && m2->second.count(t.q2)) return true;
  }
  return false;
}

bool has_negative_template(const CompletionSystem& s, CNodeId c1, CNodeId c2,
                           std::uint8_t rel) {
  auto m1 = s.markers.find(c1);
  auto m2 = s.markers.find(c2);
  if (m1 == s.markers.end() || m2 == s.markers.end()) return false;
  for (const auto& t : s.templates) {
    if (!t.negative || t.rel != rel) continue;
    if (m1->second.count(t.q1) && m2->second.count(t.q2)) return true;
  }
  return false;
}

// Largest pairwise-distinct subset reaching size k (exact search on the
// small candidate sets the rules produce).
bool distinct_subset_of_size(const std::vector<std::uint32_t>& items,
                             const std::function<bool(std::uint32_t, std::uint32_t)>& distinct,
                             std::size_t k) {
  if (k == 0) return true;
  if (items.size() < k) return false;
  std::vector<std::uint32_t> chosen;
  std::function<bool(std::size_t)> rec = [&](std::size_t idx) -> bool {
    if (chosen.size() >= k) return true;
    if (idx >= items.size() || items.size() - idx + chosen.size() < k) return false;
    bool ok = true;
    for (auto c : chosen)
      if (!distinct(c, items[idx])) {
        ok = false;
        break;
      }
    if (ok) {
      chosen.push_back(items[idx]);
      if (rec(idx + 1)) return true;
      chosen.pop_back();
    }
    return rec(idx + 1);
  };
  return rec(0);
}

std::string fresh_prefix_for(const ReducedKB& rkb) {
  std::string prefix = "_nn";
  auto taken = [&](const std::string& p) {
    for (const auto& n : rkb.named_individuals)
      if (n.rfind(p, 0) == 0) return true;
    return false;
  };
  while (taken(prefix)) prefix += "_";
  return prefix;
}

}  // namespace

// ---------------------------------------------------------------------------
// Engine basics

Tableau::Tableau(const ReducedKB& rkb, ResourceLimits limits, TraceFn trace)
    : rkb_(rkb), limits_(limits), trace_(std::move(trace)) {
  fresh_nominal_prefix_ = fresh_prefix_for(rkb);
}

std::optional<NodeId> Tableau::node_of_individual(const CompletionSystem& s,
                                                  const std::string& individual) {
  Concept o = Concept::nominal(individual);
  for (NodeId n = 0; n < s.anodes.size(); ++n)
    if (s.anodes[n].alive && s.anodes[n].label.count(o)) return n;
  return std::nullopt;
}

NodeId Tableau::new_abstract(CompletionSystem& s, bool nominal, std::optional<NodeId> pred,
                             ConceptSet label, std::int32_t level) const {
  AbstractNode n;
  n.nominal = nominal;
  n.pred = pred;
  n.label = std::move(label);
  n.level = level;
  s.anodes.push_back(std::move(n));
  ++stats_.nodes;
  return static_cast<NodeId>(s.anodes.size() - 1);
}

CNodeId Tableau::new_concrete(CompletionSystem& s, bool named, std::string name) const {
  ConcreteNode c;
  c.named = named;
  c.name = std::move(name);
  s.cnodes.push_back(std::move(c));
  CNodeId id = static_cast<CNodeId>(s.cnodes.size() - 1);
  s.net.add_variable(id);
  s.net_version++;
  return id;
}

void Tableau::add_aedge(CompletionSystem& s, NodeId from, NodeId to, const RoleExpr& r) const {
  s.aedges[{from, to}].insert(r);
}

void Tableau::add_cedge(CompletionSystem& s, NodeId from, CNodeId to,
                        const std::string& g) const {
  s.cedges[{from, to}].insert(g);
}

CNodeId Tableau::create_path_successor(CompletionSystem& s, NodeId a, const Path& u) const {
  NodeId holder = a;
  if (!u.abstract_prefix.empty()) {
    NodeId mid = new_abstract(s, false, a, {});
    add_aedge(s, a, mid, u.abstract_prefix.front());
    holder = mid;
  }
  CNodeId c = new_concrete(s, false);
  add_cedge(s, holder, c, u.concrete.name);
  return c;
}

CompletionSystem Tableau::initial_state() const {
  CompletionSystem s;
  // One nominal node per named individual, in name order.
  std::map<std::string, NodeId> by_name;
  for (const auto& name : rkb_.named_individuals) {
    NodeId n = new_abstract(s, true, std::nullopt, {Concept::nominal(name)}, 0);
    by_name[name] = n;
  }
  if (rkb_.named_individuals.empty()) {
    new_abstract(s, false, std::nullopt, {});  // seed node r0
  }
  // Concrete nodes for constraint individuals, with cvalue edges.
  std::map<std::string, CNodeId> cid;
  for (const auto& name : rkb_.constraint_individuals) cid[name] = new_concrete(s, true, name);
  for (const auto& cv : rkb_.cvalues)
    add_cedge(s, by_name.at(cv.individual), cid.at(cv.var), cv.role.name);
  // Seed the network with asserted constraints.
  for (const auto& cc : rkb_.cconstraints) {
    std::uint8_t r = rkb_.system->index_of(cc.rel);
    s.net.constrain(*rkb_.system, cid.at(cc.v1), cid.at(cc.v2), rkb_.system->singleton(r));
    s.net_version++;
  }
  // Unique name assumption for constraint individuals.
  for (auto i = cid.begin(); i != cid.end(); ++i) {
    auto j = i;
    for (++j; j != cid.end(); ++j)
      s.cineq.insert({std::min(i->second, j->second), std::max(i->second, j->second)});
  }
  // Distinctness facts seed the abstract inequality relation.
  for (const auto& d : rkb_.distincts) {
    auto a = by_name.find(d.a);
    auto b = by_name.find(d.b);
    if (a != by_name.end() && b != by_name.end() && a->second != b->second)
      s.aineq.insert({std::min(a->second, b->second), std::max(a->second, b->second)});
  }
  return s;
}

// ---------------------------------------------------------------------------
// Pending work (rule quiescence for blocking and Rcomplete)

bool Tableau::node_has_pending_work(const CompletionSystem& s, NodeId n) const {
  // Would any label, merge, or marker rule fire on n if blocking were
  // ignored? Used for the quiescence side-condition of BC-3 and Rcomplete.
  // Generating rules are exactly what a block suppresses, so they do not
  // count as pending work here.
  const AbstractNode& node = s.anodes[n];
  if (!node.alive) return false;
  for (Concept t : rkb_.tbox)
    if (!node.label.count(t)) return true;
  for (Concept c : node.label) {
    switch (c.kind()) {
      case ConceptKind::And:
        if (!node.label.count(c.left()) || !node.label.count(c.right())) return true;
        break;
      case ConceptKind::Or:
        if (!node.label.count(c.left()) && !node.label.count(c.right())) return true;
        break;
      case ConceptKind::Forall: {
        Concept init = Concept::automaton_forall(c.role(), rkb_.automaton(c.role()).initial,
                                                 c.child());
        if (!node.label.count(init)) return true;
        break;
      }
      case ConceptKind::AutomatonForall: {
        const RoleAutomaton& aut = rkb_.automaton(c.role());
        if (aut.accepts_epsilon_from(c.automaton_state()) && !node.label.count(c.child()))
          return true;
        for (const auto& [lbl, q] : aut.role_moves(c.automaton_state())) {
          Concept target = Concept::automaton_forall(c.role(), q, c.child());
          for (NodeId b : role_neighbours(rkb_, s, n, lbl))
            if (!s.anodes[b].label.count(target)) return true;
        }
        break;
      }
      case ConceptKind::SelfRestriction: {
        auto it = s.aedges.find({n, n});
        if (it == s.aedges.end() || !it->second.count(c.role())) return true;
        break;
      }
      case ConceptKind::AtMost: {
        auto nbrs = role_neighbours(rkb_, s, n, c.role());
        std::vector<NodeId> with_c;
        for (NodeId b : nbrs)
          if (s.anodes[b].label.count(c.child())) with_c.push_back(b);
        // choose-rule pending?
        for (NodeId b : nbrs) {
          if (!s.anodes[b].label.count(c.child()) &&
              !s.anodes[b].label.count(nnf_negated(c.child(), rkb_.system)))
            return true;
        }
        if (with_c.size() > c.cardinality()) {
          for (std::size_t i = 0; i < with_c.size(); ++i)
            for (std::size_t j = i + 1; j < with_c.size(); ++j)
              if (!distinct_abstract(s, with_c[i], with_c[j])) return true;
        }
        break;
      }
      case ConceptKind::CForall: {
        std::uint8_t rel = rkb_.system->index_of(c.relation());
        for (CNodeId c1 : path_neighbours(rkb_, s, n, c.path1()))
          for (CNodeId c2 : path_neighbours(rkb_, s, n, c.path2()))
            if (!has_positive_template(s, c1, c2, rel)) return true;
        break;
      }
      case ConceptKind::CForallInd: {
        std::uint8_t rel = rkb_.system->index_of(c.relation());
        auto iopt = concrete_node_of(s, c.name());
        if (!iopt) break;
        for (CNodeId c1 : path_neighbours(rkb_, s, n, c.path1())) {
          bool hit = c.individual_side() == IndividualSide::Right
                         ? has_positive_template(s, c1, *iopt, rel)
                         : has_positive_template(s, *iopt, c1, rel);
          if (!hit) return true;
        }
        break;
      }
      case ConceptKind::Not: {
        Concept inner = c.child();
        if (inner.kind() == ConceptKind::CExists) {
          std::uint8_t rel = rkb_.system->index_of(inner.relation());
          for (CNodeId c1 : path_neighbours(rkb_, s, n, inner.path1()))
            for (CNodeId c2 : path_neighbours(rkb_, s, n, inner.path2()))
              if (!has_negative_template(s, c1, c2, rel)) return true;
        } else if (inner.kind() == ConceptKind::CExistsInd) {
          std::uint8_t rel = rkb_.system->index_of(inner.relation());
          auto iopt = concrete_node_of(s, inner.name());
          if (iopt) {
            for (CNodeId c1 : path_neighbours(rkb_, s, n, inner.path1())) {
              bool hit = inner.individual_side() == IndividualSide::Right
                             ? has_negative_template(s, c1, *iopt, rel)
                             : has_negative_template(s, *iopt, c1, rel);
              if (!hit) return true;
            }
          }
        }
        break;
      }
      case ConceptKind::CAtMost: {
        auto succs = g_successors(rkb_, s, n, c.concrete_role().name);
        if (succs.size() > c.cardinality()) {
          for (std::size_t i = 0; i < succs.size(); ++i)
            for (std::size_t j = i + 1; j < succs.size(); ++j)
              if (!distinct_concrete(s, succs[i], succs[j])) return true;
        }
        break;
      }
      default:
        break;
    }
  }
  // Self-loops demanded by residual reflexivity assertions.
  for (const auto& ra : rkb_.residual_role_assertions) {
    if (ra.kind != RoleAssertionKind::Reflexive) continue;
    auto it = s.aedges.find({n, n});
    if (it == s.aedges.end() || !it->second.count(ra.r1)) return true;
  }
  // A pending o-rule merge involving n also counts as work.
  for (Concept c : s.anodes[n].label) {
    if (c.kind() != ConceptKind::Nominal) continue;
    for (NodeId m = 0; m < s.anodes.size(); ++m)
      if (m != n && s.anodes[m].alive && s.anodes[m].label.count(c) &&
          !distinct_abstract(s, n, m))
        return true;
  }
  return false;
}

// ---------------------------------------------------------------------------
// Blocking

std::set<CNodeId> Tableau::relevant_cnodes(const CompletionSystem& s, NodeId n) const {
  std::set<CNodeId> out;
  auto add_succs = [&](NodeId x) {
    for (const auto& [key, labels] : s.cedges) {
      (void)labels;
      if (key.first == x && s.cnodes[key.second].alive) out.insert(key.second);
    }
  };
  add_succs(n);
  if (s.anodes[n].pred) add_succs(*s.anodes[n].pred);
  return out;
}

bool Tableau::bc1(const CompletionSystem& s, NodeId a, NodeId b) const {
  const AbstractNode& na = s.anodes[a];
  const AbstractNode& nb = s.anodes[b];
  if (!na.pred || !nb.pred) return false;
  NodeId ap = *na.pred, bp = *nb.pred;
  // a, a_p, b_p ancestors of b; the four nodes pairwise distinct
  std::set<NodeId> four{a, ap, b, bp};
  if (four.size() != 4) return false;
  if (!is_ancestor(s, a, b) || !is_ancestor(s, ap, b)) return false;
  if (!(is_ancestor(s, bp, b))) return false;
  // all nodes on the path from a to b blockable
  for (NodeId cur = b;; cur = *s.anodes[cur].pred) {
    if (s.anodes[cur].nominal) return false;
    if (cur == a) break;
    if (!s.anodes[cur].pred) return false;
  }
  if (na.label != nb.label) return false;
  if (s.anodes[ap].label != s.anodes[bp].label) return false;
  auto e1 = s.aedges.find({ap, a});
  auto e2 = s.aedges.find({bp, b});
  std::set<RoleExpr> l1 = e1 == s.aedges.end() ? std::set<RoleExpr>{} : e1->second;
  std::set<RoleExpr> l2 = e2 == s.aedges.end() ? std::set<RoleExpr>{} : e2->second;
  return l1 == l2;
}

std::optional<Tableau::Phi> Tableau::bc2(const CompletionSystem& s, NodeId a, NodeId b) const {
  NodeId ap = *s.anodes[a].pred, bp = *s.anodes[b].pred;
  std::set<CNodeId> ra_set = relevant_cnodes(s, a);
  std::set<CNodeId> rb_set = relevant_cnodes(s, b);
  std::vector<CNodeId> ra(ra_set.begin(), ra_set.end());
  std::vector<CNodeId> rb(rb_set.begin(), rb_set.end());
  if (ra.size() != rb.size()) return std::nullopt;

  auto edge_labels = [&](NodeId x, CNodeId c) -> std::set<std::string> {
    auto it = s.cedges.find({x, c});
    return it == s.cedges.end() ? std::set<std::string>{} : it->second;
  };
  // Local compatibility: edge labels from (a_p, a) and (b_p, b) must agree.
  auto compatible = [&](CNodeId c, CNodeId d) {
    return edge_labels(ap, c) == edge_labels(bp, d) && edge_labels(a, c) == edge_labels(b, d);
  };

  std::map<CNodeId, CNodeId> phi;
  std::set<CNodeId> used;
  std::function<bool(std::size_t)> match = [&](std::size_t i) -> bool {
    if (i == ra.size()) {
      // constraint-pattern preservation, both directions
      for (CNodeId c : ra)
        for (CNodeId d : ra) {
          if (c == d) continue;
          if (s.net.label(*rkb_.system, c, d) != s.net.label(*rkb_.system, phi[c], phi[d]))
            return false;
        }
      return true;
    }
    for (CNodeId cand : rb) {
      if (used.count(cand) || !compatible(ra[i], cand)) continue;
      phi[ra[i]] = cand;
      used.insert(cand);
      if (match(i + 1)) return true;
      used.erase(cand);
      phi.erase(ra[i]);
    }
    return false;
  };
  if (!match(0)) return std::nullopt;
  Phi out;
  out.map = phi;
  return out;
}

std::set<CNodeId> Tableau::internal_cnodes(const CompletionSystem& s, NodeId a, NodeId b) const {
  // Concrete strict descendants of a that are not strict descendants of b.
  auto strict_desc = [&](NodeId root) {
    std::set<NodeId> visited{root};
    std::vector<NodeId> work{root};
    while (!work.empty()) {
      NodeId x = work.back();
      work.pop_back();
      for (const auto& [key, labels] : s.aedges) {
        (void)labels;
        if (key.first != x) continue;
        NodeId y = key.second;
        if (!s.anodes[y].alive || s.anodes[y].nominal) continue;
        if (visited.insert(y).second) work.push_back(y);
      }
    }
    std::set<CNodeId> cs;
    for (NodeId x : visited)
      for (const auto& [key, labels] : s.cedges) {
        (void)labels;
        if (key.first == x && s.cnodes[key.second].alive) cs.insert(key.second);
      }
    return cs;
  };
  std::set<CNodeId> da = strict_desc(a);
  std::set<CNodeId> db = strict_desc(b);
  std::set<CNodeId> out;
  for (CNodeId c : da)
    if (!db.count(c)) out.insert(c);
  return out;
}

std::set<CNodeId> Tableau::fixed_cnodes(const CompletionSystem& s, NodeId a, NodeId b) const {
  std::set<CNodeId> internal = internal_cnodes(s, a, b);
  // strict descendants of b (concrete)
  std::set<CNodeId> db;
  {
    std::set<NodeId> visited{b};
    std::vector<NodeId> work{b};
    while (!work.empty()) {
      NodeId x = work.back();
      work.pop_back();
      for (const auto& [key, labels] : s.aedges) {
        (void)labels;
        if (key.first != x) continue;
        NodeId y = key.second;
        if (!s.anodes[y].alive || s.anodes[y].nominal) continue;
        if (visited.insert(y).second) work.push_back(y);
      }
    }
    for (NodeId x : visited)
      for (const auto& [key, labels] : s.cedges) {
        (void)labels;
        if (key.first == x && s.cnodes[key.second].alive) db.insert(key.second);
      }
  }
  std::set<CNodeId> relative = [&] {
    std::set<CNodeId> out;
    NodeId ap = *s.anodes[a].pred;
    for (const auto& [key, labels] : s.cedges) {
      (void)labels;
      if (key.first == ap && s.cnodes[key.second].alive) out.insert(key.second);
    }
    return out;
  }();
  std::set<CNodeId> out;
  for (const auto& [key, lbl] : s.net.stored()) {
    (void)lbl;
    for (auto [x, y] : {key, std::pair{key.second, key.first}}) {
      if (!internal.count(y)) continue;
      if (internal.count(x) || db.count(x)) continue;
      if (relative.count(x)) continue;
      out.insert(x);
    }
  }
  return out;
}

std::set<CNodeId> Tableau::cnet_nodes(const CompletionSystem& s, NodeId a, NodeId b,
                                      const Phi& phi, bool side_a) const {
  std::set<CNodeId> out = fixed_cnodes(s, a, b);
  NodeId parent = side_a ? *s.anodes[a].pred : *s.anodes[b].pred;
  for (const auto& [key, labels] : s.cedges) {
    (void)labels;
    if (key.first == parent && s.cnodes[key.second].alive) out.insert(key.second);
  }
  (void)phi;
  return out;
}

bool Tableau::bc3(const CompletionSystem& s, NodeId a, NodeId b, const Phi& phi) const {
  std::set<CNodeId> fixed = fixed_cnodes(s, a, b);
  std::set<CNodeId> na = cnet_nodes(s, a, b, phi, true);
  std::set<CNodeId> nb = cnet_nodes(s, a, b, phi, false);
  auto complete = [&](const std::set<CNodeId>& vars) {
    for (auto i = vars.begin(); i != vars.end(); ++i) {
      auto j = i;
      for (++j; j != vars.end(); ++j) {
        if (!s.net.has_constraint(*i, *j)) return false;
        RelSet l = s.net.label(*rkb_.system, *i, *j);
        if (std::popcount(l) != 1) return false;
      }
    }
    return true;
  };
  if (!complete(na) || !complete(nb)) return false;
  // theta: phi on associated nodes, identity on fixed nodes
  auto theta = [&](CNodeId c) -> std::optional<CNodeId> {
    if (fixed.count(c)) return c;
    auto it = phi.map.find(c);
    if (it != phi.map.end()) return it->second;
    return std::nullopt;
  };
  for (CNodeId c : na)
    for (CNodeId d : na) {
      if (c == d) continue;
      auto tc = theta(c), td = theta(d);
      if (!tc || !td) return false;
      if (s.net.label(*rkb_.system, c, d) != s.net.label(*rkb_.system, *tc, *td)) return false;
    }
  return true;
}

Tableau::Blocking Tableau::compute_blocking(const CompletionSystem& s) const {
  Blocking blk;
  // Depth order guarantees ancestors are classified first.
  std::vector<NodeId> order;
  std::vector<int> depth(s.anodes.size(), 0);
  for (NodeId n = 0; n < s.anodes.size(); ++n) {
    if (s.anodes[n].pred) depth[n] = depth[*s.anodes[n].pred] + 1;  // parents precede children
    if (s.anodes[n].alive && !s.anodes[n].nominal) order.push_back(n);
  }
  std::stable_sort(order.begin(), order.end(),
                   [&](NodeId x, NodeId y) { return depth[x] < depth[y]; });
  std::map<NodeId, bool> quiet_memo;
  auto quiet = [&](NodeId n) {
    auto it = quiet_memo.find(n);
    if (it != quiet_memo.end()) return it->second;
    bool q = !node_has_pending_work(s, n);
    quiet_memo[n] = q;
    return q;
  };
  for (NodeId b : order) {
    // inherited (indirect) blocking
    bool indirect = false;
    for (std::optional<NodeId> cur = s.anodes[b].pred; cur; cur = s.anodes[*cur].pred)
      if (blk.direct.count(*cur)) {
        indirect = true;
        break;
      }
    if (indirect) {
      blk.indirect.insert(b);
      continue;
    }
    // direct blocking by some ancestor
    for (std::optional<NodeId> cur = s.anodes[b].pred; cur; cur = s.anodes[*cur].pred) {
      NodeId a = *cur;
      if (s.anodes[a].nominal) break;  // path must stay blockable
      if (!bc1(s, a, b)) continue;
      NodeId ap = *s.anodes[a].pred, bp = *s.anodes[b].pred;
      if (!(quiet(a) && quiet(b) && quiet(ap) && quiet(bp))) continue;
      auto phi = bc2(s, a, b);
      if (!phi) continue;
      if (!bc3(s, a, b, *phi)) continue;
      blk.direct[b] = a;
      break;
    }
  }
  return blk;
}

// ---------------------------------------------------------------------------
// Rule scanning

std::optional<RuleInstance> Tableau::applicable_rule(const CompletionSystem& s) const {
  // Priority 1: Rconnect.
  for (std::size_t ti = 0; ti < s.templates.size(); ++ti) {
    const TemplateEntry& t = s.templates[ti];
    if (t.negative) continue;
    for (CNodeId c1 = 0; c1 < s.cnodes.size(); ++c1) {
      if (!s.cnodes[c1].alive) continue;
      auto m1 = s.markers.find(c1);
      if (m1 == s.markers.end() || !m1->second.count(t.q1)) continue;
      for (CNodeId c2 = 0; c2 < s.cnodes.size(); ++c2) {
        if (!s.cnodes[c2].alive) continue;
        auto m2 = s.markers.find(c2);
        if (m2 == s.markers.end() || !m2->second.count(t.q2)) continue;
        RelSet want = rkb_.system->singleton(t.rel);
        if (c1 == c2) {
          // A self-constraint is only consistent for the identity relation;
          // anything else empties at once and the NSat clash reports it, so
          // record identity constraints as already present.
          if (t.rel == rkb_.system->identity()) continue;
        } else if (s.net.has_constraint(c1, c2) &&
                   s.net.label(*rkb_.system, c1, c2) == want) {
          continue;
        }
        RuleInstance inst;
        inst.rule = RuleId::Connect;
        inst.template_idx = ti;
        inst.c1 = c1;
        inst.c2 = c2;
        return inst;
      }
    }
  }

  Blocking blk = compute_blocking(s);

  // Priority 2: Rcomplete. Without concrete nodes every cNet is trivially
  // complete and the rule can never fire.
  bool any_concrete = false;
  for (const auto& c : s.cnodes)
    if (c.alive) {
      any_concrete = true;
      break;
    }
  std::map<NodeId, bool> pending_memo;
  auto pending = [&](NodeId n) {
    auto it = pending_memo.find(n);
    if (it != pending_memo.end()) return it->second;
    bool p = node_has_pending_work(s, n);
    pending_memo[n] = p;
    return p;
  };
  for (NodeId b = 0; any_concrete && b < s.anodes.size(); ++b) {
    if (!s.anodes[b].alive || s.anodes[b].nominal) continue;
    for (std::optional<NodeId> cur = s.anodes[b].pred; cur; cur = s.anodes[*cur].pred) {
      NodeId a = *cur;
      if (s.anodes[a].nominal) break;
      if (s.rcomplete_fired.count({a, b})) continue;
      if (!bc1(s, a, b)) continue;
      NodeId ap = *s.anodes[a].pred, bp = *s.anodes[b].pred;
      if (pending(a) || pending(b) || pending(ap) || pending(bp)) continue;
      auto phi = bc2(s, a, b);
      if (!phi) continue;
      std::set<CNodeId> vars = cnet_nodes(s, a, b, *phi, true);
      for (CNodeId c : cnet_nodes(s, a, b, *phi, false)) vars.insert(c);
      // complete already?
      bool complete = true;
      for (auto i = vars.begin(); i != vars.end() && complete; ++i) {
        auto j = i;
        for (++j; j != vars.end(); ++j) {
          if (!s.net.has_constraint(*i, *j) ||
              std::popcount(s.net.label(*rkb_.system, *i, *j)) != 1) {
            complete = false;
            break;
          }
        }
      }
      if (complete) continue;
      RuleInstance inst;
      inst.rule = RuleId::Complete;
      inst.block_pair = {a, b};
      inst.completions = enumerate_completions(*rkb_.system, s.net, vars);
      inst.num_alternatives = static_cast<std::uint32_t>(inst.completions.size());
      return inst;
    }
  }

  // Priority 3: o-rule.
  for (NodeId n1 = 0; n1 < s.anodes.size(); ++n1) {
    if (!s.anodes[n1].alive) continue;
    for (Concept c : s.anodes[n1].label) {
      if (c.kind() != ConceptKind::Nominal) continue;
      for (NodeId n2 = n1 + 1; n2 < s.anodes.size(); ++n2) {
        if (!s.anodes[n2].alive || !s.anodes[n2].label.count(c)) continue;
        if (distinct_abstract(s, n1, n2)) continue;
        RuleInstance inst;
        inst.rule = RuleId::ORule;
        inst.trigger = c;
        inst.node = n2;   // merged away
        inst.other = n1;  // survives
        return inst;
      }
    }
  }

  // Priority 4: NN-rule and <=-rule on nominal nodes, lowest level first.
  {
    std::vector<NodeId> nominals;
    for (NodeId n = 0; n < s.anodes.size(); ++n)
      if (s.anodes[n].alive && s.anodes[n].nominal) nominals.push_back(n);
    std::stable_sort(nominals.begin(), nominals.end(), [&](NodeId x, NodeId y) {
      return std::pair(s.anodes[x].level, x) < std::pair(s.anodes[y].level, y);
    });
    for (NodeId n : nominals) {
      // NN first on the same node.
      for (Concept c : s.anodes[n].label) {
        if (c.kind() != ConceptKind::AtMost) continue;
        if (c.cardinality() == 0) continue;
        if (s.fired.count({static_cast<std::uint8_t>(RuleId::NN), n, c})) continue;
        // a blockable S-neighbour with C whose successor is this node
        bool trigger = false;
        for (NodeId b = 0; b < s.anodes.size(); ++b) {
          if (!s.anodes[b].alive || s.anodes[b].nominal) continue;
          if (!s.anodes[b].label.count(c.child())) continue;
          if (!role_neighbour(rkb_, s, n, b, c.role())) continue;
          if (!s.aedges.count({b, n})) continue;  // n is a successor of b
          trigger = true;
          break;
        }
        if (!trigger) continue;
        // guard: already satisfied by m nominal neighbours for some m <= n?
        bool satisfied = false;
        for (std::uint32_t m = 1; m <= c.cardinality() && !satisfied; ++m) {
          Concept weaker = Concept::at_most(m, c.role(), c.child());
          if (!s.anodes[n].label.count(weaker)) continue;
          std::vector<std::uint32_t> cands;
          for (NodeId z : role_neighbours(rkb_, s, n, c.role()))
            if (s.anodes[z].nominal && s.anodes[z].label.count(c.child())) cands.push_back(z);
          if (distinct_subset_of_size(
                  cands,
                  [&](std::uint32_t x, std::uint32_t y) { return distinct_abstract(s, x, y); },
                  m))
            satisfied = true;
        }
        if (satisfied) continue;
        RuleInstance inst;
        inst.rule = RuleId::NN;
        inst.node = n;
        inst.trigger = c;
        inst.num_alternatives = c.cardinality();
        return inst;
      }
      // then <= on the same nominal node
      for (Concept c : s.anodes[n].label) {
        if (c.kind() != ConceptKind::AtMost) continue;
        std::vector<NodeId> with_c;
        for (NodeId z : role_neighbours(rkb_, s, n, c.role()))
          if (s.anodes[z].label.count(c.child())) with_c.push_back(z);
        if (with_c.size() <= c.cardinality()) continue;
        RuleInstance inst;
        inst.rule = RuleId::AtMost;
        inst.node = n;
        inst.trigger = c;
        for (std::size_t i = 0; i < with_c.size(); ++i)
          for (std::size_t j = i + 1; j < with_c.size(); ++j) {
            NodeId x = with_c[i], y = with_c[j];
            if (distinct_abstract(s, x, y)) continue;
            if (s.anodes[x].nominal)
              inst.merge_pairs.push_back({y, x});
            else if (s.anodes[y].nominal || is_ancestor(s, y, x))
              inst.merge_pairs.push_back({x, y});
            else
              inst.merge_pairs.push_back({y, x});
          }
        if (inst.merge_pairs.empty()) continue;  // all distinct: clash instead
        inst.num_alternatives = static_cast<std::uint32_t>(inst.merge_pairs.size());
        return inst;
      }
    }
  }

  // Priority 5: everything else, node-major order.
  std::optional<RuleInstance> out;
  scan_rules(s, blk, out);
  return out;
}

void Tableau::scan_rules(const CompletionSystem& s, const Blocking& blk,
                         std::optional<RuleInstance>& out) const {
  auto make = [&](RuleId r, NodeId n, Concept trig) {
    RuleInstance inst;
    inst.rule = r;
    inst.node = n;
    inst.trigger = trig;
    out = inst;
  };
  for (NodeId n = 0; n < s.anodes.size() && !out; ++n) {
    const AbstractNode& node = s.anodes[n];
    if (!node.alive) continue;
    bool blocked = blk.blocked(n);
    bool ind_blocked = blk.indirectly(n);

    // Rgci (applies regardless of blocking)
    for (Concept t : rkb_.tbox)
      if (!node.label.count(t)) {
        make(RuleId::Gci, n, t);
        return;
      }
    // Rand
    if (!blocked)
      for (Concept c : node.label)
        if (c.kind() == ConceptKind::And &&
            (!node.label.count(c.left()) || !node.label.count(c.right()))) {
          make(RuleId::Conj, n, c);
          return;
        }
    // Rall1
    if (!ind_blocked)
      for (Concept c : node.label)
        if (c.kind() == ConceptKind::Forall) {
          Concept init = Concept::automaton_forall(c.role(), rkb_.automaton(c.role()).initial,
                                                   c.child());
          if (!node.label.count(init)) {
            make(RuleId::Forall1, n, c);
            return;
          }
        }
    // Rall2
    if (!ind_blocked)
      for (Concept c : node.label) {
        if (c.kind() != ConceptKind::AutomatonForall) continue;
        const RoleAutomaton& aut = rkb_.automaton(c.role());
        for (const auto& [lbl, q] : aut.role_moves(c.automaton_state())) {
          Concept target = Concept::automaton_forall(c.role(), q, c.child());
          for (NodeId b : role_neighbours(rkb_, s, n, lbl))
            if (!s.anodes[b].label.count(target)) {
              RuleInstance inst;
              inst.rule = RuleId::Forall2;
              inst.node = n;
              inst.trigger = c;
              inst.via = lbl;
              inst.state = q;
              inst.other = b;
              out = inst;
              return;
            }
        }
      }
    // Rall3
    if (!ind_blocked)
      for (Concept c : node.label)
        if (c.kind() == ConceptKind::AutomatonForall &&
            rkb_.automaton(c.role()).accepts_epsilon_from(c.automaton_state()) &&
            !node.label.count(c.child())) {
          make(RuleId::Forall3, n, c);
          return;
        }
    // Rself (Self restrictions and residual Ref assertions)
    if (!blocked) {
      for (Concept c : node.label)
        if (c.kind() == ConceptKind::SelfRestriction) {
          auto it = s.aedges.find({n, n});
          if (it == s.aedges.end() || !it->second.count(c.role())) {
            RuleInstance inst;
            inst.rule = RuleId::SelfLoop;
            inst.node = n;
            inst.trigger = c;
            inst.via = c.role();
            out = inst;
            return;
          }
        }
      for (const auto& ra : rkb_.residual_role_assertions) {
        if (ra.kind != RoleAssertionKind::Reflexive) continue;
        auto it = s.aedges.find({n, n});
        if (it == s.aedges.end() || !it->second.count(ra.r1)) {
          RuleInstance inst;
          inst.rule = RuleId::SelfLoop;
          inst.node = n;
          inst.trigger = Concept::top();
          inst.via = ra.r1;
          out = inst;
          return;
        }
      }
    }
    // concrete universal rules
    if (!blocked) {
      for (Concept c : node.label) {
        if (c.kind() == ConceptKind::CForall) {
          std::uint8_t rel = rkb_.system->index_of(c.relation());
          for (CNodeId c1 : path_neighbours(rkb_, s, n, c.path1()))
            for (CNodeId c2 : path_neighbours(rkb_, s, n, c.path2()))
              if (!has_positive_template(s, c1, c2, rel)) {
                RuleInstance inst;
                inst.rule = RuleId::CForallU;
                inst.node = n;
                inst.trigger = c;
                inst.c1 = c1;
                inst.c2 = c2;
                out = inst;
                return;
              }
        } else if (c.kind() == ConceptKind::CForallInd) {
          std::uint8_t rel = rkb_.system->index_of(c.relation());
          auto iopt = concrete_node_of(s, c.name());
          if (!iopt) continue;
          for (CNodeId c1 : path_neighbours(rkb_, s, n, c.path1())) {
            bool hit = c.individual_side() == IndividualSide::Right
                           ? has_positive_template(s, c1, *iopt, rel)
                           : has_positive_template(s, *iopt, c1, rel);
            if (!hit) {
              RuleInstance inst;
              inst.rule = RuleId::CForallI;
              inst.node = n;
              inst.trigger = c;
              inst.c1 = c1;
              inst.c2 = *iopt;
              out = inst;
              return;
            }
          }
        } else if (c.kind() == ConceptKind::Not) {
          Concept inner = c.child();
          if (inner.kind() == ConceptKind::CExists) {
            std::uint8_t rel = rkb_.system->index_of(inner.relation());
            for (CNodeId c1 : path_neighbours(rkb_, s, n, inner.path1()))
              for (CNodeId c2 : path_neighbours(rkb_, s, n, inner.path2()))
                if (!has_negative_template(s, c1, c2, rel)) {
                  RuleInstance inst;
                  inst.rule = RuleId::NegCExistsU;
                  inst.node = n;
                  inst.trigger = c;
                  inst.c1 = c1;
                  inst.c2 = c2;
                  out = inst;
                  return;
                }
          } else if (inner.kind() == ConceptKind::CExistsInd) {
            std::uint8_t rel = rkb_.system->index_of(inner.relation());
            auto iopt = concrete_node_of(s, inner.name());
            if (!iopt) continue;
            for (CNodeId c1 : path_neighbours(rkb_, s, n, inner.path1())) {
              bool hit = inner.individual_side() == IndividualSide::Right
                             ? has_negative_template(s, c1, *iopt, rel)
                             : has_negative_template(s, *iopt, c1, rel);
              if (!hit) {
                RuleInstance inst;
                inst.rule = RuleId::NegCExistsI;
                inst.node = n;
                inst.trigger = c;
                inst.c1 = c1;
                inst.c2 = *iopt;
                out = inst;
                return;
              }
            }
          }
        }
      }
    }
    // Ror
    if (!blocked)
      for (Concept c : node.label)
        if (c.kind() == ConceptKind::Or && !node.label.count(c.left()) &&
            !node.label.count(c.right())) {
          RuleInstance inst;
          inst.rule = RuleId::Disj;
          inst.node = n;
          inst.trigger = c;
          inst.num_alternatives = 2;
          out = inst;
          return;
        }
    // choose-rule
    if (!blocked)
      for (Concept c : node.label) {
        if (c.kind() != ConceptKind::AtMost) continue;
        Concept neg = nnf_negated(c.child(), rkb_.system);
        for (NodeId y : role_neighbours(rkb_, s, n, c.role()))
          if (!s.anodes[y].label.count(c.child()) && !s.anodes[y].label.count(neg)) {
            RuleInstance inst;
            inst.rule = RuleId::Choose;
            inst.node = n;
            inst.trigger = c;
            inst.other = y;
            inst.num_alternatives = 2;
            out = inst;
            return;
          }
      }
    // Rcatmost
    if (!blocked)
      for (Concept c : node.label) {
        if (c.kind() != ConceptKind::CAtMost) continue;
        auto succs = g_successors(rkb_, s, n, c.concrete_role().name);
        if (succs.size() <= c.cardinality()) continue;
        RuleInstance inst;
        inst.rule = RuleId::CAtMost;
        inst.node = n;
        inst.trigger = c;
        for (std::size_t i = 0; i < succs.size(); ++i)
          for (std::size_t j = i + 1; j < succs.size(); ++j) {
            CNodeId x = succs[i], y = succs[j];
            if (distinct_concrete(s, x, y)) continue;
            if (s.cnodes[x].named)
              inst.merge_pairs.push_back({y, x});
            else if (s.cnodes[y].named)
              inst.merge_pairs.push_back({x, y});
            else {
              inst.merge_pairs.push_back({x, y});
              inst.merge_pairs.push_back({y, x});
            }
          }
        if (inst.merge_pairs.empty()) continue;
        inst.num_alternatives = static_cast<std::uint32_t>(inst.merge_pairs.size());
        out = inst;
        return;
      }
    // <=-rule on blockable nodes
    if (!blocked && !node.nominal)
      for (Concept c : node.label) {
        if (c.kind() != ConceptKind::AtMost) continue;
        std::vector<NodeId> with_c;
        for (NodeId z : role_neighbours(rkb_, s, n, c.role()))
          if (s.anodes[z].label.count(c.child())) with_c.push_back(z);
        if (with_c.size() <= c.cardinality()) continue;
        RuleInstance inst;
        inst.rule = RuleId::AtMost;
        inst.node = n;
        inst.trigger = c;
        for (std::size_t i = 0; i < with_c.size(); ++i)
          for (std::size_t j = i + 1; j < with_c.size(); ++j) {
            NodeId x = with_c[i], y = with_c[j];
            if (distinct_abstract(s, x, y)) continue;
            if (s.anodes[x].nominal)
              inst.merge_pairs.push_back({y, x});
            else if (s.anodes[y].nominal || is_ancestor(s, y, x))
              inst.merge_pairs.push_back({x, y});
            else
              inst.merge_pairs.push_back({y, x});
          }
        if (inst.merge_pairs.empty()) continue;
        inst.num_alternatives = static_cast<std::uint32_t>(inst.merge_pairs.size());
        out = inst;
        return;
      }
    // Rsome
    if (!blocked)
      for (Concept c : node.label)
        if (c.kind() == ConceptKind::Exists &&
            !s.fired.count({static_cast<std::uint8_t>(RuleId::Exists), n, c})) {
          bool witness = false;
          for (NodeId b : role_neighbours(rkb_, s, n, c.role()))
            if (s.anodes[b].label.count(c.child())) {
              witness = true;
              break;
            }
          if (!witness) {
            make(RuleId::Exists, n, c);
            return;
          }
        }
    // >=-rule
    if (!blocked)
      for (Concept c : node.label) {
        if (c.kind() != ConceptKind::AtLeast || c.cardinality() == 0) continue;
        if (s.fired.count({static_cast<std::uint8_t>(RuleId::AtLeast), n, c})) continue;
        std::vector<std::uint32_t> safe;
        for (NodeId b : role_neighbours(rkb_, s, n, c.role())) {
          if (!s.anodes[b].label.count(c.child())) continue;
          if (node.nominal && blk.blocked(b)) continue;  // safety condition
          safe.push_back(b);
        }
        if (!distinct_subset_of_size(
                safe, [&](std::uint32_t x, std::uint32_t y) { return distinct_abstract(s, x, y); },
                c.cardinality())) {
          make(RuleId::AtLeast, n, c);
          return;
        }
      }
    // RcsomeU / RcsomeI
    if (!blocked)
      for (Concept c : node.label) {
        if (c.kind() == ConceptKind::CExists) {
          if (s.fired.count({static_cast<std::uint8_t>(RuleId::CExistsU), n, c})) continue;
          std::uint8_t rel = rkb_.system->index_of(c.relation());
          bool found = false;
          for (CNodeId c1 : path_neighbours(rkb_, s, n, c.path1())) {
            for (CNodeId c2 : path_neighbours(rkb_, s, n, c.path2()))
              if (has_positive_template(s, c1, c2, rel)) {
                found = true;
                break;
              }
            if (found) break;
          }
          if (!found) {
            make(RuleId::CExistsU, n, c);
            return;
          }
        } else if (c.kind() == ConceptKind::CExistsInd) {
          if (s.fired.count({static_cast<std::uint8_t>(RuleId::CExistsI), n, c})) continue;
          std::uint8_t rel = rkb_.system->index_of(c.relation());
          auto iopt = concrete_node_of(s, c.name());
          if (!iopt) continue;
          bool found = false;
          for (CNodeId c1 : path_neighbours(rkb_, s, n, c.path1())) {
            bool hit = c.individual_side() == IndividualSide::Right
                           ? has_positive_template(s, c1, *iopt, rel)
                           : has_positive_template(s, *iopt, c1, rel);
            if (hit) {
              found = true;
              break;
            }
          }
          if (!found) {
            make(RuleId::CExistsI, n, c);
            return;
          }
        }
      }
    // Rcatleast
    if (!blocked)
      for (Concept c : node.label) {
        if (c.kind() != ConceptKind::CAtLeast || c.cardinality() == 0) continue;
        if (s.fired.count({static_cast<std::uint8_t>(RuleId::CAtLeast), n, c})) continue;
        auto succs = g_successors(rkb_, s, n, c.concrete_role().name);
        if (!distinct_subset_of_size(
                succs, [&](std::uint32_t x, std::uint32_t y) { return distinct_concrete(s, x, y); },
                c.cardinality())) {
          make(RuleId::CAtLeast, n, c);
          return;
        }
      }
  }
}

// ---------------------------------------------------------------------------
// Rule application

void Tableau::apply_rule(CompletionSystem& s, const RuleInstance& inst,
                         std::uint32_t alternative) {
  switch (inst.rule) {
    case RuleId::Connect: {
      const TemplateEntry& t = s.templates[inst.template_idx];
      s.net.constrain(*rkb_.system, inst.c1, inst.c2, rkb_.system->singleton(t.rel));
      s.net_version++;
      break;
    }
    case RuleId::Complete: {
      const RelNetwork& comp = inst.completions[alternative];
      for (const auto& [key, lbl] : comp.stored())
        s.net.constrain(*rkb_.system, key.first, key.second, lbl);
      s.net_version++;
      s.rcomplete_fired.insert(inst.block_pair);
      break;
    }
    case RuleId::ORule:
      merge_abstract(s, inst.node, inst.other);
      break;
    case RuleId::NN: {
      std::uint32_t m = alternative + 1;
      Concept c = inst.trigger;
      s.anodes[inst.node].label.insert(Concept::at_most(m, c.role(), c.child()));
      std::vector<NodeId> created;
      for (std::uint32_t i = 0; i < m; ++i) {
        std::string name = fresh_nominal_prefix_ + std::to_string(s.fresh_nominal_counter++);
        ConceptSet label{c.child(), Concept::nominal(name)};
        NodeId y = new_abstract(s, true, std::nullopt, std::move(label),
                                s.anodes[inst.node].level + 1);
        add_aedge(s, inst.node, y, c.role());
        created.push_back(y);
      }
      for (std::size_t i = 0; i < created.size(); ++i)
        for (std::size_t j = i + 1; j < created.size(); ++j)
          s.aineq.insert({std::min(created[i], created[j]), std::max(created[i], created[j])});
      s.fired.insert({static_cast<std::uint8_t>(RuleId::NN), inst.node, inst.trigger});
      break;
    }
    case RuleId::AtMost: {
      auto [from, into] = inst.merge_pairs[alternative];
      merge_abstract(s, from, into);
      break;
    }
    case RuleId::Gci:
    case RuleId::Forall3:
      s.anodes[inst.node].label.insert(inst.rule == RuleId::Gci ? inst.trigger
                                                                : inst.trigger.child());
      break;
    case RuleId::Conj:
      s.anodes[inst.node].label.insert(inst.trigger.left());
      s.anodes[inst.node].label.insert(inst.trigger.right());
      break;
    case RuleId::Forall1:
      s.anodes[inst.node].label.insert(Concept::automaton_forall(
          inst.trigger.role(), rkb_.automaton(inst.trigger.role()).initial,
          inst.trigger.child()));
      break;
    case RuleId::Forall2:
      s.anodes[inst.other].label.insert(
          Concept::automaton_forall(inst.trigger.role(), inst.state, inst.trigger.child()));
      break;
    case RuleId::SelfLoop:
      add_aedge(s, inst.node, inst.node, inst.via);
      break;
    case RuleId::CForallU:
    case RuleId::CForallI:
    case RuleId::NegCExistsU:
    case RuleId::NegCExistsI: {
      bool negative =
          inst.rule == RuleId::NegCExistsU || inst.rule == RuleId::NegCExistsI;
      Concept base = negative ? inst.trigger.child() : inst.trigger;
      std::uint8_t rel = rkb_.system->index_of(base.relation());
      std::uint32_t q1 = s.next_marker++;
      std::uint32_t q2 = s.next_marker++;
      bool ind = inst.rule == RuleId::CForallI || inst.rule == RuleId::NegCExistsI;
      bool ind_left = ind && base.individual_side() == IndividualSide::Left;
      CNodeId left = ind_left ? inst.c2 : inst.c1;
      CNodeId right = ind_left ? inst.c1 : (ind ? inst.c2 : inst.c2);
      s.markers[left].insert(q1);
      s.markers[right].insert(q2);
      s.templates.push_back({q1, q2, rel, negative});
      s.net_version++;
      break;
    }
    case RuleId::Disj:
      s.anodes[inst.node].label.insert(alternative == 0 ? inst.trigger.left()
                                                        : inst.trigger.right());
      break;
    case RuleId::Choose: {
      Concept c = inst.trigger.child();
      s.anodes[inst.other].label.insert(alternative == 0 ? c : nnf_negated(c, rkb_.system));
      break;
    }
    case RuleId::CAtMost: {
      auto [from, into] = inst.merge_pairs[alternative];
      merge_concrete(s, from, into);
      break;
    }
    case RuleId::Exists: {
      Concept c = inst.trigger;
      NodeId b = new_abstract(s, false, inst.node, {c.child()});
      add_aedge(s, inst.node, b, c.role());
      s.fired.insert({static_cast<std::uint8_t>(RuleId::Exists), inst.node, c});
      break;
    }
    case RuleId::AtLeast: {
      Concept c = inst.trigger;
      std::vector<NodeId> created;
      for (std::uint32_t i = 0; i < c.cardinality(); ++i) {
        NodeId y = new_abstract(s, false, inst.node, {c.child()});
        add_aedge(s, inst.node, y, c.role());
        created.push_back(y);
      }
      for (std::size_t i = 0; i < created.size(); ++i)
        for (std::size_t j = i + 1; j < created.size(); ++j)
          s.aineq.insert({std::min(created[i], created[j]), std::max(created[i], created[j])});
      s.fired.insert({static_cast<std::uint8_t>(RuleId::AtLeast), inst.node, c});
      break;
    }
    case RuleId::CExistsU: {
      Concept c = inst.trigger;
      std::uint8_t rel = rkb_.system->index_of(c.relation());
      CNodeId c1 = create_path_successor(s, inst.node, c.path1());
      CNodeId c2 = create_path_successor(s, inst.node, c.path2());
      std::uint32_t q1 = s.next_marker++;
      std::uint32_t q2 = s.next_marker++;
      s.markers[c1].insert(q1);
      s.markers[c2].insert(q2);
      s.templates.push_back({q1, q2, rel, false});
      s.net_version++;
      s.fired.insert({static_cast<std::uint8_t>(RuleId::CExistsU), inst.node, c});
      break;
    }
    case RuleId::CExistsI: {
      Concept c = inst.trigger;
      std::uint8_t rel = rkb_.system->index_of(c.relation());
      auto iopt = concrete_node_of(s, c.name());
      CNodeId c1 = create_path_successor(s, inst.node, c.path1());
      std::uint32_t qa = s.next_marker++;
      std::uint32_t qb = s.next_marker++;
      if (c.individual_side() == IndividualSide::Right) {
        s.markers[c1].insert(qa);
        s.markers[*iopt].insert(qb);
        s.templates.push_back({qa, qb, rel, false});
      } else {
        s.markers[*iopt].insert(qa);
        s.markers[c1].insert(qb);
        s.templates.push_back({qa, qb, rel, false});
      }
      s.net_version++;
      s.fired.insert({static_cast<std::uint8_t>(RuleId::CExistsI), inst.node, c});
      break;
    }
    case RuleId::CAtLeast: {
      Concept c = inst.trigger;
      std::vector<CNodeId> created;
      for (std::uint32_t i = 0; i < c.cardinality(); ++i) {
        CNodeId y = new_concrete(s, false);
        add_cedge(s, inst.node, y, c.concrete_role().name);
        created.push_back(y);
      }
      for (std::size_t i = 0; i < created.size(); ++i)
        for (std::size_t j = i + 1; j < created.size(); ++j)
          s.cineq.insert({std::min(created[i], created[j]), std::max(created[i], created[j])});
      s.fired.insert({static_cast<std::uint8_t>(RuleId::CAtLeast), inst.node, c});
      break;
    }
  }
}

// ---------------------------------------------------------------------------
// Merging and pruning

void Tableau::prune_concrete(CompletionSystem& s, CNodeId c) const {
  if (!s.cnodes[c].alive) return;
  s.cnodes[c].alive = false;
  for (auto it = s.cedges.begin(); it != s.cedges.end();)
    it = (it->first.second == c) ? s.cedges.erase(it) : std::next(it);
  s.net.remove_variable(c);
  s.markers.erase(c);
  s.net_version++;
}

void Tableau::prune_abstract(CompletionSystem& s, NodeId n) const {
  if (!s.anodes[n].alive) return;
  s.anodes[n].alive = false;
  // concrete successors outside the named individuals go with the node
  std::vector<CNodeId> csucc;
  for (const auto& [key, labels] : s.cedges) {
    (void)labels;
    if (key.first == n) csucc.push_back(key.second);
  }
  for (CNodeId c : csucc) {
    if (!s.cnodes[c].named)
      prune_concrete(s, c);
  }
  for (auto it = s.cedges.begin(); it != s.cedges.end();)
    it = (it->first.first == n) ? s.cedges.erase(it) : std::next(it);
  // blockable children
  std::vector<NodeId> children;
  for (NodeId m = 0; m < s.anodes.size(); ++m)
    if (s.anodes[m].alive && !s.anodes[m].nominal && s.anodes[m].pred == n)
      children.push_back(m);
  // remove every abstract edge touching n
  for (auto it = s.aedges.begin(); it != s.aedges.end();)
    it = (it->first.first == n || it->first.second == n) ? s.aedges.erase(it) : std::next(it);
  for (NodeId m : children) prune_abstract(s, m);
}

void Tableau::merge_abstract(CompletionSystem& s, NodeId y, NodeId x) const {
  if (distinct_abstract(s, y, x))
    throw MergeForbiddenError("cannot merge nodes asserted distinct");
  if (y == x || !s.anodes[y].alive || !s.anodes[x].alive)
    throw MergeForbiddenError("merge operands must be distinct live nodes");
  // label union
  for (Concept c : s.anodes[y].label) s.anodes[x].label.insert(c);
  // in-edges of y move to x; self-loops follow
  {
    std::vector<std::pair<std::pair<NodeId, NodeId>, std::set<RoleExpr>>> moved;
    for (auto it = s.aedges.begin(); it != s.aedges.end();) {
      if (it->first.second == y) {
        NodeId z = it->first.first == y ? x : it->first.first;
        moved.push_back({{z, x}, it->second});
        it = s.aedges.erase(it);
      } else {
        ++it;
      }
    }
    for (const auto& [key, labels] : moved)
      for (const auto& r : labels) s.aedges[key].insert(r);
  }
  // out-edges of y to nominal nodes move to x; out-edges to blockables are
  // pruned together with the subtree
  {
    std::vector<std::pair<NodeId, std::set<RoleExpr>>> moved;
    for (auto it = s.aedges.begin(); it != s.aedges.end();) {
      if (it->first.first == y && s.anodes[it->first.second].nominal) {
        moved.push_back({it->first.second, it->second});
        it = s.aedges.erase(it);
      } else {
        ++it;
      }
    }
    for (const auto& [to, labels] : moved)
      for (const auto& r : labels) s.aedges[{x, to}].insert(r);
  }
  // concrete successors of y transfer to x (edge-label union on shared
  // constraint individuals)
  {
    std::vector<std::pair<CNodeId, std::set<std::string>>> moved;
    for (auto it = s.cedges.begin(); it != s.cedges.end();) {
      if (it->first.first == y) {
        moved.push_back({it->first.second, it->second});
        it = s.cedges.erase(it);
      } else {
        ++it;
      }
    }
    for (const auto& [to, labels] : moved)
      for (const auto& g : labels) s.cedges[{x, to}].insert(g);
  }
  // inequality inheritance
  {
    std::vector<NodeId> others;
    for (const auto& [a, b] : s.aineq) {
      if (a == y) others.push_back(b);
      if (b == y) others.push_back(a);
    }
    for (NodeId w : others)
      if (w != x) s.aineq.insert({std::min(w, x), std::max(w, x)});
  }
  // fired memo survives the merge
  {
    std::vector<std::tuple<std::uint8_t, NodeId, Concept>> moved;
    for (auto it = s.fired.begin(); it != s.fired.end();) {
      if (std::get<1>(*it) == y) {
        moved.push_back({std::get<0>(*it), x, std::get<2>(*it)});
        it = s.fired.erase(it);
      } else {
        ++it;
      }
    }
    for (const auto& f : moved) s.fired.insert(f);
  }
  if (s.anodes[x].nominal && s.anodes[y].nominal)
    s.anodes[x].level = std::min(s.anodes[x].level, s.anodes[y].level);
  prune_abstract(s, y);
}

void Tableau::merge_concrete(CompletionSystem& s, CNodeId from, CNodeId into) const {
  if (distinct_concrete(s, from, into))
    throw MergeForbiddenError("cannot merge concrete nodes asserted distinct");
  // edges
  {
    std::vector<std::pair<NodeId, std::set<std::string>>> moved;
    for (auto it = s.cedges.begin(); it != s.cedges.end();) {
      if (it->first.second == from) {
        moved.push_back({it->first.first, it->second});
        it = s.cedges.erase(it);
      } else {
        ++it;
      }
    }
    for (const auto& [a, labels] : moved)
      for (const auto& g : labels) s.cedges[{a, into}].insert(g);
  }
  // markers
  {
    auto mit = s.markers.find(from);
    if (mit != s.markers.end()) {
      s.markers[into].insert(mit->second.begin(), mit->second.end());
      s.markers.erase(mit);
    }
  }
  // rename in the network (conflicting labels intersect; empties surface as
  // the NSat clash)
  s.net.rename_variable(*rkb_.system, from, into);
  s.net_version++;
  // inequality inheritance
  {
    std::vector<CNodeId> others;
    for (const auto& [a, b] : s.cineq) {
      if (a == from) others.push_back(b);
      if (b == from) others.push_back(a);
    }
    for (CNodeId w : others)
      if (w != into) s.cineq.insert({std::min(w, into), std::max(w, into)});
  }
  s.cnodes[from].alive = false;
}

// ---------------------------------------------------------------------------
// Clash detection

RelNetwork Tableau::network_with_exclusions(const CompletionSystem& s) const {
  RelNetwork net = s.net;
  for (const auto& t : s.templates) {
    if (!t.negative) continue;
    for (const auto& [c1, ms1] : s.markers) {
      if (!ms1.count(t.q1) || !s.cnodes[c1].alive) continue;
      for (const auto& [c2, ms2] : s.markers) {
        if (!ms2.count(t.q2) || !s.cnodes[c2].alive) continue;
        net.constrain(*rkb_.system, c1, c2,
                      rkb_.system->universal_set() & ~rkb_.system->singleton(t.rel));
      }
    }
  }
  return net;
}

std::string Tableau::check_clash(const CompletionSystem& s) const {
  for (NodeId n = 0; n < s.anodes.size(); ++n) {
    const AbstractNode& node = s.anodes[n];
    if (!node.alive) continue;
    if (node.label.count(Concept::bottom()))
      return "bottom at node " + std::to_string(n);
    for (Concept c : node.label) {
      if (c.kind() == ConceptKind::Not && node.label.count(c.child()))
        return "complement pair " + print_concept(c.child()) + " at node " + std::to_string(n);
      if (c.kind() == ConceptKind::Not && c.child().kind() == ConceptKind::SelfRestriction &&
          role_neighbour(rkb_, s, n, n, c.child().role()))
        return "negated Self with self-loop at node " + std::to_string(n);
      if (c.kind() == ConceptKind::AtMost) {
        std::vector<std::uint32_t> with_c;
        for (NodeId z : role_neighbours(rkb_, s, n, c.role()))
          if (s.anodes[z].label.count(c.child())) with_c.push_back(z);
        if (with_c.size() > c.cardinality() &&
            distinct_subset_of_size(
                with_c,
                [&](std::uint32_t x, std::uint32_t y) { return distinct_abstract(s, x, y); },
                c.cardinality() + 1))
          return "at-most violation " + print_concept(c) + " at node " + std::to_string(n);
      }
      if (c.kind() == ConceptKind::CAtMost) {
        auto succs = g_successors(rkb_, s, n, c.concrete_role().name);
        if (succs.size() > c.cardinality() &&
            distinct_subset_of_size(
                succs,
                [&](std::uint32_t x, std::uint32_t y) { return distinct_concrete(s, x, y); },
                c.cardinality() + 1))
          return "concrete at-most violation " + print_concept(c) + " at node " +
                 std::to_string(n);
      }
      if (c.kind() == ConceptKind::Nominal) {
        for (NodeId m = n + 1; m < s.anodes.size(); ++m)
          if (s.anodes[m].alive && s.anodes[m].label.count(c) && distinct_abstract(s, n, m))
            return "nominal " + print_concept(c) + " on distinct nodes";
      }
    }
    for (const auto& ra : rkb_.residual_role_assertions) {
      if (ra.kind != RoleAssertionKind::Disjoint) continue;
      for (NodeId b = 0; b < s.anodes.size(); ++b)
        if (s.anodes[b].alive && role_neighbour(rkb_, s, n, b, ra.r1) &&
            role_neighbour(rkb_, s, n, b, ra.r2))
          return "disjoint roles share neighbour pair (" + std::to_string(n) + "," +
                 std::to_string(b) + ")";
    }
  }
  // negative template violated by a stored constraint
  for (const auto& t : s.templates) {
    if (!t.negative) continue;
    for (const auto& [c1, ms1] : s.markers) {
      if (!ms1.count(t.q1) || !s.cnodes[c1].alive) continue;
      for (const auto& [c2, ms2] : s.markers) {
        if (!ms2.count(t.q2) || !s.cnodes[c2].alive) continue;
        if (c1 == c2) {
          if (t.rel == rkb_.system->identity())
            return "negative template forbids identity self-constraint";
          continue;
        }
        if (s.net.has_constraint(c1, c2) &&
            s.net.label(*rkb_.system, c1, c2) == rkb_.system->singleton(t.rel))
          return "negative template violated between concrete nodes " + std::to_string(c1) +
                 " and " + std::to_string(c2);
      }
    }
  }
  // network satisfiability (with negative-template exclusions folded in)
  if (s.net.inconsistent()) return "constraint network inconsistent";
  if (!nsat_cache_ || nsat_cache_->first != s.net_version) {
    bool sat = is_satisfiable(*rkb_.system, network_with_exclusions(s));
    nsat_cache_ = {s.net_version, sat};
  }
  if (!nsat_cache_->second) return "constraint network unsatisfiable";
  return "";
}

// ---------------------------------------------------------------------------
// Search

Verdict Tableau::run() {
  return run([](const CompletionSystem&) { return Visit::Accept; });
}

Verdict Tableau::run(const Visitor& visitor) {
  auto start = std::chrono::steady_clock::now();
  deadline_ = start + std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                          std::chrono::duration<double>(limits_.timeout_s));
  stats_ = Statistics{};
  nsat_cache_.reset();

  struct Frame {
    CompletionSystem snapshot;
    RuleInstance inst;
    std::uint32_t next_alt;
  };
  std::vector<Frame> stack;
  CompletionSystem s = initial_state();

  auto finish = [&](VerdictKind kind, std::optional<ExtractedModel> model) {
    stats_.millis = std::chrono::duration<double, std::milli>(
                        std::chrono::steady_clock::now() - start)
                        .count();
    Verdict v;
    v.kind = kind;
    v.model = std::move(model);
    v.stats = stats_;
    return v;
  };

  auto backtrack = [&]() -> bool {
    while (!stack.empty()) {
      Frame& f = stack.back();
      if (f.next_alt >= f.inst.num_alternatives) {
        stack.pop_back();
        continue;
      }
      std::uint32_t alt = f.next_alt++;
      s = f.snapshot;
      nsat_cache_.reset();
      apply_rule(s, f.inst, alt);
      ++stats_.rule_applications;
      if (trace_) {
        std::ostringstream os;
        os << rule_name(f.inst.rule) << " node=" << f.inst.node << " alt=" << alt;
        trace_(os.str());
      }
      return true;
    }
    return false;
  };

  while (true) {
    if (stats_.nodes > limits_.max_nodes ||
        std::chrono::steady_clock::now() > deadline_)
      return finish(VerdictKind::ResourceLimitExceeded, std::nullopt);
    std::string clash = check_clash(s);
    if (!clash.empty()) {
      if (trace_) trace_("clash: " + clash);
      if (!backtrack()) return finish(VerdictKind::Unsatisfiable, std::nullopt);
      continue;
    }
    auto inst = applicable_rule(s);
    if (!inst) {
      if (visitor(s) == Visit::Accept)
        return finish(VerdictKind::Satisfiable, extract_model(s));
      if (trace_) trace_("complete system rejected by visitor");
      if (!backtrack()) return finish(VerdictKind::Unsatisfiable, std::nullopt);
      continue;
    }
    if (inst->num_alternatives == 0) {
      if (!backtrack()) return finish(VerdictKind::Unsatisfiable, std::nullopt);
      continue;
    }
    if (inst->num_alternatives > 1) {
      stack.push_back({s, *inst, 1});
      ++stats_.branches;
    }
    apply_rule(s, *inst, 0);
    ++stats_.rule_applications;
    if (trace_) {
      std::ostringstream os;
      os << rule_name(inst->rule) << " node=" << inst->node << " alt=0";
      trace_(os.str());
    }
  }
}

ExtractedModel Tableau::extract_model(const CompletionSystem& s) const {
  ExtractedModel m;
  m.system = s;
  Blocking blk = compute_blocking(s);
  m.blocked_by = blk.direct;
  m.indirectly_blocked = blk.indirect;
  auto scen = solve_scenario(*rkb_.system, network_with_exclusions(s));
  if (!scen) scen = solve_scenario(*rkb_.system, s.net);
  if (scen) m.scenario = *scen;
  return m;
}

Verdict decide(const ReducedKB& rkb, const ResourceLimits& limits, Tableau::TraceFn trace) {
  Tableau t(rkb, limits, std::move(trace));
  return t.run();
}

bool role_edge_between(const ReducedKB& rkb, const CompletionSystem& s, NodeId from, NodeId to,
                       const RoleExpr& r) {
  return role_neighbour(rkb, s, from, to, r);
}

// ---------------------------------------------------------------------------
// Model validation

std::vector<std::string> validate_model(const ExtractedModel& m, const ReducedKB& rkb) {
  std::vector<std::string> out;
  const CompletionSystem& s = m.system;
  const ConstraintSystemDef& sys = *rkb.system;
  auto blocked = [&](NodeId n) {
    return m.blocked_by.count(n) != 0 || m.indirectly_blocked.count(n) != 0;
  };
  auto considered = [&](NodeId n) {
    return s.anodes[n].alive && !m.indirectly_blocked.count(n);
  };
  auto violation = [&](NodeId n, const std::string& what) {
    out.push_back("node " + std::to_string(n) + ": " + what);
  };
  auto scenario_is = [&](CNodeId a, CNodeId b, std::uint8_t rel) {
    return m.scenario.label(sys, a, b) == sys.singleton(rel);
  };

  for (NodeId n = 0; n < s.anodes.size(); ++n) {
    if (!considered(n)) continue;
    const AbstractNode& node = s.anodes[n];
    for (Concept t : rkb.tbox)
      if (!node.label.count(t))
        violation(n, "missing internalized axiom " + print_concept(t));
    if (node.label.count(Concept::bottom())) violation(n, "bottom in label");
    for (Concept c : node.label) {
      switch (c.kind()) {
        case ConceptKind::Not:
          if (node.label.count(c.child()))
            violation(n, "complement pair " + print_concept(c.child()));
          if (c.child().kind() == ConceptKind::SelfRestriction &&
              role_neighbour(rkb, s, n, n, c.child().role()))
            violation(n, "negated Self restriction with self-loop");
          if (!blocked(n) && c.child().kind() == ConceptKind::CExists) {
            Concept e = c.child();
            std::uint8_t rel = sys.index_of(e.relation());
            for (CNodeId c1 : path_neighbours(rkb, s, n, e.path1()))
              for (CNodeId c2 : path_neighbours(rkb, s, n, e.path2()))
                if (scenario_is(c1, c2, rel))
                  violation(n, "negated concrete exists satisfied: " + print_concept(e));
          }
          if (!blocked(n) && c.child().kind() == ConceptKind::CExistsInd) {
            Concept e = c.child();
            std::uint8_t rel = sys.index_of(e.relation());
            auto i = concrete_node_of(s, e.name());
            if (i)
              for (CNodeId c1 : path_neighbours(rkb, s, n, e.path1())) {
                bool hit = e.individual_side() == IndividualSide::Right
                               ? scenario_is(c1, *i, rel)
                               : scenario_is(*i, c1, rel);
                if (hit)
                  violation(n, "negated concrete exists satisfied: " + print_concept(e));
              }
          }
          break;
        case ConceptKind::And:
          if (!node.label.count(c.left()) || !node.label.count(c.right()))
            violation(n, "conjunction not decomposed: " + print_concept(c));
          break;
        case ConceptKind::Or:
          if (!node.label.count(c.left()) && !node.label.count(c.right()))
            violation(n, "disjunction unresolved: " + print_concept(c));
          break;
        case ConceptKind::SelfRestriction:
          if (!blocked(n) && !role_neighbour(rkb, s, n, n, c.role()))
            violation(n, "Self restriction without self-loop: " + print_concept(c));
          break;
        case ConceptKind::Forall: {
          Concept init =
              Concept::automaton_forall(c.role(), rkb.automaton(c.role()).initial, c.child());
          if (!node.label.count(init))
            violation(n, "universal restriction not initialized: " + print_concept(c));
          for (NodeId b : role_neighbours(rkb, s, n, c.role()))
            if (considered(b) && !s.anodes[b].label.count(c.child()))
              violation(n, "universal restriction not propagated to node " + std::to_string(b));
          break;
        }
        case ConceptKind::AutomatonForall: {
          const RoleAutomaton& aut = rkb.automaton(c.role());
          if (aut.accepts_epsilon_from(c.automaton_state()) && !node.label.count(c.child()))
            violation(n, "automaton epsilon obligation unmet: " + print_concept(c));
          for (const auto& [lbl, q] : aut.role_moves(c.automaton_state())) {
            Concept target = Concept::automaton_forall(c.role(), q, c.child());
            for (NodeId b : role_neighbours(rkb, s, n, lbl))
              if (considered(b) && !s.anodes[b].label.count(target))
                violation(n, "automaton transition obligation unmet toward node " +
                                 std::to_string(b));
          }
          break;
        }
        case ConceptKind::Exists: {
          if (blocked(n)) break;
          bool witness = false;
          for (NodeId b : role_neighbours(rkb, s, n, c.role()))
            if (s.anodes[b].label.count(c.child())) witness = true;
          if (!witness) violation(n, "existential unmet: " + print_concept(c));
          break;
        }
        case ConceptKind::AtLeast: {
          if (blocked(n)) break;
          std::vector<std::uint32_t> with_c;
          for (NodeId b : role_neighbours(rkb, s, n, c.role()))
            if (s.anodes[b].label.count(c.child())) with_c.push_back(b);
          if (!distinct_subset_of_size(
                  with_c,
                  [&](std::uint32_t x, std::uint32_t y) { return distinct_abstract(s, x, y); },
                  c.cardinality()))
            violation(n, "at-least unmet: " + print_concept(c));
          break;
        }
        case ConceptKind::AtMost: {
          std::size_t count = 0;
          for (NodeId b : role_neighbours(rkb, s, n, c.role()))
            if (considered(b) && s.anodes[b].label.count(c.child())) ++count;
          if (count > c.cardinality())
            violation(n, "at-most exceeded: " + print_concept(c));
          break;
        }
        case ConceptKind::CExists: {
          if (blocked(n)) break;
          std::uint8_t rel = sys.index_of(c.relation());
          bool found = false;
          for (CNodeId c1 : path_neighbours(rkb, s, n, c.path1()))
            for (CNodeId c2 : path_neighbours(rkb, s, n, c.path2()))
              if (scenario_is(c1, c2, rel)) found = true;
          if (!found) violation(n, "concrete existential unmet: " + print_concept(c));
          break;
        }
        case ConceptKind::CExistsInd: {
          if (blocked(n)) break;
          std::uint8_t rel = sys.index_of(c.relation());
          auto i = concrete_node_of(s, c.name());
          bool found = false;
          if (i)
            for (CNodeId c1 : path_neighbours(rkb, s, n, c.path1())) {
              bool hit = c.individual_side() == IndividualSide::Right
                             ? scenario_is(c1, *i, rel)
                             : scenario_is(*i, c1, rel);
              if (hit) found = true;
            }
          if (!found) violation(n, "concrete existential unmet: " + print_concept(c));
          break;
        }
        case ConceptKind::CForall: {
          if (blocked(n)) break;
          std::uint8_t rel = sys.index_of(c.relation());
          for (CNodeId c1 : path_neighbours(rkb, s, n, c.path1()))
            for (CNodeId c2 : path_neighbours(rkb, s, n, c.path2()))
              if (!scenario_is(c1, c2, rel))
                violation(n, "concrete universal unmet: " + print_concept(c));
          break;
        }
        case ConceptKind::CForallInd: {
          if (blocked(n)) break;
          std::uint8_t rel = sys.index_of(c.relation());
          auto i = concrete_node_of(s, c.name());
          if (i)
            for (CNodeId c1 : path_neighbours(rkb, s, n, c.path1())) {
              bool hit = c.individual_side() == IndividualSide::Right
                             ? scenario_is(c1, *i, rel)
                             : scenario_is(*i, c1, rel);
              if (!hit) violation(n, "concrete universal unmet: " + print_concept(c));
            }
          break;
        }
        case ConceptKind::CAtLeast: {
          if (blocked(n)) break;
          auto succs = g_successors(rkb, s, n, c.concrete_role().name);
          if (!distinct_subset_of_size(
                  succs,
                  [&](std::uint32_t x, std::uint32_t y) { return distinct_concrete(s, x, y); },
                  c.cardinality()))
            violation(n, "concrete at-least unmet: " + print_concept(c));
          break;
        }
        case ConceptKind::CAtMost: {
          if (blocked(n)) break;
          auto succs = g_successors(rkb, s, n, c.concrete_role().name);
          if (succs.size() > c.cardinality())
            violation(n, "concrete at-most exceeded: " + print_concept(c));
          break;
        }
        default:
          break;
      }
    }
    for (const auto& ra : rkb.residual_role_assertions) {
      if (ra.kind == RoleAssertionKind::Reflexive && !blocked(n)) {
        auto it = s.aedges.find({n, n});
        if (it == s.aedges.end() || !it->second.count(ra.r1))
          violation(n, "reflexivity assertion unmet for " + print_role(ra.r1));
      }
      if (ra.kind == RoleAssertionKind::Disjoint) {
        for (NodeId b = 0; b < s.anodes.size(); ++b)
          if (s.anodes[b].alive && role_neighbour(rkb, s, n, b, ra.r1) &&
              role_neighbour(rkb, s, n, b, ra.r2))
            violation(n, "disjoint roles both connect to node " + std::to_string(b));
      }
    }
  }
  // nominal occurrence and uniqueness
  for (const auto& name : rkb.named_individuals) {
    Concept o = Concept::nominal(name);
    std::vector<NodeId> holders;
    for (NodeId n = 0; n < s.anodes.size(); ++n)
      if (s.anodes[n].alive && s.anodes[n].label.count(o)) holders.push_back(n);
    if (holders.empty()) out.push_back("individual " + name + " has no node");
    if (holders.size() > 1) out.push_back("individual " + name + " on multiple nodes");
  }
  // the network itself must be satisfiable and the scenario must refine it
  if (!is_satisfiable(sys, s.net)) out.push_back("constraint network unsatisfiable");
  for (const auto& [key, lbl] : s.net.stored()) {
    RelSet sc = m.scenario.label(sys, key.first, key.second);
    if ((sc & lbl) != sc) out.push_back("scenario does not refine the network");
  }
  return out;
}

}  // namespace sroiqc
