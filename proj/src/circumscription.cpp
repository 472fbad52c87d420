#include "sroiqc/circumscription.hpp"

#include <algorithm>

#include "sroiqc/preprocess.hpp"

namespace sroiqc {

Concept nominal_disjunction(const std::set<std::string>& individuals) {
  if (individuals.empty()) return Concept::bottom();
  std::vector<std::string> names(individuals.begin(), individuals.end());
  Concept out = Concept::nominal(names.back());
  for (auto it = names.rbegin() + 1; it != names.rend(); ++it)
    out = Concept::disj(Concept::nominal(*it), out);
  return out;
}

std::set<std::string> GroundedExtension::role_domain(const std::string& r) const {
  std::set<std::string> out;
  auto it = roles.find(r);
  if (it != roles.end())
    for (const auto& [a, b] : it->second) {
      (void)b;
      out.insert(a);
    }
  return out;
}

std::set<std::string> GroundedExtension::role_range(const std::string& r) const {
  std::set<std::string> out;
  auto it = roles.find(r);
  if (it != roles.end())
    for (const auto& [a, b] : it->second) {
      (void)a;
      out.insert(b);
    }
  return out;
}

std::set<std::string> GroundedExtension::role_range_from(const std::string& r,
                                                         const std::string& source) const {
  std::set<std::string> out;
  auto it = roles.find(r);
  if (it != roles.end())
    for (const auto& [a, b] : it->second)
      if (a == source) out.insert(b);
  return out;
}

bool GroundedExtension::strictly_below(const GroundedExtension& other) const {
  bool strict = false;
  for (const auto& [name, ext] : concepts) {
    auto it = other.concepts.find(name);
    const std::set<std::string>& theirs =
        it == other.concepts.end() ? std::set<std::string>{} : it->second;
    if (!std::includes(theirs.begin(), theirs.end(), ext.begin(), ext.end())) return false;
    if (ext.size() < theirs.size()) strict = true;
  }
  for (const auto& [name, ext] : roles) {
    auto it = other.roles.find(name);
    const std::set<std::pair<std::string, std::string>>& theirs =
        it == other.roles.end() ? std::set<std::pair<std::string, std::string>>{} : it->second;
    if (!std::includes(theirs.begin(), theirs.end(), ext.begin(), ext.end())) return false;
    if (ext.size() < theirs.size()) strict = true;
  }
  return strict;
}

std::size_t GroundedExtension::total_size() const {
  std::size_t n = 0;
  for (const auto& [name, ext] : concepts) {
    (void)name;
    n += ext.size();
  }
  for (const auto& [name, ext] : roles) {
    (void)name;
    n += ext.size();
  }
  return n;
}

// ---------------------------------------------------------------------------
// GcReasoner

GcReasoner::GcReasoner(KnowledgeBase kb, const ConstraintSystemDef* system_override,
                       ResourceLimits limits)
    : kb_(std::move(kb)), system_override_(system_override), limits_(limits) {}

ResourceLimits GcReasoner::remaining_limits() const {
  ResourceLimits lim = limits_;
  lim.timeout_s = std::max(0.01, limits_.timeout_s - total_.millis / 1000.0);
  return lim;
}

void GcReasoner::charge(const Statistics& stats) {
  total_.nodes += stats.nodes;
  total_.rule_applications += stats.rule_applications;
  total_.branches += stats.branches;
  total_.millis += stats.millis;
}

KnowledgeBase GcReasoner::grounded_kb() const {
  KnowledgeBase out = kb_;
  VocabularyReport vocab = free_vocabulary(kb_);
  Concept nom = nominal_disjunction(vocab.abstract_individuals);
  for (const auto& c : kb_.minimized.concepts)
    out.tbox.push_back(Gci{Concept::atomic(c), nom});
  for (const auto& r : kb_.minimized.roles) {
    RoleExpr role = RoleExpr::named(r);
    out.tbox.push_back(Gci{Concept::exists(role, Concept::top()), nom});
    out.tbox.push_back(Gci{Concept::exists(role.inverted(), Concept::top()), nom});
  }
  return out;
}

KnowledgeBase GcReasoner::bounded_kb(const GroundedExtension& ext) const {
  KnowledgeBase out = grounded_kb();
  for (const auto& c : kb_.minimized.concepts) {
    auto it = ext.concepts.find(c);
    std::set<std::string> members =
        it == ext.concepts.end() ? std::set<std::string>{} : it->second;
    out.tbox.push_back(Gci{Concept::atomic(c), nominal_disjunction(members)});
  }
  for (const auto& r : kb_.minimized.roles) {
    RoleExpr role = RoleExpr::named(r);
    out.tbox.push_back(Gci{Concept::exists(role.inverted(), Concept::top()),
                           nominal_disjunction(ext.role_range(r))});
    out.tbox.push_back(Gci{Concept::exists(role, Concept::top()),
                           nominal_disjunction(ext.role_domain(r))});
    for (const auto& p : ext.role_domain(r))
      out.tbox.push_back(Gci{Concept::exists(role.inverted(), Concept::nominal(p)),
                             nominal_disjunction(ext.role_range_from(r, p))});
  }
  return out;
}

Verdict GcReasoner::run_on(const KnowledgeBase& kb, const Tableau::Visitor& visitor,
                           const ReducedKB** rkb_out) {
  PreprocessOptions popts;
  popts.system_override = system_override_;
  rkb_pool_.push_back(preprocess(kb, popts));
  const ReducedKB& rkb = rkb_pool_.back();
  if (rkb_out) *rkb_out = &rkb;
  Tableau engine(rkb, remaining_limits());
  Verdict v = visitor ? engine.run(visitor) : engine.run();
  charge(v.stats);
  return v;
}

GroundedExtension GcReasoner::extract_from(const ReducedKB& rkb,
                                           const CompletionSystem& s) const {
  GroundedExtension ext;
  // Indirectly blocked nodes are cut away when the system is unravelled;
  // their (unsaturated) labels carry no model information.
  Tableau probe(rkb, ResourceLimits{});
  auto blocking = probe.compute_blocking(s);

  std::map<NodeId, std::vector<std::string>> names_at;
  for (const auto& name : rkb.named_individuals) {
    auto n = Tableau::node_of_individual(s, name);
    if (n) names_at[*n].push_back(name);
  }
  for (const auto& cname : kb_.minimized.concepts) {
    Concept atom = Concept::atomic(cname);
    ext.concepts[cname];
    for (NodeId n = 0; n < s.anodes.size(); ++n) {
      if (!s.anodes[n].alive || blocking.indirectly(n)) continue;
      if (!s.anodes[n].label.count(atom)) continue;
      auto it = names_at.find(n);
      if (it == names_at.end())
        throw NotGroundedError("minimized concept " + cname + " holds at unnamed node " +
                               std::to_string(n));
      for (const auto& name : it->second) ext.concepts[cname].insert(name);
    }
  }
  for (const auto& rname : kb_.minimized.roles) {
    RoleExpr role = RoleExpr::named(rname);
    ext.roles[rname];
    for (NodeId x = 0; x < s.anodes.size(); ++x) {
      if (!s.anodes[x].alive || blocking.indirectly(x)) continue;
      for (NodeId y = 0; y < s.anodes.size(); ++y) {
        if (!s.anodes[y].alive || blocking.indirectly(y)) continue;
        if (!role_edge_between(rkb, s, x, y, role)) continue;
        auto ix = names_at.find(x);
        auto iy = names_at.find(y);
        if (ix == names_at.end() || iy == names_at.end())
          throw NotGroundedError("minimized role " + rname + " connects an unnamed node");
        for (const auto& a : ix->second)
          for (const auto& b : iy->second) ext.roles[rname].insert({a, b});
      }
    }
  }
  return ext;
}

Verdict GcReasoner::init_tab() {
  return run_on(grounded_kb(), nullptr);
}

GroundedExtension GcReasoner::extract_extension(const ExtractedModel& m) const {
  // The extension is defined against the grounded KB's reduction; the most
  // recent run's ReducedKB suffices because extraction only needs the
  // subrole closure and the named-individual vocabulary, which every run in
  // this reasoner shares.
  if (rkb_pool_.empty()) throw NotGroundedError("no tableau run to extract from");
  return extract_from(rkb_pool_.back(), m.system);
}

Verdict GcReasoner::min_tab(const GroundedExtension& ext) {
  const ReducedKB* rkb = nullptr;
  KnowledgeBase kb = bounded_kb(ext);
  PreprocessOptions popts;
  popts.system_override = system_override_;
  rkb_pool_.push_back(preprocess(kb, popts));
  const ReducedKB& reduced = rkb_pool_.back();
  rkb = &reduced;
  Tableau engine(reduced, remaining_limits());
  Verdict v = engine.run([&](const CompletionSystem& s) {
    GroundedExtension candidate = extract_from(*rkb, s);
    // Preference clash: only a strictly preferred grounded model counts.
    // The bounding axioms cap the semantic extensions, but nominal merges
    // can still inflate the name-level reading (two names on one node), so
    // equality and incomparability are both rejected.
    if (!candidate.strictly_below(ext)) return Tableau::Visit::RejectContinue;
    return Tableau::Visit::Accept;
  });
  charge(v.stats);
  return v;
}

GcVerdict GcReasoner::model_finder() {
  GcVerdict out;
  Verdict v = init_tab();
  if (v.kind == VerdictKind::ResourceLimitExceeded) {
    out.kind = GcVerdictKind::ResourceLimitExceeded;
    out.stats = total_;
    return out;
  }
  if (v.kind == VerdictKind::Unsatisfiable) {
    out.kind = GcVerdictKind::GcUnsatisfiable;
    out.stats = total_;
    return out;
  }
  GroundedExtension ext = extract_extension(*v.model);
  std::optional<ExtractedModel> model = v.model;
  // Each round strictly shrinks the extension, so the loop takes at most
  // total_size() + 1 iterations.
  std::size_t bound = ext.total_size() + 1;
  for (std::size_t i = 0; i < bound; ++i) {
    Verdict mv = min_tab(ext);
    if (mv.kind == VerdictKind::ResourceLimitExceeded) {
      out.kind = GcVerdictKind::ResourceLimitExceeded;
      out.stats = total_;
      return out;
    }
    if (mv.kind == VerdictKind::Unsatisfiable) break;  // ext is minimal
    GroundedExtension smaller = extract_extension(*mv.model);
    ++out.iterations;
    model = mv.model;
    ext = smaller;
  }
  out.kind = GcVerdictKind::GcSatisfiable;
  out.extension = ext;
  out.model = model;
  out.stats = total_;
  return out;
}

std::optional<std::vector<GroundedExtension>> GcReasoner::minimal_extensions() {
  // Exhaustively enumerate the complete clash-free systems of the grounded
  // KB; every minimal grounded extension is realized by at least one of
  // them. A candidate is minimal exactly when min_tab on it is
  // unsatisfiable.
  std::set<GroundedExtension> candidates;
  const ReducedKB* rkb = nullptr;
  KnowledgeBase kb = grounded_kb();
  PreprocessOptions popts;
  popts.system_override = system_override_;
  rkb_pool_.push_back(preprocess(kb, popts));
  const ReducedKB& reduced = rkb_pool_.back();
  rkb = &reduced;
  Tableau engine(reduced, remaining_limits());
  Verdict v = engine.run([&](const CompletionSystem& s) {
    candidates.insert(extract_from(*rkb, s));
    return Tableau::Visit::RejectContinue;  // keep enumerating
  });
  charge(v.stats);
  if (v.kind == VerdictKind::ResourceLimitExceeded) return std::nullopt;
  std::vector<GroundedExtension> out;
  for (const auto& ext : candidates) {
    Verdict mv = min_tab(ext);
    if (mv.kind == VerdictKind::ResourceLimitExceeded) return std::nullopt;
    if (mv.kind == VerdictKind::Unsatisfiable) out.push_back(ext);
  }
  return out;
}

GcAnswer GcReasoner::entails_instance(const std::string& individual, Concept c) {
  GcAnswer ans;
  auto minimal = minimal_extensions();
  if (!minimal) {
    ans.stats = total_;
    return ans;
  }
  return entails_instance_on(*minimal, individual, c);
}

GcAnswer GcReasoner::entails_instance_on(const std::vector<GroundedExtension>& minimal,
                                         const std::string& individual, Concept c) {
  GcAnswer ans;
  for (const auto& ext : minimal) {
    KnowledgeBase kb = bounded_kb(ext);
    kb.abox.push_back(ConceptAssertion{individual, Concept::negation(c)});
    Verdict v = run_on(kb, nullptr);
    if (v.kind == VerdictKind::ResourceLimitExceeded) {
      ans.stats = total_;
      return ans;
    }
    if (v.kind == VerdictKind::Satisfiable) {
      ans.result = false;  // witness GC-model avoiding C(individual)
      ans.stats = total_;
      return ans;
    }
  }
  ans.result = true;
  ans.stats = total_;
  return ans;
}

GcAnswer GcReasoner::concept_satisfiable(Concept c) {
  GcAnswer ans;
  auto minimal = minimal_extensions();
  if (!minimal) {
    ans.stats = total_;
    return ans;
  }
  // Fresh individual name unused by the KB.
  VocabularyReport vocab = free_vocabulary(kb_);
  std::string fresh = "_q";
  auto taken = [&](const std::string& n) {
    return vocab.abstract_individuals.count(n) || vocab.constraint_individuals.count(n) ||
           vocab.concepts.count(n) || vocab.abstract_roles.count(n) ||
           vocab.concrete_roles.count(n);
  };
  while (taken(fresh)) fresh += "q";
  for (const auto& ext : *minimal) {
    KnowledgeBase kb = bounded_kb(ext);
    kb.abox.push_back(ConceptAssertion{fresh, c});
    Verdict v = run_on(kb, nullptr);
    if (v.kind == VerdictKind::ResourceLimitExceeded) {
      ans.stats = total_;
      return ans;
    }
    if (v.kind == VerdictKind::Satisfiable) {
      ans.result = true;
      ans.stats = total_;
      return ans;
    }
  }
  ans.result = false;
  ans.stats = total_;
  return ans;
}

GcAnswer GcReasoner::subsumes(Concept sub, Concept super) {
  GcAnswer inner = concept_satisfiable(Concept::conj(sub, Concept::negation(super)));
  if (inner.result) inner.result = !*inner.result;
  return inner;
}

}  // namespace sroiqc
