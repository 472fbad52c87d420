// Batch command-line front end: loads a .kbx knowledge base, answers
// satisfiability / subsumption / instance / grounded-circumscription
// queries, and emits verdicts, models, traces, and diagnostics.
//
// Exit codes: 0 positive answer, 1 negative answer, 2 input error,
// 3 resource limit exceeded.

#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "sroiqc/circumscription.hpp"
#include "sroiqc/preprocess.hpp"
#include "sroiqc/query.hpp"
#include "sroiqc/tableau.hpp"
#include "sroiqc/text.hpp"

using json = nlohmann::ordered_json;

namespace {

constexpr int kExitPositive = 0;
constexpr int kExitNegative = 1;
constexpr int kExitInputError = 2;
constexpr int kExitLimit = 3;

struct CliConfig {
  std::string input;
  std::string concept_text;
  std::string sub_text;
  std::string super_text;
  std::string individual;
  std::uint64_t max_nodes = 50000;
  double timeout_s = 60.0;
  bool json_output = false;
  std::string emit_model;  // "", "dot", "json"
  bool trace = false;
  std::string system;
};

void print_diagnostics(const std::string& file, const std::vector<sroiqc::ParseDiagnostic>& ds) {
  for (const auto& d : ds) {
    std::cerr << file << ":" << d.span.line << ":" << d.span.column << ": "
              << (d.severity == sroiqc::Severity::Error ? "error: " : "warning: ") << d.message
              << "\n";
  }
}

std::optional<sroiqc::KnowledgeBase> load_kb(const CliConfig& cfg) {
  std::ifstream in(cfg.input);
  if (!in) {
    std::cerr << cfg.input << ": cannot open file\n";
    return std::nullopt;
  }
  std::stringstream buf;
  buf << in.rdbuf();
  sroiqc::ParseResult res = sroiqc::parse_document(buf.str());
  print_diagnostics(cfg.input, res.diagnostics);
  if (!res.ok()) return std::nullopt;
  return res.doc->kb;
}

std::optional<sroiqc::Concept> parse_concept_arg(const std::string& text, const char* what) {
  sroiqc::ConceptParseResult res = sroiqc::parse_concept(text);
  if (!res.concept_expr) {
    std::cerr << what << ": ";
    for (const auto& d : res.diagnostics) std::cerr << d.message << "; ";
    std::cerr << "\n";
    return std::nullopt;
  }
  return res.concept_expr;
}

json model_to_json(const sroiqc::ExtractedModel& m, const sroiqc::ConstraintSystemDef& sys) {
  json out;
  json nodes = json::array();
  for (sroiqc::NodeId n = 0; n < m.system.anodes.size(); ++n) {
    const auto& node = m.system.anodes[n];
    if (!node.alive) continue;
    json jn;
    jn["id"] = n;
    jn["nominal"] = node.nominal;
    json label = json::array();
    for (sroiqc::Concept c : node.label) label.push_back(sroiqc::print_concept(c));
    jn["label"] = label;
    if (auto it = m.blocked_by.find(n); it != m.blocked_by.end()) jn["blocked_by"] = it->second;
    if (m.indirectly_blocked.count(n)) jn["indirectly_blocked"] = true;
    nodes.push_back(jn);
  }
  out["nodes"] = nodes;
  json edges = json::array();
  for (const auto& [key, roles] : m.system.aedges) {
    if (!m.system.anodes[key.first].alive || !m.system.anodes[key.second].alive) continue;
    json je;
    je["from"] = key.first;
    je["to"] = key.second;
    json rs = json::array();
    for (const auto& r : roles) rs.push_back(sroiqc::print_role(r));
    je["roles"] = rs;
    edges.push_back(je);
  }
  out["edges"] = edges;
  json cnodes = json::array();
  for (sroiqc::CNodeId c = 0; c < m.system.cnodes.size(); ++c) {
    const auto& node = m.system.cnodes[c];
    if (!node.alive) continue;
    json jc;
    jc["id"] = c;
    if (node.named) jc["name"] = node.name;
    cnodes.push_back(jc);
  }
  out["concrete_nodes"] = cnodes;
  json cedges = json::array();
  for (const auto& [key, roles] : m.system.cedges) {
    if (!m.system.anodes[key.first].alive || !m.system.cnodes[key.second].alive) continue;
    json je;
    je["from"] = key.first;
    je["to"] = key.second;
    json rs = json::array();
    for (const auto& g : roles) rs.push_back(g);
    je["roles"] = rs;
    cedges.push_back(je);
  }
  out["concrete_edges"] = cedges;
  json scen = json::array();
  for (const auto& [key, lbl] : m.scenario.stored()) {
    for (std::size_t r = 0; r < sys.arity(); ++r)
      if (lbl & (sroiqc::RelSet{1} << r)) {
        json js;
        js["a"] = key.first;
        js["b"] = key.second;
        js["rel"] = sys.relation_name(r);
        scen.push_back(js);
      }
  }
  out["scenario"] = scen;
  return out;
}

std::string model_to_dot(const sroiqc::ExtractedModel& m, const sroiqc::ConstraintSystemDef& sys) {
  std::ostringstream os;
  os << "digraph model {\n";
  for (sroiqc::NodeId n = 0; n < m.system.anodes.size(); ++n) {
    const auto& node = m.system.anodes[n];
    if (!node.alive) continue;
    os << "  a" << n << " [shape=ellipse,label=\"" << n;
    for (sroiqc::Concept c : node.label) {
      if (c.kind() == sroiqc::ConceptKind::Nominal || c.kind() == sroiqc::ConceptKind::Atomic)
        os << "\\n" << sroiqc::print_concept(c);
    }
    os << "\"";
    if (m.blocked_by.count(n)) os << ",style=dotted";
    os << "];\n";
  }
  for (sroiqc::CNodeId c = 0; c < m.system.cnodes.size(); ++c) {
    const auto& node = m.system.cnodes[c];
    if (!node.alive) continue;
    os << "  c" << c << " [shape=box,label=\"" << (node.named ? node.name : std::to_string(c))
       << "\"];\n";
  }
  for (const auto& [key, roles] : m.system.aedges) {
    if (!m.system.anodes[key.first].alive || !m.system.anodes[key.second].alive) continue;
    os << "  a" << key.first << " -> a" << key.second << " [label=\"";
    bool first = true;
    for (const auto& r : roles) {
      if (!first) os << ",";
      os << sroiqc::print_role(r);
      first = false;
    }
    os << "\"];\n";
  }
  for (const auto& [key, roles] : m.system.cedges) {
    if (!m.system.anodes[key.first].alive || !m.system.cnodes[key.second].alive) continue;
    os << "  a" << key.first << " -> c" << key.second << " [label=\"";
    bool first = true;
    for (const auto& g : roles) {
      if (!first) os << ",";
      os << g;
      first = false;
    }
    os << "\"];\n";
  }
  for (const auto& [key, lbl] : m.scenario.stored()) {
    for (std::size_t r = 0; r < sys.arity(); ++r)
      if (lbl & (sroiqc::RelSet{1} << r))
        os << "  c" << key.first << " -> c" << key.second << " [style=dashed,label=\""
           << sys.relation_name(r) << "\"];\n";
  }
  os << "}\n";
  return os.str();
}

int emit_outcome(const CliConfig& cfg, const sroiqc::Query& q, const sroiqc::QueryOutcome& out,
                 const sroiqc::ConstraintSystemDef& sys) {
  if (cfg.json_output) {
    json j;
    j["verdict"] = sroiqc::verdict_string(q, out);
    json stats;
    stats["nodes"] = out.stats.nodes;
    stats["rule_applications"] = out.stats.rule_applications;
    stats["branches"] = out.stats.branches;
    stats["millis"] = static_cast<std::uint64_t>(out.stats.millis);
    j["statistics"] = stats;
    if (out.model && cfg.emit_model == "json") j["model"] = model_to_json(*out.model, sys);
    if (out.extension) {
      json exts;
      for (const auto& [name, members] : out.extension->concepts) {
        json ms = json::array();
        for (const auto& m : members) ms.push_back(m);
        exts[name] = ms;
      }
      for (const auto& [name, pairs] : out.extension->roles) {
        json ps = json::array();
        for (const auto& [a, b] : pairs) ps.push_back(json::array({a, b}));
        exts[name] = ps;
      }
      j["extensions"] = exts;
      j["iterations"] = out.gc_iterations;
    }
    std::cout << j.dump(2) << "\n";
  } else {
    std::cout << sroiqc::verdict_string(q, out) << "\n";
    if (out.extension) {
      for (const auto& [name, members] : out.extension->concepts) {
        std::cout << name << " = {";
        bool first = true;
        for (const auto& m : members) {
          if (!first) std::cout << ", ";
          std::cout << m;
          first = false;
        }
        std::cout << "}\n";
      }
      for (const auto& [name, pairs] : out.extension->roles) {
        std::cout << name << " = {";
        bool first = true;
        for (const auto& [a, b] : pairs) {
          if (!first) std::cout << ", ";
          std::cout << "(" << a << "," << b << ")";
          first = false;
        }
        std::cout << "}\n";
      }
    }
    if (out.model && cfg.emit_model == "dot") std::cout << model_to_dot(*out.model, sys);
    if (out.model && cfg.emit_model == "json")
      std::cout << model_to_json(*out.model, sys).dump(2) << "\n";
  }
  switch (out.kind) {
    case sroiqc::QueryOutcome::Kind::Positive: return kExitPositive;
    case sroiqc::QueryOutcome::Kind::Negative: return kExitNegative;
    case sroiqc::QueryOutcome::Kind::ResourceLimit: return kExitLimit;
  }
  return kExitInputError;
}

int run_one(const CliConfig& cfg, const sroiqc::Query& q) {
  auto kb = load_kb(cfg);
  if (!kb) return kExitInputError;
  sroiqc::RunOptions opts;
  opts.limits.max_nodes = cfg.max_nodes;
  opts.limits.timeout_s = cfg.timeout_s;
  if (!cfg.system.empty()) {
    opts.system_override = sroiqc::ConstraintSystemDef::by_name(cfg.system);
    if (!opts.system_override) {
      std::cerr << "unknown constraint system '" << cfg.system << "'\n";
      return kExitInputError;
    }
  }
  if (cfg.trace) opts.trace = [](const std::string& line) { std::cerr << line << "\n"; };
  const sroiqc::ConstraintSystemDef* sys = opts.system_override;
  if (!sys && kb->constraint_system) sys = sroiqc::ConstraintSystemDef::by_name(*kb->constraint_system);
  if (!sys) sys = &sroiqc::ConstraintSystemDef::point();
  try {
    sroiqc::QueryOutcome out = sroiqc::run_query(*kb, q, opts);
    return emit_outcome(cfg, q, out, *sys);
  } catch (const sroiqc::KbError& e) {
    std::cerr << cfg.input << ": error: " << e.what() << "\n";
    return kExitInputError;
  } catch (const sroiqc::ConstraintError& e) {
    std::cerr << cfg.input << ": error: " << e.what() << "\n";
    return kExitInputError;
  }
}

int run_dump_reduced(const CliConfig& cfg) {
  auto kb = load_kb(cfg);
  if (!kb) return kExitInputError;
  sroiqc::PreprocessOptions popts;
  if (!cfg.system.empty()) popts.system_override = sroiqc::ConstraintSystemDef::by_name(cfg.system);
  try {
    sroiqc::ReducedKB rkb = sroiqc::preprocess(*kb, popts);
    std::cout << "; reduced knowledge base (system: " << rkb.system->name() << ")\n";
    std::cout << "; tbox (internalized)\n";
    for (sroiqc::Concept c : rkb.tbox)
      std::cout << "(implies top " << sroiqc::print_concept(c) << ")\n";
    std::cout << "; residual abox\n";
    for (const auto& cv : rkb.cvalues)
      std::cout << "(cvalue " << cv.individual << " " << cv.role.name << " " << cv.var << ")\n";
    for (const auto& cc : rkb.cconstraints)
      std::cout << "(cconstraint " << cc.v1 << " " << cc.rel << " " << cc.v2 << ")\n";
    for (const auto& d : rkb.distincts)
      std::cout << "(distinct " << d.a << " " << d.b << ")\n";
    std::cout << "; residual role assertions\n";
    for (const auto& ra : rkb.residual_role_assertions) {
      switch (ra.kind) {
        case sroiqc::RoleAssertionKind::Disjoint:
          std::cout << "(dis " << sroiqc::print_role(ra.r1) << " " << sroiqc::print_role(ra.r2)
                    << ")\n";
          break;
        case sroiqc::RoleAssertionKind::Irreflexive:
          std::cout << "(irr " << sroiqc::print_role(ra.r1) << ")\n";
          break;
        case sroiqc::RoleAssertionKind::Reflexive:
          std::cout << "(ref " << sroiqc::print_role(ra.r1) << ")\n";
          break;
        default:
          break;
      }
    }
    for (const auto& [name, aut] : rkb.automata) {
      std::cout << "; automaton " << name << ": states=" << aut.num_states
                << " initial=" << aut.initial << " final=" << aut.final << "\n";
      for (const auto& t : aut.transitions)
        std::cout << ";   " << t.from << " -"
                  << (t.label ? sroiqc::print_role(*t.label) : std::string("eps")) << "-> "
                  << t.to << "\n";
    }
    return kExitPositive;
  } catch (const sroiqc::KbError& e) {
    std::cerr << cfg.input << ": error: " << e.what() << "\n";
    return kExitInputError;
  }
}

int run_corpus_cmd(const CliConfig& cfg) {
  sroiqc::RunOptions opts;
  opts.limits.max_nodes = cfg.max_nodes;
  opts.limits.timeout_s = cfg.timeout_s;
  if (!cfg.system.empty()) opts.system_override = sroiqc::ConstraintSystemDef::by_name(cfg.system);
  sroiqc::CorpusReport report = sroiqc::run_corpus(cfg.input, opts);
  for (const auto& e : report.entries)
    std::cout << (e.pass ? "PASS" : "FAIL") << "  " << e.file << "  expected=" << e.expected
              << " actual=" << e.actual << "\n";
  std::cout << report.entries.size() << " file(s), "
            << std::count_if(report.entries.begin(), report.entries.end(),
                             [](const sroiqc::CorpusEntry& e) { return e.pass; })
            << " passed\n";
  return report.all_pass ? kExitPositive : kExitNegative;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"SROIQ(C) / GC-SROIQ(C) batch reasoner"};
  app.require_subcommand(1);
  CliConfig cfg;

  auto add_common = [&](CLI::App* cmd, bool needs_file = true) {
    if (needs_file) cmd->add_option("input", cfg.input, "input .kbx file")->required();
    cmd->add_option("--max-nodes", cfg.max_nodes, "abstract node budget");
    cmd->add_option("--timeout-s", cfg.timeout_s, "time budget in seconds");
    cmd->add_flag("--json", cfg.json_output, "JSON output");
    cmd->add_option("--emit-model", cfg.emit_model, "serialize the model (dot|json)")
        ->check(CLI::IsMember({"dot", "json"}));
    cmd->add_flag("--trace", cfg.trace, "rule-application log on stderr");
    cmd->add_option("--system", cfg.system, "constraint system override")
        ->check(CLI::IsMember({"allen", "rcc8", "point"}));
  };

  auto* sat = app.add_subcommand("sat", "KB satisfiability");
  add_common(sat);
  auto* csat = app.add_subcommand("concept-sat", "concept satisfiability w.r.t. the KB");
  add_common(csat);
  csat->add_option("--concept", cfg.concept_text, "concept expression")->required();
  auto* subs = app.add_subcommand("subsumes", "concept subsumption");
  add_common(subs);
  subs->add_option("--sub", cfg.sub_text, "subsumee concept")->required();
  subs->add_option("--super", cfg.super_text, "subsumer concept")->required();
  auto* inst = app.add_subcommand("instance", "instance checking");
  add_common(inst);
  inst->add_option("--individual", cfg.individual, "individual name")->required();
  inst->add_option("--concept", cfg.concept_text, "concept expression")->required();
  auto* gcsat = app.add_subcommand("gc-sat", "GC satisfiability");
  add_common(gcsat);
  auto* gcinst = app.add_subcommand("gc-instance", "GC instance checking");
  add_common(gcinst);
  gcinst->add_option("--individual", cfg.individual, "individual name")->required();
  gcinst->add_option("--concept", cfg.concept_text, "concept expression")->required();
  auto* gccsat = app.add_subcommand("gc-concept-sat", "GC concept satisfiability");
  add_common(gccsat);
  gccsat->add_option("--concept", cfg.concept_text, "concept expression")->required();
  auto* gcsubs = app.add_subcommand("gc-subsumes", "GC subsumption");
  add_common(gcsubs);
  gcsubs->add_option("--sub", cfg.sub_text, "subsumee concept")->required();
  gcsubs->add_option("--super", cfg.super_text, "subsumer concept")->required();
  auto* corpus = app.add_subcommand("corpus", "run a directory of expectation-annotated KBs");
  corpus->add_option("input", cfg.input, "directory of .kbx files")->required();
  corpus->add_option("--max-nodes", cfg.max_nodes, "abstract node budget");
  corpus->add_option("--timeout-s", cfg.timeout_s, "time budget in seconds");
  corpus->add_option("--system", cfg.system, "constraint system override")
      ->check(CLI::IsMember({"allen", "rcc8", "point"}));
  auto* dump = app.add_subcommand("dump-reduced", "print the reduced KB");
  add_common(dump);

  CLI11_PARSE(app, argc, argv);

  if (sat->parsed()) return run_one(cfg, sroiqc::Query{sroiqc::QueryKbSat{}});
  if (csat->parsed()) {
    auto c = parse_concept_arg(cfg.concept_text, "--concept");
    if (!c) return kExitInputError;
    return run_one(cfg, sroiqc::Query{sroiqc::QueryConceptSat{*c}});
  }
  if (subs->parsed()) {
    auto sub = parse_concept_arg(cfg.sub_text, "--sub");
    auto super = parse_concept_arg(cfg.super_text, "--super");
    if (!sub || !super) return kExitInputError;
    return run_one(cfg, sroiqc::Query{sroiqc::QuerySubsumes{*sub, *super}});
  }
  if (inst->parsed()) {
    auto c = parse_concept_arg(cfg.concept_text, "--concept");
    if (!c) return kExitInputError;
    return run_one(cfg, sroiqc::Query{sroiqc::QueryInstance{cfg.individual, *c}});
  }
  if (gcsat->parsed()) return run_one(cfg, sroiqc::Query{sroiqc::QueryGcSat{}});
  if (gcinst->parsed()) {
    auto c = parse_concept_arg(cfg.concept_text, "--concept");
    if (!c) return kExitInputError;
    return run_one(cfg, sroiqc::Query{sroiqc::QueryGcInstance{cfg.individual, *c}});
  }
  if (gccsat->parsed()) {
    auto c = parse_concept_arg(cfg.concept_text, "--concept");
    if (!c) return kExitInputError;
    return run_one(cfg, sroiqc::Query{sroiqc::QueryGcConceptSat{*c}});
  }
  if (gcsubs->parsed()) {
    auto sub = parse_concept_arg(cfg.sub_text, "--sub");
    auto super = parse_concept_arg(cfg.super_text, "--super");
    if (!sub || !super) return kExitInputError;
    return run_one(cfg, sroiqc::Query{sroiqc::QueryGcSubsumes{*sub, *super}});
  }
  if (corpus->parsed()) return run_corpus_cmd(cfg);
  if (dump->parsed()) return run_dump_reduced(cfg);
  return kExitInputError;
}
