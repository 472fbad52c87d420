#include "sroiqc/constraint.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <functional>
#include <istream>
#include <sstream>

namespace sroiqc {

// ---------------------------------------------------------------------------
// ConstraintSystemDef

ConstraintSystemDef::ConstraintSystemDef(std::string name, std::vector<std::string> relations,
                                         std::vector<std::uint8_t> converse,
                                         std::vector<std::vector<RelSet>> composition,
                                         std::uint8_t identity)
    : name_(std::move(name)),
      relations_(std::move(relations)),
      converse_(std::move(converse)),
      composition_(std::move(composition)),
      identity_(identity) {
  if (relations_.empty() || relations_.size() > 64)
    throw ConstraintError("constraint system must have 1..64 base relations");
  if (converse_.size() != relations_.size() || composition_.size() != relations_.size())
    throw ConstraintError("table sizes do not match relation count");
  for (const auto& row : composition_)
    if (row.size() != relations_.size()) throw ConstraintError("composition table not total");
  self_check();
}

std::uint8_t ConstraintSystemDef::index_of(const std::string& rel) const {
  for (std::size_t i = 0; i < relations_.size(); ++i)
    if (relations_[i] == rel) return static_cast<std::uint8_t>(i);
  throw UnknownRelationError("unknown relation '" + rel + "' in system " + name_);
}

bool ConstraintSystemDef::has_relation(const std::string& rel) const {
  return std::find(relations_.begin(), relations_.end(), rel) != relations_.end();
}

RelSet ConstraintSystemDef::converse_set(RelSet s) const {
  RelSet out = 0;
  for (std::size_t i = 0; i < arity(); ++i)
    if (s & (RelSet{1} << i)) out |= RelSet{1} << converse_[i];
  return out;
}

RelSet ConstraintSystemDef::compose_sets(RelSet a, RelSet b) const {
  RelSet out = 0;
  for (std::size_t i = 0; i < arity(); ++i) {
    if (!(a & (RelSet{1} << i))) continue;
    for (std::size_t j = 0; j < arity(); ++j)
      if (b & (RelSet{1} << j)) out |= composition_[i][j];
  }
  return out;
}

void ConstraintSystemDef::self_check() const {
  const std::size_t k = arity();
  for (std::size_t i = 0; i < k; ++i) {
    if (converse_[i] >= k) throw ConstraintError(name_ + ": converse out of range");
    if (converse_[converse_[i]] != i)
      throw ConstraintError(name_ + ": converse is not an involution at " + relations_[i]);
  }
  if (identity_ >= k) throw ConstraintError(name_ + ": identity out of range");
  if (converse_[identity_] != identity_)
    throw ConstraintError(name_ + ": identity must be self-converse");
  for (std::size_t r = 0; r < k; ++r) {
    if (compose(identity_, static_cast<std::uint8_t>(r)) != singleton(static_cast<std::uint8_t>(r)))
      throw ConstraintError(name_ + ": comp(id, r) != {r} at " + relations_[r]);
    if (compose(static_cast<std::uint8_t>(r), identity_) != singleton(static_cast<std::uint8_t>(r)))
      throw ConstraintError(name_ + ": comp(r, id) != {r} at " + relations_[r]);
    // r ; conv(r) must allow identity
    if (!(compose(static_cast<std::uint8_t>(r), converse_[r]) & singleton(identity_)))
      throw ConstraintError(name_ + ": comp(r, conv r) misses identity at " + relations_[r]);
  }
  // Duality: comp(r,s) = conv(comp(conv s, conv r))
  for (std::size_t r = 0; r < k; ++r)
    for (std::size_t s = 0; s < k; ++s) {
      RelSet lhs = composition_[r][s];
      RelSet rhs = converse_set(composition_[converse_[s]][converse_[r]]);
      if (lhs != rhs)
        throw ConstraintError(name_ + ": converse/composition duality fails at (" +
                              relations_[r] + ", " + relations_[s] + ")");
    }
}

namespace {

struct TableBuilder {
  std::vector<std::string> names;
  std::map<std::string, std::uint8_t> index;

  explicit TableBuilder(std::vector<std::string> ns) : names(std::move(ns)) {
    for (std::size_t i = 0; i < names.size(); ++i)
      index[names[i]] = static_cast<std::uint8_t>(i);
  }
  RelSet set(std::initializer_list<const char*> rels) const {
    RelSet s = 0;
    for (const char* r : rels) s |= RelSet{1} << index.at(r);
    return s;
  }
};

const ConstraintSystemDef* build_allen() {
  TableBuilder b({"before", "after", "meets", "met-by", "overlaps", "overlapped-by",
                  "starts", "started-by", "during", "contains", "finishes", "finished-by",
                  "equals"});
  std::vector<std::uint8_t> conv = {1, 0, 3, 2, 5, 4, 7, 6, 9, 8, 11, 10, 12};
  // Derived by exhaustive enumeration of endpoint weak orders.
  std::vector<std::vector<RelSet>> comp;
  auto all = [&] { return b.set({"before", "after", "meets", "met-by", "overlaps",
                                 "overlapped-by", "starts", "started-by", "during",
                                 "contains", "finishes", "finished-by", "equals"}); };
  comp = {
      // before , *
      {b.set({"before"}), all(), b.set({"before"}),
       b.set({"before", "meets", "overlaps", "starts", "during"}), b.set({"before"}),
       b.set({"before", "meets", "overlaps", "starts", "during"}), b.set({"before"}),
       b.set({"before"}), b.set({"before", "meets", "overlaps", "starts", "during"}),
       b.set({"before"}), b.set({"before", "meets", "overlaps", "starts", "during"}),
       b.set({"before"}), b.set({"before"})},
      // after , *
      {all(), b.set({"after"}), b.set({"after", "met-by", "overlapped-by", "during", "finishes"}),
       b.set({"after"}), b.set({"after", "met-by", "overlapped-by", "during", "finishes"}),
       b.set({"after"}), b.set({"after", "met-by", "overlapped-by", "during", "finishes"}),
       b.set({"after"}), b.set({"after", "met-by", "overlapped-by", "during", "finishes"}),
       b.set({"after"}), b.set({"after"}), b.set({"after"}), b.set({"after"})},
      // meets , *
      {b.set({"before"}), b.set({"after", "met-by", "overlapped-by", "started-by", "contains"}),
       b.set({"before"}), b.set({"finishes", "finished-by", "equals"}), b.set({"before"}),
       b.set({"overlaps", "starts", "during"}), b.set({"meets"}), b.set({"meets"}),
       b.set({"overlaps", "starts", "during"}), b.set({"before"}),
       b.set({"overlaps", "starts", "during"}), b.set({"before"}), b.set({"meets"})},
      // met-by , *
      {b.set({"before", "meets", "overlaps", "contains", "finished-by"}), b.set({"after"}),
       b.set({"starts", "started-by", "equals"}), b.set({"after"}),
       b.set({"overlapped-by", "during", "finishes"}), b.set({"after"}),
       b.set({"overlapped-by", "during", "finishes"}), b.set({"after"}),
       b.set({"overlapped-by", "during", "finishes"}), b.set({"after"}), b.set({"met-by"}),
       b.set({"met-by"}), b.set({"met-by"})},
      // overlaps , *
      {b.set({"before"}), b.set({"after", "met-by", "overlapped-by", "started-by", "contains"}),
       b.set({"before"}), b.set({"overlapped-by", "started-by", "contains"}),
       b.set({"before", "meets", "overlaps"}),
       b.set({"overlaps", "overlapped-by", "starts", "started-by", "during", "contains",
              "finishes", "finished-by", "equals"}),
       b.set({"overlaps"}), b.set({"overlaps", "contains", "finished-by"}),
       b.set({"overlaps", "starts", "during"}),
       b.set({"before", "meets", "overlaps", "contains", "finished-by"}),
       b.set({"overlaps", "starts", "during"}), b.set({"before", "meets", "overlaps"}),
       b.set({"overlaps"})},
      // overlapped-by , *
      {b.set({"before", "meets", "overlaps", "contains", "finished-by"}), b.set({"after"}),
       b.set({"overlaps", "contains", "finished-by"}), b.set({"after"}),
       b.set({"overlaps", "overlapped-by", "starts", "started-by", "during", "contains",
              "finishes", "finished-by", "equals"}),
       b.set({"after", "met-by", "overlapped-by"}),
       b.set({"overlapped-by", "during", "finishes"}), b.set({"after", "met-by", "overlapped-by"}),
       b.set({"overlapped-by", "during", "finishes"}),
       b.set({"after", "met-by", "overlapped-by", "started-by", "contains"}),
       b.set({"overlapped-by"}), b.set({"overlapped-by", "started-by", "contains"}),
       b.set({"overlapped-by"})},
      // starts , *
      {b.set({"before"}), b.set({"after"}), b.set({"before"}), b.set({"met-by"}),
       b.set({"before", "meets", "overlaps"}), b.set({"overlapped-by", "during", "finishes"}),
       b.set({"starts"}), b.set({"starts", "started-by", "equals"}), b.set({"during"}),
       b.set({"before", "meets", "overlaps", "contains", "finished-by"}), b.set({"during"}),
       b.set({"before", "meets", "overlaps"}), b.set({"starts"})},
      // started-by , *
      {b.set({"before", "meets", "overlaps", "contains", "finished-by"}), b.set({"after"}),
       b.set({"overlaps", "contains", "finished-by"}), b.set({"met-by"}),
       b.set({"overlaps", "contains", "finished-by"}), b.set({"overlapped-by"}),
       b.set({"starts", "started-by", "equals"}), b.set({"started-by"}),
       b.set({"overlapped-by", "during", "finishes"}), b.set({"contains"}),
       b.set({"overlapped-by"}), b.set({"contains"}), b.set({"started-by"})},
      // during , *
      {b.set({"before"}), b.set({"after"}), b.set({"before"}), b.set({"after"}),
       b.set({"before", "meets", "overlaps", "starts", "during"}),
       b.set({"after", "met-by", "overlapped-by", "during", "finishes"}), b.set({"during"}),
       b.set({"after", "met-by", "overlapped-by", "during", "finishes"}), b.set({"during"}),
       all(), b.set({"during"}), b.set({"before", "meets", "overlaps", "starts", "during"}),
       b.set({"during"})},
      // contains , *
      {b.set({"before", "meets", "overlaps", "contains", "finished-by"}),
       b.set({"after", "met-by", "overlapped-by", "started-by", "contains"}),
       b.set({"overlaps", "contains", "finished-by"}),
       b.set({"overlapped-by", "started-by", "contains"}),
       b.set({"overlaps", "contains", "finished-by"}),
       b.set({"overlapped-by", "started-by", "contains"}),
       b.set({"overlaps", "contains", "finished-by"}), b.set({"contains"}),
       b.set({"overlaps", "overlapped-by", "starts", "started-by", "during", "contains",
              "finishes", "finished-by", "equals"}),
       b.set({"contains"}), b.set({"overlapped-by", "started-by", "contains"}),
       b.set({"contains"}), b.set({"contains"})},
      // finishes , *
      {b.set({"before"}), b.set({"after"}), b.set({"meets"}), b.set({"after"}),
       b.set({"overlaps", "starts", "during"}), b.set({"after", "met-by", "overlapped-by"}),
       b.set({"during"}), b.set({"after", "met-by", "overlapped-by"}), b.set({"during"}),
       b.set({"after", "met-by", "overlapped-by", "started-by", "contains"}),
       b.set({"finishes"}), b.set({"finishes", "finished-by", "equals"}), b.set({"finishes"})},
      // finished-by , *
      {b.set({"before"}), b.set({"after", "met-by", "overlapped-by", "started-by", "contains"}),
       b.set({"meets"}), b.set({"overlapped-by", "started-by", "contains"}),
       b.set({"overlaps"}), b.set({"overlapped-by", "started-by", "contains"}),
       b.set({"overlaps"}), b.set({"contains"}), b.set({"overlaps", "starts", "during"}),
       b.set({"contains"}), b.set({"finishes", "finished-by", "equals"}),
       b.set({"finished-by"}), b.set({"finished-by"})},
      // equals , *
      {b.set({"before"}), b.set({"after"}), b.set({"meets"}), b.set({"met-by"}),
       b.set({"overlaps"}), b.set({"overlapped-by"}), b.set({"starts"}), b.set({"started-by"}),
       b.set({"during"}), b.set({"contains"}), b.set({"finishes"}), b.set({"finished-by"}),
       b.set({"equals"})},
  };
  return new ConstraintSystemDef("allen", b.names, conv, comp, b.index.at("equals"));
}

const ConstraintSystemDef* build_rcc8() {
  TableBuilder b({"dc", "ec", "po", "tpp", "ntpp", "tppi", "ntppi", "eq"});
  std::vector<std::uint8_t> conv = {0, 1, 2, 5, 6, 3, 4, 7};
  auto all = [&] { return b.set({"dc", "ec", "po", "tpp", "ntpp", "tppi", "ntppi", "eq"}); };
  std::vector<std::vector<RelSet>> comp = {
      // dc , *
      {all(), b.set({"dc", "ec", "po", "tpp", "ntpp"}), b.set({"dc", "ec", "po", "tpp", "ntpp"}),
       b.set({"dc", "ec", "po", "tpp", "ntpp"}), b.set({"dc", "ec", "po", "tpp", "ntpp"}),
       b.set({"dc"}), b.set({"dc"}), b.set({"dc"})},
      // ec , *
      {b.set({"dc", "ec", "po", "tppi", "ntppi"}), b.set({"dc", "ec", "po", "tpp", "tppi", "eq"}),
       b.set({"dc", "ec", "po", "tpp", "ntpp"}), b.set({"ec", "po", "tpp", "ntpp"}),
       b.set({"po", "tpp", "ntpp"}), b.set({"dc", "ec"}), b.set({"dc"}), b.set({"ec"})},
      // po , *
      {b.set({"dc", "ec", "po", "tppi", "ntppi"}), b.set({"dc", "ec", "po", "tppi", "ntppi"}),
       all(), b.set({"po", "tpp", "ntpp"}), b.set({"po", "tpp", "ntpp"}),
       b.set({"dc", "ec", "po", "tppi", "ntppi"}), b.set({"dc", "ec", "po", "tppi", "ntppi"}),
       b.set({"po"})},
      // tpp , *
      {b.set({"dc"}), b.set({"dc", "ec"}), b.set({"dc", "ec", "po", "tpp", "ntpp"}),
       b.set({"tpp", "ntpp"}), b.set({"ntpp"}), b.set({"dc", "ec", "po", "tpp", "tppi", "eq"}),
       b.set({"dc", "ec", "po", "tppi", "ntppi"}), b.set({"tpp"})},
      // ntpp , *
      {b.set({"dc"}), b.set({"dc"}), b.set({"dc", "ec", "po", "tpp", "ntpp"}),
       b.set({"ntpp"}), b.set({"ntpp"}), b.set({"dc", "ec", "po", "tpp", "ntpp"}), all(),
       b.set({"ntpp"})},
      // tppi , *
      {b.set({"dc", "ec", "po", "tppi", "ntppi"}), b.set({"ec", "po", "tppi", "ntppi"}),
       b.set({"po", "tppi", "ntppi"}), b.set({"po", "tpp", "tppi", "eq"}),
       b.set({"po", "tpp", "ntpp"}), b.set({"tppi", "ntppi"}), b.set({"ntppi"}), b.set({"tppi"})},
      // ntppi , *
      {b.set({"dc", "ec", "po", "tppi", "ntppi"}), b.set({"po", "tppi", "ntppi"}),
       b.set({"po", "tppi", "ntppi"}), b.set({"po", "tppi", "ntppi"}),
       b.set({"po", "tpp", "ntpp", "tppi", "ntppi", "eq"}), b.set({"ntppi"}), b.set({"ntppi"}),
       b.set({"ntppi"})},
      // eq , *
      {b.set({"dc"}), b.set({"ec"}), b.set({"po"}), b.set({"tpp"}), b.set({"ntpp"}),
       b.set({"tppi"}), b.set({"ntppi"}), b.set({"eq"})},
  };
  return new ConstraintSystemDef("rcc8", b.names, conv, comp, b.index.at("eq"));
}

const ConstraintSystemDef* build_point() {
  TableBuilder b({"lt", "eq", "gt"});
  std::vector<std::uint8_t> conv = {2, 1, 0};
  auto all = [&] { return b.set({"lt", "eq", "gt"}); };
  std::vector<std::vector<RelSet>> comp = {
      {b.set({"lt"}), b.set({"lt"}), all()},
      {b.set({"lt"}), b.set({"eq"}), b.set({"gt"})},
      {all(), b.set({"gt"}), b.set({"gt"})},
  };
  return new ConstraintSystemDef("point", b.names, conv, comp, b.index.at("eq"));
}

}  // namespace

const ConstraintSystemDef& ConstraintSystemDef::allen() {
  static const ConstraintSystemDef* sys = build_allen();
  return *sys;
}
const ConstraintSystemDef& ConstraintSystemDef::rcc8() {
  static const ConstraintSystemDef* sys = build_rcc8();
  return *sys;
}
const ConstraintSystemDef& ConstraintSystemDef::point() {
  static const ConstraintSystemDef* sys = build_point();
  return *sys;
}

const ConstraintSystemDef* ConstraintSystemDef::by_name(const std::string& name) {
  if (name == "allen") return &allen();
  if (name == "rcc8") return &rcc8();
  if (name == "point") return &point();
  return nullptr;
}

ConstraintSystemDef ConstraintSystemDef::from_tsv(std::istream& in, const std::string& name) {
  std::vector<std::string> names;
  std::map<std::string, std::uint8_t> index;
  auto intern = [&](const std::string& r) -> std::uint8_t {
    auto it = index.find(r);
    if (it != index.end()) return it->second;
    if (names.size() >= 64) throw ConstraintError("too many base relations in TSV");
    names.push_back(r);
    index[r] = static_cast<std::uint8_t>(names.size() - 1);
    return index[r];
  };
  std::vector<std::tuple<std::string, std::string, std::vector<std::string>>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string a, c, result;
    if (!std::getline(ls, a, '\t') || !std::getline(ls, c, '\t') || !std::getline(ls, result))
      throw ConstraintError("malformed TSV line: " + line);
    std::vector<std::string> rs;
    std::istringstream res(result);
    std::string item;
    while (std::getline(res, item, ',')) {
      if (!item.empty()) rs.push_back(item);
    }
    intern(a);
    intern(c);
    for (const auto& r : rs) intern(r);
    rows.emplace_back(a, c, rs);
  }
  if (!index.count("eq")) throw ConstraintError("TSV system must define relation 'eq'");
  const std::size_t k = names.size();
  std::vector<std::vector<RelSet>> comp(k, std::vector<RelSet>(k, 0));
  std::vector<std::vector<bool>> given(k, std::vector<bool>(k, false));
  for (const auto& [a, c, rs] : rows) {
    RelSet s = 0;
    for (const auto& r : rs) s |= RelSet{1} << index.at(r);
    comp[index.at(a)][index.at(c)] = s;
    given[index.at(a)][index.at(c)] = true;
  }
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j)
      if (!given[i][j])
        throw ConstraintError("TSV composition table not total: missing " + names[i] + " x " +
                              names[j]);
  // conv(r) is the unique s with eq in comp(r, s).
  std::uint8_t eq = index.at("eq");
  std::vector<std::uint8_t> conv(k, 0);
  for (std::size_t r = 0; r < k; ++r) {
    int found = -1;
    for (std::size_t s = 0; s < k; ++s)
      if (comp[r][s] & (RelSet{1} << eq)) {
        if (found >= 0) throw ConstraintError("TSV converse ambiguous for " + names[r]);
        found = static_cast<int>(s);
      }
    if (found < 0) throw ConstraintError("TSV converse undefined for " + names[r]);
    conv[r] = static_cast<std::uint8_t>(found);
  }
  return ConstraintSystemDef(name, names, conv, comp, eq);
}

// ---------------------------------------------------------------------------
// RelNetwork

void RelNetwork::remove_variable(std::uint32_t v) {
  vars_.erase(v);
  for (auto it = labels_.begin(); it != labels_.end();) {
    if (it->first.first == v || it->first.second == v)
      it = labels_.erase(it);
    else
      ++it;
  }
}

void RelNetwork::constrain(const ConstraintSystemDef& sys, std::uint32_t a, std::uint32_t b,
                           RelSet rel) {
  if (a == b) {
    // Self-pairs are not stored; anything not covering identity is a conflict.
    vars_.insert(a);
    if (!(rel & sys.singleton(sys.identity()))) inconsistent_ = true;
    return;
  }
  vars_.insert(a);
  vars_.insert(b);
  std::pair<std::uint32_t, std::uint32_t> key{std::min(a, b), std::max(a, b)};
  RelSet oriented = (a < b) ? rel : sys.converse_set(rel);
  auto it = labels_.find(key);
  if (it == labels_.end()) {
    labels_[key] = oriented & sys.universal_set();
    if (labels_[key] == 0) inconsistent_ = true;
  } else {
    it->second &= oriented;
    if (it->second == 0) inconsistent_ = true;
  }
}

RelSet RelNetwork::label(const ConstraintSystemDef& sys, std::uint32_t a, std::uint32_t b) const {
  if (a == b) return sys.singleton(sys.identity());
  auto it = labels_.find({std::min(a, b), std::max(a, b)});
  if (it == labels_.end()) return sys.universal_set();
  return (a < b) ? it->second : sys.converse_set(it->second);
}

bool RelNetwork::has_constraint(std::uint32_t a, std::uint32_t b) const {
  return labels_.count({std::min(a, b), std::max(a, b)}) != 0;
}

bool RelNetwork::complete(const ConstraintSystemDef& sys) const {
  for (auto i = vars_.begin(); i != vars_.end(); ++i) {
    auto j = i;
    for (++j; j != vars_.end(); ++j) {
      auto it = labels_.find({*i, *j});
      if (it == labels_.end()) return false;
      if (std::popcount(it->second) != 1) return false;
    }
  }
  (void)sys;
  return true;
}

void RelNetwork::rename_variable(const ConstraintSystemDef& sys, std::uint32_t from,
                                 std::uint32_t into) {
  if (from == into || !vars_.count(from)) return;
  std::map<std::pair<std::uint32_t, std::uint32_t>, RelSet> moved;
  for (auto it = labels_.begin(); it != labels_.end();) {
    auto [x, y] = it->first;
    if (x == from || y == from) {
      std::uint32_t nx = (x == from) ? into : x;
      std::uint32_t ny = (y == from) ? into : y;
      // Oriented label from x's perspective, re-expressed for (nx, ny).
      RelSet lbl = it->second;  // oriented (x, y) with x < y
      it = labels_.erase(it);
      if (nx == ny) {
        if (!(lbl & sys.singleton(sys.identity()))) inconsistent_ = true;
        continue;
      }
      // lbl reads left-to-right as (x, y); after renaming it reads (nx, ny).
      std::pair<std::uint32_t, std::uint32_t> key{std::min(nx, ny), std::max(nx, ny)};
      RelSet oriented = (key.first == nx) ? lbl : sys.converse_set(lbl);
      auto jt = moved.find(key);
      if (jt == moved.end())
        moved[key] = oriented;
      else {
        jt->second &= oriented;
      }
    } else {
      ++it;
    }
  }
  for (const auto& [key, lbl] : moved) {
    auto jt = labels_.find(key);
    if (jt == labels_.end())
      labels_[key] = lbl;
    else
      jt->second &= lbl;
    if (labels_[key] == 0) inconsistent_ = true;
  }
  vars_.erase(from);
  vars_.insert(into);
}

RelNetwork RelNetwork::restricted_to(const std::set<std::uint32_t>& vs) const {
  RelNetwork out;
  for (std::uint32_t v : vs)
    if (vars_.count(v)) out.vars_.insert(v);
  for (const auto& [key, lbl] : labels_)
    if (out.vars_.count(key.first) && out.vars_.count(key.second)) out.labels_[key] = lbl;
  out.inconsistent_ = inconsistent_;
  return out;
}

RelNetwork RelNetwork::merge_networks(const ConstraintSystemDef& sys, const RelNetwork& a,
                                      const RelNetwork& b) {
  RelNetwork out = a;
  for (std::uint32_t v : b.vars_) out.vars_.insert(v);
  for (const auto& [key, lbl] : b.labels_) out.constrain(sys, key.first, key.second, lbl);
  out.inconsistent_ = out.inconsistent_ || b.inconsistent_;
  return out;
}

// ---------------------------------------------------------------------------
// Satisfiability

namespace {

// Path-consistency refinement over a dense label matrix. Returns false when
// some label empties.
struct DenseNet {
  const ConstraintSystemDef& sys;
  std::vector<std::uint32_t> vars;
  std::vector<RelSet> m;  // n x n, oriented
  std::size_t n;

  DenseNet(const ConstraintSystemDef& s, const RelNetwork& net) : sys(s) {
    vars.assign(net.variables().begin(), net.variables().end());
    n = vars.size();
    m.assign(n * n, sys.universal_set());
    for (std::size_t i = 0; i < n; ++i) m[i * n + i] = sys.singleton(sys.identity());
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (i != j) m[i * n + j] = net.label(sys, vars[i], vars[j]);
  }

  RelSet& at(std::size_t i, std::size_t j) { return m[i * n + j]; }

  bool propagate() {
    bool changed = true;
    while (changed) {
      changed = false;
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
          if (i == j) continue;
          for (std::size_t k = 0; k < n; ++k) {
            if (k == i || k == j) continue;
            RelSet refined = at(i, j) & sys.compose_sets(at(i, k), at(k, j));
            if (refined != at(i, j)) {
              if (refined == 0) return false;
              at(i, j) = refined;
              at(j, i) = sys.converse_set(refined);
              changed = true;
            }
          }
          if (at(i, j) == 0) return false;
        }
    }
    return true;
  }

  // Backtracking search for an atomic path-consistent scenario; stops at
  // the first one. `on_solution`, when set, receives the solved matrix.
  bool search(const std::function<void(const DenseNet&)>* on_solution) {
    if (!propagate()) return false;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) {
        RelSet lbl = at(i, j);
        if (std::popcount(lbl) > 1) {
          for (std::size_t r = 0; r < sys.arity(); ++r) {
            if (!(lbl & (RelSet{1} << r))) continue;
            DenseNet copy = *this;
            copy.at(i, j) = RelSet{1} << r;
            copy.at(j, i) = sys.converse_set(RelSet{1} << r);
            if (copy.search(on_solution)) return true;
          }
          return false;
        }
      }
    if (on_solution) (*on_solution)(*this);
    return true;
  }
};

}  // namespace

bool is_satisfiable(const ConstraintSystemDef& sys, const RelNetwork& n) {
  if (n.inconsistent()) return false;
  for (const auto& [key, lbl] : n.stored())
    if ((lbl & ~sys.universal_set()) != 0)
      throw UnknownRelationError("label uses relations outside system " + sys.name());
  if (n.variables().size() <= 1) return true;
  DenseNet d(sys, n);
  return d.search(nullptr);
}

std::optional<RelNetwork> solve_scenario(const ConstraintSystemDef& sys, const RelNetwork& n) {
  if (n.inconsistent()) return std::nullopt;
  DenseNet d(sys, n);
  RelNetwork out;
  bool found = false;
  std::function<void(const DenseNet&)> collect = [&](const DenseNet& sol) {
    found = true;
    for (std::uint32_t v : n.variables()) out.add_variable(v);
    for (std::size_t i = 0; i < sol.n; ++i)
      for (std::size_t j = i + 1; j < sol.n; ++j)
        out.constrain(sys, sol.vars[i], sol.vars[j], sol.m[i * sol.n + j]);
  };
  d.search(&collect);
  if (!found) return std::nullopt;
  return out;
}

std::vector<RelNetwork> enumerate_completions(const ConstraintSystemDef& sys, const RelNetwork& n,
                                              const std::set<std::uint32_t>& vars) {
  std::vector<RelNetwork> out;
  RelNetwork base = n.restricted_to(vars);
  for (std::uint32_t v : vars) base.add_variable(v);
  if (base.inconsistent()) return out;
  std::vector<std::uint32_t> vs(vars.begin(), vars.end());
  // Assign singleton labels pair-by-pair in lexicographic order; prune with
  // a satisfiability check on partially assigned networks.
  std::vector<std::pair<std::uint32_t, std::uint32_t>> pairs;
  for (std::size_t i = 0; i < vs.size(); ++i)
    for (std::size_t j = i + 1; j < vs.size(); ++j) pairs.emplace_back(vs[i], vs[j]);
  std::function<void(std::size_t, RelNetwork&)> rec = [&](std::size_t idx, RelNetwork& cur) {
    if (idx == pairs.size()) {
      if (is_satisfiable(sys, cur)) out.push_back(cur);
      return;
    }
    auto [a, b] = pairs[idx];
    RelSet lbl = cur.label(sys, a, b);
    for (std::size_t r = 0; r < sys.arity(); ++r) {
      if (!(lbl & (RelSet{1} << r))) continue;
      RelNetwork next = cur;
      next.constrain(sys, a, b, RelSet{1} << r);
      if (!next.inconsistent() && is_satisfiable(sys, next)) rec(idx + 1, next);
    }
  };
  rec(0, base);
  return out;
}

RelNetwork merge_variable(const ConstraintSystemDef& sys, const RelNetwork& n, std::uint32_t from,
                          std::uint32_t into) {
  if (from == into) throw PreconditionViolatedError("merge_variable: from == into");
  RelNetwork out = n;
  out.rename_variable(sys, from, into);
  if (out.inconsistent() && !n.inconsistent())
    throw EmptyLabelError("merge_variable: empty label after intersection");
  return out;
}

bool check_patchwork_instance(const ConstraintSystemDef& sys, const RelNetwork& m,
                              const RelNetwork& n) {
  std::set<std::uint32_t> shared;
  for (std::uint32_t v : m.variables())
    if (n.has_variable(v)) shared.insert(v);
  RelNetwork im = m.restricted_to(shared);
  RelNetwork in_ = n.restricted_to(shared);
  if (!im.complete(sys) || !in_.complete(sys) || !(im == in_))
    throw PreconditionViolatedError(
        "check_patchwork_instance: intersections must be complete and equal");
  if (!is_satisfiable(sys, m) || !is_satisfiable(sys, n))
    throw PreconditionViolatedError("check_patchwork_instance: inputs must be satisfiable");
  return is_satisfiable(sys, RelNetwork::merge_networks(sys, m, n));
}

}  // namespace sroiqc
