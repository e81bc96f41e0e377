#include "ngcp/catalog.hpp"

#include <algorithm>
#include <functional>
#include <optional>
#include <sstream>

namespace ngcp {

namespace {

constexpr EnumTable<Originator, 3> kOriginators{{
    {Originator::ThreeGPP, "3GPP"},
    {Originator::FiveGSpecific, "5G-specific"},
    {Originator::Unattributed, "unattributed"},
}};
constexpr EnumTable<FunctionalDomain, 8> kDomains{{
    {FunctionalDomain::Access, "Access"},
    {FunctionalDomain::Connectivity, "Connectivity"},
    {FunctionalDomain::Mobility, "Mobility"},
    {FunctionalDomain::Security, "Security"},
    {FunctionalDomain::FlowControl, "FlowControl"},
    {FunctionalDomain::Context, "Context"},
    {FunctionalDomain::Charging, "Charging"},
    {FunctionalDomain::Policy, "Policy"},
}};
constexpr EnumTable<Placement, 3> kPlacements{{
    {Placement::Edge, "Edge"}, {Placement::Core, "Core"}, {Placement::Either, "Either"}}};
constexpr EnumTable<Reusability, 2> kReusability{{
    {Reusability::MultiService, "MultiService"}, {Reusability::ServiceSpecific, "ServiceSpecific"}}};
constexpr EnumTable<Optionality, 2> kOptionality{{
    {Optionality::AllUseCases, "AllUseCases"}, {Optionality::UseCaseSpecific, "UseCaseSpecific"}}};
constexpr EnumTable<EvolutionCycle, 2> kEvolution{{
    {EvolutionCycle::Fast, "Fast"}, {EvolutionCycle::Slow, "Slow"}}};
constexpr EnumTable<SeparationCriterion, 4> kCriteria{{
    {SeparationCriterion::Placement, "Placement"},
    {SeparationCriterion::Reusability, "Reusability"},
    {SeparationCriterion::Optionality, "Optionality"},
    {SeparationCriterion::EvolutionCycle, "EvolutionCycle"},
}};

template <class E, std::size_t N>
E require_enum(const Record& rec, std::string_view key, const EnumTable<E, N>& table) {
  const auto* v = rec.find(key);
  if (v == nullptr || v->empty())
    throw MissingAttributeError(rec.where() + ": sf '" + rec.get_or("id", "?") +
                                "' has no '" + std::string(key) + "' attribute");
  E out{};
  if (!enum_parse(table, *v, out))
    throw SchemaError(rec.where() + ": bad value '" + *v + "' for '" + std::string(key) + "'");
  return out;
}

bool placement_conflict(Placement a, Placement b) {
  return (a == Placement::Edge && b == Placement::Core) || (a == Placement::Core && b == Placement::Edge);
}

using Partition = std::vector<std::vector<std::string>>;

Partition canonical(Partition blocks) {
  for (auto& b : blocks) std::sort(b.begin(), b.end());
  std::sort(blocks.begin(), blocks.end());
  return blocks;
}

// Branch and bound over domain-pure, constraint-respecting partitions.
class GroupingSearch {
 public:
  GroupingSearch(const SfCatalog& catalog, const std::set<SeparationConstraint>& constraints,
                 const std::vector<ProcedureSpec>& procedures) {
    for (const auto& sf : catalog.sfs()) order_.push_back(&sf);
    std::stable_sort(order_.begin(), order_.end(), [](const SfDescriptor* a, const SfDescriptor* b) {
      return a->domain < b->domain;
    });
    n_ = order_.size();
    std::map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < n_; ++i) index[order_[i]->sf_id] = i;

    conflict_.assign(n_, std::vector<bool>(n_, false));
    for (const auto& c : constraints) {
      auto a = index.find(c.sf_a);
      auto b = index.find(c.sf_b);
      if (a == index.end() || b == index.end()) continue;
      conflict_[a->second][b->second] = conflict_[b->second][a->second] = true;
    }

    neighbours_.resize(n_);
    std::set<std::pair<std::size_t, std::size_t>> edges;
    for (const auto& p : procedures) {
      for (const auto& s : p.steps) {
        auto a = index.find(s.producer);
        auto b = index.find(s.consumer);
        if (a == index.end() || b == index.end())
          throw UnassignedSfError("procedure '" + p.procedure_id + "' references SF outside the catalog");
        if (a->second == b->second) continue;
        edges.insert(std::minmax(a->second, b->second));
      }
    }
    for (auto [a, b] : edges) {
      neighbours_[a].push_back(b);
      neighbours_[b].push_back(a);
      auto da = static_cast<int>(order_[a]->domain);
      auto db = static_cast<int>(order_[b]->domain);
      if (da != db) communicating_domains_.insert(std::minmax(da, db));
    }

    remaining_in_domain_.assign(kDomainCount, 0);
    for (const auto* sf : order_) ++remaining_in_domain_[static_cast<int>(sf->domain)];
    blocks_in_domain_.assign(kDomainCount, 0);
    assignment_.assign(n_, -1);
  }

  Partition solve() {
    recurse(0);
    if (!best_) throw InfeasibleGroupingError("no partition satisfies the separation constraints");
    return best_->blocks;
  }

 private:
  static constexpr int kDomainCount = 8;

  struct Best {
    int score;
    int bbs;
    Partition blocks;
  };

  int score_lower_bound() const {
    int uncovered = 0;
    for (auto [a, b] : communicating_domains_)
      if (covered_domains_.count({a, b}) == 0 || covered_domains_.at({a, b}) == 0) ++uncovered;
    return score_ + uncovered;
  }

  int bb_lower_bound() const {
    int lb = static_cast<int>(blocks_.size());
    for (int d = 0; d < kDomainCount; ++d)
      if (blocks_in_domain_[d] == 0 && remaining_in_domain_[d] > 0) ++lb;
    return lb;
  }

  bool pruned() const {
    if (!best_) return false;
    int s = score_lower_bound();
    if (s != best_->score) return s > best_->score;
    return bb_lower_bound() > best_->bbs;
  }

  void recurse(std::size_t i) {
    if (pruned()) return;
    if (i == n_) {
      Partition p;
      for (const auto& b : blocks_) {
        std::vector<std::string> ids;
        for (auto m : b.members) ids.push_back(order_[m]->sf_id);
        p.push_back(std::move(ids));
      }
      p = canonical(std::move(p));
      int bbs = static_cast<int>(blocks_.size());
      if (!best_ || score_ < best_->score || (score_ == best_->score && bbs < best_->bbs) ||
          (score_ == best_->score && bbs == best_->bbs && p < best_->blocks))
        best_ = Best{score_, bbs, std::move(p)};
      return;
    }
    auto domain = order_[i]->domain;
    int d = static_cast<int>(domain);
    --remaining_in_domain_[d];
    for (std::size_t b = 0; b < blocks_.size(); ++b) {
      if (blocks_[b].domain != domain) continue;
      bool ok = std::none_of(blocks_[b].members.begin(), blocks_[b].members.end(),
                             [&](std::size_t m) { return conflict_[i][m]; });
      if (!ok) continue;
      place(i, b);
      recurse(i + 1);
      unplace(i, b);
    }
    blocks_.push_back(Block{domain, {}});
    ++blocks_in_domain_[d];
    place(i, blocks_.size() - 1);
    recurse(i + 1);
    unplace(i, blocks_.size() - 1);
    --blocks_in_domain_[d];
    blocks_.pop_back();
    ++remaining_in_domain_[d];
  }

  void bump_pair(std::size_t b1, std::size_t b2, int delta) {
    auto key = std::minmax(b1, b2);
    int& count = pair_edges_[key];
    int before = count;
    count += delta;
    if (before == 0 && count > 0) {
      ++score_;
      bump_domains(b1, b2, +1);
    } else if (before > 0 && count == 0) {
      --score_;
      bump_domains(b1, b2, -1);
    }
  }

  void bump_domains(std::size_t b1, std::size_t b2, int delta) {
    int d1 = static_cast<int>(blocks_[b1].domain);
    int d2 = static_cast<int>(blocks_[b2].domain);
    if (d1 == d2) return;
    covered_domains_[std::minmax(d1, d2)] += delta;
  }

  void place(std::size_t i, std::size_t b) {
    assignment_[i] = static_cast<int>(b);
    blocks_[b].members.push_back(i);
    for (auto j : neighbours_[i]) {
      if (assignment_[j] < 0 || static_cast<std::size_t>(assignment_[j]) == b) continue;
      bump_pair(b, static_cast<std::size_t>(assignment_[j]), +1);
    }
  }

  void unplace(std::size_t i, std::size_t b) {
    for (auto j : neighbours_[i]) {
      if (assignment_[j] < 0 || static_cast<std::size_t>(assignment_[j]) == b) continue;
      bump_pair(b, static_cast<std::size_t>(assignment_[j]), -1);
    }
    blocks_[b].members.pop_back();
    assignment_[i] = -1;
  }

  struct Block {
    FunctionalDomain domain;
    std::vector<std::size_t> members;
  };

  std::vector<const SfDescriptor*> order_;
  std::size_t n_ = 0;
  std::vector<std::vector<bool>> conflict_;
  std::vector<std::vector<std::size_t>> neighbours_;
  std::set<std::pair<int, int>> communicating_domains_;
  std::map<std::pair<int, int>, int> covered_domains_;
  std::map<std::pair<std::size_t, std::size_t>, int> pair_edges_;
  std::vector<int> remaining_in_domain_;
  std::vector<int> blocks_in_domain_;
  std::vector<int> assignment_;
  std::vector<Block> blocks_;
  int score_ = 0;
  std::optional<Best> best_;
};

}  // namespace

std::string_view to_string(Originator v) { return enum_name(kOriginators, v); }
std::string_view to_string(FunctionalDomain v) { return enum_name(kDomains, v); }
std::string_view to_string(Placement v) { return enum_name(kPlacements, v); }
std::string_view to_string(Reusability v) { return enum_name(kReusability, v); }
std::string_view to_string(Optionality v) { return enum_name(kOptionality, v); }
std::string_view to_string(EvolutionCycle v) { return enum_name(kEvolution, v); }
std::string_view to_string(SeparationCriterion v) { return enum_name(kCriteria, v); }
bool parse_domain(std::string_view s, FunctionalDomain& out) { return enum_parse(kDomains, s, out); }

std::string_view to_string(RefinementAction v) {
  switch (v) {
    case RefinementAction::Accept: return "Accept";
    case RefinementAction::RevisitStep3: return "RevisitStep3";
    case RefinementAction::RevisitStep1: return "RevisitStep1";
  }
  return "?";
}

std::string_view domain_bb_name(FunctionalDomain d) {
  switch (d) {
    case FunctionalDomain::Access: return "AF";
    case FunctionalDomain::Connectivity: return "CM";
    case FunctionalDomain::Mobility: return "MM";
    case FunctionalDomain::Security: return "SAM";
    case FunctionalDomain::FlowControl: return "FM";
    case FunctionalDomain::Context: return "CGHF";
    case FunctionalDomain::Charging: return "CHG";
    case FunctionalDomain::Policy: return "POL";
  }
  return "?";
}

SeparationConstraint::SeparationConstraint(std::string a, std::string b, SeparationCriterion c)
    : criterion(c) {
  if (a > b) std::swap(a, b);
  sf_a = std::move(a);
  sf_b = std::move(b);
}

SfCatalog::SfCatalog(std::vector<SfDescriptor> sfs, std::vector<ProcedureSpec> procedures)
    : sfs_(std::move(sfs)), procedures_(std::move(procedures)) {
  std::sort(sfs_.begin(), sfs_.end(),
            [](const SfDescriptor& a, const SfDescriptor& b) { return a.sf_id < b.sf_id; });
  for (std::size_t i = 1; i < sfs_.size(); ++i)
    if (sfs_[i].sf_id == sfs_[i - 1].sf_id) throw DuplicateSfError("sf_id '" + sfs_[i].sf_id + "' repeated");
  std::set<std::string> seen_procs;
  for (const auto& p : procedures_) {
    if (!seen_procs.insert(p.procedure_id).second)
      throw SchemaError("procedure '" + p.procedure_id + "' defined twice");
    for (const auto& s : p.steps)
      for (const auto* id : {&s.producer, &s.consumer})
        if (find(*id) == nullptr)
          throw SchemaError("procedure '" + p.procedure_id + "' references unknown sf '" + *id + "'");
  }
}

const SfDescriptor* SfCatalog::find(std::string_view sf_id) const {
  auto it = std::lower_bound(sfs_.begin(), sfs_.end(), sf_id,
                             [](const SfDescriptor& d, std::string_view id) { return d.sf_id < id; });
  return (it != sfs_.end() && it->sf_id == sf_id) ? &*it : nullptr;
}

SfCatalog load_catalog(std::string_view text, std::string_view doc) {
  std::vector<SfDescriptor> sfs;
  std::vector<ProcedureSpec> procs;
  std::map<std::string, std::size_t> proc_index;
  for (const auto& rec : parse_records(text, doc)) {
    if (rec.kind == "sf") {
      rec.expect_keys({"id", "name", "description", "originator", "domain", "placement", "reusability",
                       "optionality", "evolution", "note"});
      SfDescriptor sf;
      sf.sf_id = rec.get("id");
      if (sf.sf_id.empty()) throw SchemaError(rec.where() + ": empty sf id");
      sf.name = rec.get_or("name", sf.sf_id);
      sf.description = rec.get_or("description", "");
      sf.originator = require_enum(rec, "originator", kOriginators);
      sf.domain = require_enum(rec, "domain", kDomains);
      sf.placement = require_enum(rec, "placement", kPlacements);
      sf.reusability = require_enum(rec, "reusability", kReusability);
      sf.optionality = require_enum(rec, "optionality", kOptionality);
      sf.evolution = require_enum(rec, "evolution", kEvolution);
      sf.note = rec.get_or("note", "");
      sfs.push_back(std::move(sf));
    } else if (rec.kind == "procedure") {
      rec.expect_keys({"id", "name"});
      ProcedureSpec p;
      p.procedure_id = rec.get("id");
      p.name = rec.get_or("name", p.procedure_id);
      if (proc_index.count(p.procedure_id))
        throw SchemaError(rec.where() + ": procedure '" + p.procedure_id + "' defined twice");
      proc_index[p.procedure_id] = procs.size();
      procs.push_back(std::move(p));
    } else if (rec.kind == "step") {
      rec.expect_keys({"procedure", "from", "to"});
      auto it = proc_index.find(rec.get("procedure"));
      if (it == proc_index.end())
        throw SchemaError(rec.where() + ": step for undeclared procedure '" + rec.get("procedure") + "'");
      procs[it->second].steps.push_back({rec.get("from"), rec.get("to")});
    } else {
      throw SchemaError(rec.where() + ": unknown record kind '" + rec.kind + "'");
    }
  }
  return SfCatalog(std::move(sfs), std::move(procs));
}

std::set<SeparationConstraint> derive_separation_constraints(const SfCatalog& catalog) {
  std::set<SeparationConstraint> out;
  const auto& sfs = catalog.sfs();
  for (std::size_t i = 0; i < sfs.size(); ++i) {
    for (std::size_t j = i + 1; j < sfs.size(); ++j) {
      const auto& a = sfs[i];
      const auto& b = sfs[j];
      if (placement_conflict(a.placement, b.placement))
        out.emplace(a.sf_id, b.sf_id, SeparationCriterion::Placement);
      if (a.reusability != b.reusability) out.emplace(a.sf_id, b.sf_id, SeparationCriterion::Reusability);
      if (a.optionality != b.optionality) out.emplace(a.sf_id, b.sf_id, SeparationCriterion::Optionality);
      if (a.evolution != b.evolution) out.emplace(a.sf_id, b.sf_id, SeparationCriterion::EvolutionCycle);
    }
  }
  return out;
}

std::vector<BbDefinition> group_into_bbs(const SfCatalog& catalog,
                                         const std::set<SeparationConstraint>& constraints) {
  return group_into_bbs(catalog, constraints, catalog.procedures());
}

std::vector<BbDefinition> group_into_bbs(const SfCatalog& catalog,
                                         const std::set<SeparationConstraint>& constraints,
                                         const std::vector<ProcedureSpec>& procedures) {
  if (catalog.size() == 0) return {};
  Partition blocks = GroupingSearch(catalog, constraints, procedures).solve();

  // Name BBs after their domain; split domains get an ordinal suffix.
  std::map<FunctionalDomain, int> per_domain;
  for (const auto& b : blocks) ++per_domain[catalog.find(b.front())->domain];
  std::map<FunctionalDomain, int> seen;
  std::vector<BbDefinition> out;
  for (const auto& b : blocks) {
    auto domain = catalog.find(b.front())->domain;
    BbDefinition def;
    std::string base(domain_bb_name(domain));
    def.name = per_domain[domain] > 1 ? base + "-" + std::to_string(++seen[domain]) : base;
    def.bb_id = "bb-" + def.name;
    std::transform(def.bb_id.begin(), def.bb_id.end(), def.bb_id.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    def.sf_set.insert(b.begin(), b.end());
    def.domains.insert(domain);
    out.push_back(std::move(def));
  }
  return out;
}

GroupingReport evaluate_grouping(const std::vector<BbDefinition>& bbs,
                                 const std::vector<ProcedureSpec>& procedures) {
  std::map<std::string, std::size_t> owner;
  for (std::size_t i = 0; i < bbs.size(); ++i)
    for (const auto& sf : bbs[i].sf_set) owner[sf] = i;

  GroupingReport report;
  std::set<std::pair<std::size_t, std::size_t>> pairs;
  for (const auto& p : procedures) {
    int cross = 0;
    int intra = 0;
    for (const auto& s : p.steps) {
      auto a = owner.find(s.producer);
      auto b = owner.find(s.consumer);
      if (a == owner.end() || b == owner.end())
        throw UnassignedSfError("procedure '" + p.procedure_id + "' step " + s.producer + "->" + s.consumer +
                                " references an SF not assigned to any BB");
      if (a->second == b->second) {
        ++intra;
      } else {
        ++cross;
        pairs.insert(std::minmax(a->second, b->second));
      }
    }
    report.cross_bb[p.procedure_id] = cross;
    report.intra_bb[p.procedure_id] = intra;
  }
  report.total_inter_bb_interfaces = static_cast<int>(pairs.size());
  return report;
}

RefinementDecision refine(const std::vector<BbDefinition>& /*bbs*/, const GroupingReport& report,
                          int threshold) {
  RefinementDecision d;
  bool over = false;
  for (const auto& [proc, cross] : report.cross_bb) {
    if (cross > threshold) over = true;
    if (cross > 2 * threshold) d.offending.push_back(proc);
  }
  if (!d.offending.empty())
    d.action = RefinementAction::RevisitStep1;
  else if (over)
    d.action = RefinementAction::RevisitStep3;
  return d;
}

std::string format_grouping(const std::vector<BbDefinition>& bbs, const GroupingReport& report,
                            const RefinementDecision& decision) {
  std::ostringstream out;
  out << "# BB grouping report\n";
  for (const auto& bb : bbs) {
    Record r;
    r.kind = "bb";
    std::vector<std::string> domains;
    for (auto d : bb.domains) domains.emplace_back(to_string(d));
    r.set("id", bb.bb_id).set("name", bb.name).set("domain", join(domains, ","));
    r.set("size", std::to_string(bb.sf_set.size()));
    r.set("sfs", join(std::vector<std::string>(bb.sf_set.begin(), bb.sf_set.end()), ","));
    out << format_record(r) << "\n";
  }
  for (const auto& [proc, cross] : report.cross_bb) {
    Record r;
    r.kind = "procedure";
    r.set("id", proc).set("cross_bb", std::to_string(cross)).set("intra_bb", std::to_string(report.intra_bb.at(proc)));
    out << format_record(r) << "\n";
  }
  Record t;
  t.kind = "total";
  t.set("inter_bb_interfaces", std::to_string(report.total_inter_bb_interfaces));
  out << format_record(t) << "\n";
  Record d;
  d.kind = "decision";
  d.set("action", std::string(to_string(decision.action)));
  d.set("offending", decision.offending.empty() ? "-" : join(decision.offending, ","));
  out << format_record(d) << "\n";
  return out.str();
}

}  // namespace ngcp
