#pragma once

// Sub-function catalog and the modularization pipeline that groups
// sub-functions (SFs) into building blocks (BBs):
//
//   load_catalog -> derive_separation_constraints -> group_into_bbs
//                -> evaluate_grouping -> refine
//
// Every stage is a pure function of its inputs.

#include <compare>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "ngcp/textrec.hpp"

namespace ngcp {

enum class Originator { ThreeGPP, FiveGSpecific, Unattributed };
enum class FunctionalDomain { Access, Connectivity, Mobility, Security, FlowControl, Context, Charging, Policy };
enum class Placement { Edge, Core, Either };
enum class Reusability { MultiService, ServiceSpecific };
enum class Optionality { AllUseCases, UseCaseSpecific };
enum class EvolutionCycle { Fast, Slow };
enum class SeparationCriterion { Placement, Reusability, Optionality, EvolutionCycle };

std::string_view to_string(Originator v);
std::string_view to_string(FunctionalDomain v);
std::string_view to_string(Placement v);
std::string_view to_string(Reusability v);
std::string_view to_string(Optionality v);
std::string_view to_string(EvolutionCycle v);
std::string_view to_string(SeparationCriterion v);
bool parse_domain(std::string_view s, FunctionalDomain& out);

struct SfDescriptor {
  std::string sf_id;
  std::string name;
  std::string description;
  Originator originator = Originator::Unattributed;
  FunctionalDomain domain = FunctionalDomain::Access;
  Placement placement = Placement::Either;
  Reusability reusability = Reusability::MultiService;
  Optionality optionality = Optionality::AllUseCases;
  EvolutionCycle evolution = EvolutionCycle::Slow;
  std::string note;  // justification for the attribute annotation
};

/// Unordered pair: the constructor normalizes so that sf_a < sf_b.
struct SeparationConstraint {
  std::string sf_a;
  std::string sf_b;
  SeparationCriterion criterion = SeparationCriterion::Placement;

  SeparationConstraint() = default;
  SeparationConstraint(std::string a, std::string b, SeparationCriterion c);

  auto operator<=>(const SeparationConstraint&) const = default;
};

struct ProcedureStep {
  std::string producer;
  std::string consumer;
};

struct ProcedureSpec {
  std::string procedure_id;
  std::string name;
  std::vector<ProcedureStep> steps;
};

struct BbDefinition {
  std::string bb_id;
  std::string name;
  std::set<std::string> sf_set;
  std::set<FunctionalDomain> domains;

  bool operator==(const BbDefinition&) const = default;
};

class SfCatalog {
 public:
  SfCatalog() = default;
  /// Validates invariants; throws DuplicateSfError / SchemaError.
  SfCatalog(std::vector<SfDescriptor> sfs, std::vector<ProcedureSpec> procedures);

  const std::vector<SfDescriptor>& sfs() const { return sfs_; }
  const std::vector<ProcedureSpec>& procedures() const { return procedures_; }
  const SfDescriptor* find(std::string_view sf_id) const;
  std::size_t size() const { return sfs_.size(); }

 private:
  std::vector<SfDescriptor> sfs_;  // sorted by sf_id
  std::vector<ProcedureSpec> procedures_;
};

struct GroupingReport {
  std::map<std::string, int> cross_bb;
  std::map<std::string, int> intra_bb;
  int total_inter_bb_interfaces = 0;

  bool operator==(const GroupingReport&) const = default;
};

enum class RefinementAction { Accept, RevisitStep3, RevisitStep1 };
std::string_view to_string(RefinementAction v);

struct RefinementDecision {
  RefinementAction action = RefinementAction::Accept;
  std::vector<std::string> offending;  // procedures over 2x threshold (RevisitStep1 only)
};

inline constexpr int kDefaultRefineThreshold = 6;

SfCatalog load_catalog(std::string_view text, std::string_view doc = "catalog");

std::set<SeparationConstraint> derive_separation_constraints(const SfCatalog& catalog);

/// Exact minimum-interface partition (branch and bound). Scored against the
/// catalog's registered procedures unless `procedures` is given.
std::vector<BbDefinition> group_into_bbs(const SfCatalog& catalog,
                                         const std::set<SeparationConstraint>& constraints);
std::vector<BbDefinition> group_into_bbs(const SfCatalog& catalog,
                                         const std::set<SeparationConstraint>& constraints,
                                         const std::vector<ProcedureSpec>& procedures);

GroupingReport evaluate_grouping(const std::vector<BbDefinition>& bbs,
                                 const std::vector<ProcedureSpec>& procedures);

RefinementDecision refine(const std::vector<BbDefinition>& bbs, const GroupingReport& report,
                          int threshold = kDefaultRefineThreshold);

/// Grouping report document (same record grammar as the catalog).
std::string format_grouping(const std::vector<BbDefinition>& bbs, const GroupingReport& report,
                            const RefinementDecision& decision);

/// Short role name conventionally used for a domain's BB (AF, CM, ...).
std::string_view domain_bb_name(FunctionalDomain d);

}  // namespace ngcp
