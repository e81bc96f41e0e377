#pragma once

// Slice blueprints, their validation against the BB definitions, and the
// slice lifecycle: Designed -> Instantiated -> Operating -> TornDown.

#include <functional>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "ngcp/blocks/af.hpp"
#include "ngcp/blocks/cghf.hpp"
#include "ngcp/blocks/cm.hpp"
#include "ngcp/blocks/fm.hpp"
#include "ngcp/blocks/mm.hpp"
#include "ngcp/blocks/sam.hpp"
#include "ngcp/catalog.hpp"
#include "ngcp/fabric.hpp"
#include "ngcp/netsim.hpp"

namespace ngcp {

enum class SliceType { eMBB, mIoT, CriticalComms, FixedAccess };
std::string_view to_string(SliceType t);
bool parse_slice_type(std::string_view s, SliceType& out);

enum class SliceScope { Local, Global };

enum class LifecycleState { Designed, Instantiated, Operating, TornDown };
std::string_view to_string(LifecycleState s);

struct SubscribeRule {
  ContextTopicId topic;
  std::vector<Role> roles;
};

struct SliceBlueprint {
  SliceId slice_id;
  SliceType type = SliceType::eMBB;
  SliceScope scope = SliceScope::Local;
  std::map<Role, std::set<std::string>> bb_set;  // empty subset: every SF of the BB
  FabricModelKind fabric_model = FabricModelKind::FullMesh;
  Role relay_role = Role::CM;
  std::optional<MobilityPolicy> mobility_policy;
  AuthScheme auth_scheme = AuthScheme::Full;
  PathStrategy path_strategy = PathStrategy::ShortestPath;
  int stretch_percent = kDefaultStretchPercent;
  std::map<std::string, QosPolicy> qos_policies;
  std::string session_qos = "default";
  std::vector<std::string> anchors;  // empty: every anchor of the topology
  std::vector<ContextModel> context_models;
  int context_window = kDefaultContextWindow;
  std::vector<SubscribeRule> subscriptions;
  std::map<Role, std::set<ProcedureKind>> an_permissions;  // empty: defaults
  int capacity_share = 100;                                // percent of every link
  Tick paging_timeout = kDefaultPagingTimeout;

  bool has(Role r) const { return bb_set.count(r) > 0; }
};

/// Resolves a reference found in document `from` to that document's key
/// and text.
using DocResolver = std::function<std::pair<std::string, std::string>(const std::string& from, const std::string& ref)>;

/// Parses a blueprint; `policy ref=...` records are expanded through
/// `resolve`. Throws SchemaError.
SliceBlueprint load_blueprint(std::string_view text, std::string_view doc, const DocResolver& resolve = {});

struct BlueprintVerdict {
  std::vector<std::string> violations;
  bool ok() const { return violations.empty(); }
};

BlueprintVerdict validate_blueprint(const SliceBlueprint& bp, const std::vector<BbDefinition>& bb_definitions);

/// The shared physical layer slices are placed on. Ordinals are handed out
/// across slices so every BB instance id is unique.
struct Infrastructure {
  Topology topology;
  std::map<LinkKey, int> allocated_percent;
  std::map<Role, int> next_ordinal;
  int next_mediator = 0;

  BbInstanceId allocate(Role r);
};

struct Provisioned {
  PermanentSubscriberId supi;
  std::string credential;
  Subscription subscription;
};

struct SliceInstance {
  SliceBlueprint blueprint;
  LifecycleState state = LifecycleState::Designed;
  std::map<Role, BbInstanceId> ids;
  std::optional<AfState> af;
  std::optional<CmState> cm;
  std::optional<MmState> mm;
  std::optional<SamState> sam;
  std::optional<FmState> fm;
  std::optional<CghfState> cghf;
  std::optional<Fabric> fabric;
  DPlane dplane;
  std::mt19937_64 rng;

  const SliceId& id() const { return blueprint.slice_id; }
  Peers peers() const { return Peers{ids}; }
  bool owns(const BbInstanceId& bb) const;
  std::set<DeviceId> attached_devices() const;
  /// Terminal state of every block plus the D-plane partition.
  std::string canonical() const;
};

/// Creates fresh BB states and the slice's capacity share of every link.
/// `extra_members` join the fabric (local CMs on the global domain's fabric).
/// Throws InfraCapacityError when the infrastructure cannot host the share.
SliceInstance instantiate(const SliceBlueprint& bp, Infrastructure& infra, std::uint64_t seed,
                          const std::map<DeviceId, Provisioned>& subscribers, const std::string& operator_key,
                          const std::set<BbInstanceId>& extra_members = {});

/// Throws LifecycleOrderError unless Instantiated.
void operate(SliceInstance& s);

/// Detaches every device (one "detach" event each) and releases every FM
/// reservation. Throws LifecycleOrderError unless Instantiated or Operating.
Effects teardown(SliceInstance& s, CorrelationId corr);

}  // namespace ngcp
