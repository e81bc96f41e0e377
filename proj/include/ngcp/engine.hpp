#pragma once

// Deterministic tick-driven runs over a scenario: slices, devices, fabrics
// and the D-plane, producing a trace and the metrics folded from it.
//
// Within a tick: scripted events, then message deliveries in (priority
// class, msg_id) order, then paging timers, then one D-plane step. Every
// message emitted during tick t is delivered at t + 1.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ngcp/fabric.hpp"
#include "ngcp/slices.hpp"
#include "ngcp/textrec.hpp"
#include "ngcp/trace.hpp"

namespace ngcp {

enum class AttachMethod { GlobalSelection, DefaultSliceRedirect };

struct ScenarioDevice {
  DeviceId id;
  PermanentSubscriberId supi;
  std::string credential;
  Subscription subscription;
  Mediation mode = Mediation::ViaAF;
  std::string node;
  int nets = 1;
  AttachMethod method = AttachMethod::DefaultSliceRedirect;
};

struct ScriptEvent {
  Tick tick = 0;
  std::string event;
  Record rec;
};

struct Scenario {
  std::string name;
  std::string catalog_ref;
  std::string topology_ref;
  std::vector<std::string> blueprint_refs;
  std::optional<std::string> global_ref;
  SliceId default_slice;
  std::string operator_key = "operator-key";
  Tick ticks = 0;
  std::uint64_t seed = 1;
  std::vector<ScenarioDevice> devices;
  std::vector<ScriptEvent> script;
};

/// Parses the scenario document only; references stay unresolved.
/// Throws ScenarioError.
Scenario parse_scenario(std::string_view text, std::string_view doc = "scenario");

/// Every document a run reads, keyed by path relative to the scenario's
/// directory.
struct InputBundle {
  std::string scenario_key;
  std::map<std::string, std::string> docs;

  const std::string& get(const std::string& key) const;  // throws ScenarioError
};

/// Key of `ref` as seen from document `from`.
std::string resolve_key(const std::string& from, const std::string& ref);

/// Reads the scenario file and everything it references. Throws ScenarioError.
InputBundle load_inputs(const std::filesystem::path& scenario_file);

struct RunOptions {
  std::optional<std::uint64_t> seed;  // default: the scenario's
  std::optional<FabricModelKind> fabric;
  std::optional<ProjectionTable> projections;
};

struct RunResult {
  std::string trace;
  MetricsReport metrics;
  std::map<std::string, std::string> digests;  // slice id or "all"
};

/// Throws ScenarioError before tick 0; later failures are trace events.
RunResult run(const InputBundle& inputs, const RunOptions& opts = {});

/// Re-runs from the inputs recorded in a trace.
RunResult replay(std::string_view trace);

struct FabricRow {
  FabricModelKind model = FabricModelKind::FullMesh;
  long long hops = 0;
  long long messages = 0;
  long long fabric_messages = 0;
  long long unicast_interbb = 0;
  std::string digest;
};

struct FabricComparison {
  std::vector<FabricRow> rows;  // FullMesh, Relay, Dispatcher, PubSub
  std::string str() const;
};

/// Four concurrent runs, one per fabric model. `dispatcher_projections`
/// replaces the CPD's projection table (test fixture). Throws
/// EquivalenceViolation when terminal digests differ.
FabricComparison compare_fabrics(const InputBundle& inputs, std::optional<std::uint64_t> seed = std::nullopt,
                                  std::optional<ProjectionTable> dispatcher_projections = std::nullopt);

/// Grouping of a catalog, memoised per catalog text.
std::vector<BbDefinition> grouping_for(const std::string& catalog_text, const std::string& doc);

}  // namespace ngcp
