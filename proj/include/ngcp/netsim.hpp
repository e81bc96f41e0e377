#pragma once

// Environment outside the C-plane: access nodes, simulated devices and the
// D-plane that executes FM's rules and carries traffic as discrete units.

#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "ngcp/blocks/af.hpp"
#include "ngcp/blocks/cm.hpp"
#include "ngcp/blocks/common.hpp"
#include "ngcp/blocks/sam.hpp"
#include "ngcp/graph.hpp"

namespace ngcp {

// ---------------------------------------------------------------- topology

struct AccessNode {
  std::string id;
  AccessTech tech = AccessTech::Cellular;
  std::string area;
  std::string attach;  // D-plane node
};

struct Topology {
  Graph graph;
  std::map<std::string, std::string> node_kind;  // anchor, transport, egress
  std::map<std::string, AccessNode> access;

  std::vector<std::string> anchors() const;
};

/// Records: `node id kind`, `link a b capacity latency`, `access id tech area attach`.
Topology load_topology(std::string_view text, std::string_view doc = "topology");

// ------------------------------------------------------------------ D-plane

struct Rule {
  std::string next;  // neighbour id or "egress"
  int hop = 0;
  bool draining = false;
};

struct Unit {
  FlowId flow;
  std::string tag;
  Tick sent = 0;
  std::vector<std::string> route;  // nodes as installed at send tick
  std::vector<int> link_latency;   // per hop, as at send tick
  std::size_t pos = 0;             // travelling route[pos] -> route[pos + 1]
  int remaining = 0;
};

struct FlowRun {
  long long sent = 0;
  long long delivered = 0;
  long long lost = 0;
  long long latency_sum = 0;
  long long latency_max = 0;
  std::map<Tick, long long> delivered_per_tick;
  std::vector<long long> latencies;           // per delivered unit
  std::vector<long long> expected_latencies;  // path sum at its send tick
};

struct TrafficSource {
  std::string ingress;
  int rate = 0;  // units per tick, 0 when stopped
};

struct DPlane {
  using RuleKey = std::pair<std::string, std::string>;  // flow, tag

  Graph graph;  // the slice's share of the infrastructure
  std::map<LinkKey, int> load;
  std::map<std::string, std::map<RuleKey, Rule>> rules;  // node -> rules
  std::map<RuleKey, int> install_seq;
  int seq = 0;
  std::vector<Unit> in_flight;
  std::map<FlowId, FlowRun> flows;
  std::map<FlowId, TrafficSource> sources;
  bool reported_load = false;  // last step reported non-zero link load

  long long in_flight_of(const FlowId& flow) const;
  std::string canonical() const;
};

/// Installs or removes one rule. Rejects unknown nodes, rules naming a link
/// the node does not have, and removal of unknown rules.
Verdict dplane_configure(DPlane& dp, const SignalMessage& cmd);

struct StepResult {
  std::map<LinkKey, int> loads;                          // non-zero loads after the step
  std::map<FlowId, std::vector<long long>> latencies;    // delivered this tick
  bool report = false;                                   // a FlowNotify is due
};

/// Advances in-flight units one tick, injects new units from active sources
/// and removes drained rules.
StepResult dplane_step(DPlane& dp, Tick tick);

/// FlowNotify payload: loads "a~b:n,...", lat "flow:ticks,...".
Payload flow_notify_payload(const StepResult& r);

// ------------------------------------------------------------------ devices

struct UeBinding {
  ConvergentState state = ConvergentState::Detached;
  SessionId session;
  FlowId flow;
  std::vector<std::string> addresses;
  Pseudonym pseudonym;
};

struct SimDevice {
  DeviceId id;
  PermanentSubscriberId supi;
  std::string credential;
  std::string suci;  // provisioned concealed identity
  Subscription subscription;
  Mediation mode = Mediation::ViaAF;
  int nets = 1;
  std::string node;
  bool reachable = true;
  bool idle = false;
  bool authenticated_once = false;
  std::string ticket;
  std::optional<SliceId> redirect_target;
  std::optional<SliceId> attaching;  // slice the pending attach went to
  std::map<SliceId, UeBinding> bindings;
  std::map<SliceId, int> traffic_rate;

  const UeBinding* active_binding() const;
  std::string canonical(const SliceId& slice) const;
};

/// What a device knows about the slice it is signalling with.
struct UeContext {
  SliceId slice;
  Peers peers;
  AuthScheme scheme = AuthScheme::Full;
  bool has_mm = false;
  const std::map<std::string, AccessNode>* access = nullptr;
};

enum class UeEventKind { Attach, Detach, Move, TrafficStart, TrafficStop, Idle, Unreachable };

struct UeEvent {
  UeEventKind kind = UeEventKind::Attach;
  std::string target;  // Move
  int rate = 1;        // TrafficStart
};

/// C-plane messages a device emits for a scripted event, on the interface
/// given by its signalling mode. Throws IllegalEventError when the event is
/// not legal in the device's state. Move on a slice without MM yields one
/// MobilityUnsupported event and no messages.
Effects ue_event(SimDevice& dev, const UeEvent& ev, const UeContext& ctx, CorrelationId corr);

/// A device's reaction to a message addressed to it.
Effects ue_receive(SimDevice& dev, const SignalMessage& msg, const UeContext& ctx);

}  // namespace ngcp
