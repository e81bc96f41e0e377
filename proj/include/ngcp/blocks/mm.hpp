#pragma once

// Mobility Management: tracking areas, reachability/paging and handover
// execution under the slice's mobility policy. A handover plan runs one step
// at a time; each step advances on the acknowledgement of the previous one.

#include <map>
#include <set>
#include <string>
#include <vector>

#include "ngcp/blocks/common.hpp"

namespace ngcp {

enum class HandoverStyle { BreakBeforeMake, MakeBeforeBreak };
enum class Anchoring { Centralised, Distributed };
std::string_view to_string(HandoverStyle s);
bool parse_style(std::string_view s, HandoverStyle& out);
std::string_view to_string(Anchoring a);
bool parse_anchoring(std::string_view s, Anchoring& out);

struct MobilityPolicy {
  HandoverStyle style = HandoverStyle::MakeBeforeBreak;
  Anchoring anchoring = Anchoring::Centralised;
  std::set<AccessTech> forbidden;  // target technologies the slice refuses
};

enum class PagingState { Reachable, Idle, PagingInProgress };
std::string_view to_string(PagingState s);

enum class PlanStep { InstallNewPath, ExecuteHandover, ReleaseOldPath };
std::string_view to_string(PlanStep s);

/// MakeBeforeBreak: install, execute, release. BreakBeforeMake swaps the
/// install and release ends: release, execute, install.
std::vector<PlanStep> handover_plan(HandoverStyle style);

struct HandoverRequest {
  DeviceId dev;
  SessionId session;  // empty when the device has no active session
  FlowId flow;
  std::string target;  // access node
  AccessTech tech = AccessTech::Cellular;
  std::string area;
  std::string ingress;  // D-plane node behind the target
  std::string anchor;
  std::string old_tag;
  std::string qos;
};

struct HandoverRun {
  HandoverRequest req;
  HandoverStyle style = HandoverStyle::MakeBeforeBreak;
  std::vector<PlanStep> plan;
  std::size_t step = 0;
  std::string new_tag;
  CorrelationId corr = 0;
};

inline constexpr Tick kDefaultPagingTimeout = 8;

struct MmState {
  BbInstanceId self;
  Peers peers;
  SliceId slice;
  MobilityPolicy policy;
  Tick paging_timeout = kDefaultPagingTimeout;

  std::map<DeviceId, std::string> tracking_areas;
  std::map<DeviceId, PagingState> paging_state;
  std::map<DeviceId, Tick> paging_deadline;
  std::map<DeviceId, CorrelationId> paging_corr;
  std::map<std::string, std::vector<std::string>> area_nodes;  // area -> access nodes (sorted)
  std::map<DeviceId, HandoverRun> handovers;

  std::string area_of(const std::string& node) const;
  std::string canonical() const;
};

/// Starts the plan and emits its first step. Throws NoSessionError and
/// PolicyForbidsError.
Effects mm_handover(MmState& s, const HandoverRequest& req, CorrelationId corr);

/// One Page per access node of the device's last tracking area. Throws
/// NotIdleError.
Effects mm_page(MmState& s, const DeviceId& dev, CorrelationId corr, Tick tick);

/// Expires paging attempts whose deadline has passed.
Effects mm_tick(MmState& s, Tick tick);

/// Payload read:
///   HandoverPrepare   dev, session, flow, target, tech, ingress, anchor, area, tag, qos
///   FlowConfigure     dev, result, tag, reason   (ack from FM)
///   SessionRelease    dev, result                (ack from FM)
///   PathRecordUpdate  dev, node                  (ack from AF)
///   Page              dev, node, resp            (request from FM or response via AF)
///   LocationUpdate    dev, node, area, state
Effects mm_handle(MmState& s, const SignalMessage& msg, Tick tick);

}  // namespace ngcp
