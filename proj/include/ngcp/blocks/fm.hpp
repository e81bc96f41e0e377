#pragma once

// Flow Management: path definition over the slice's D-plane view, capacity
// reservation per QoS class, rule installation through the SBI adaptor and
// ingestion of D-plane monitoring.

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ngcp/blocks/common.hpp"
#include "ngcp/graph.hpp"

namespace ngcp {

enum class PathStrategy { ShortestPath, LoadDistribution };
std::string_view to_string(PathStrategy s);
bool parse_strategy(std::string_view s, PathStrategy& out);

inline constexpr int kDefaultStretchPercent = 50;

struct QosPolicy {
  int reserve = 0;  // capacity units reserved on every link of the path
  std::optional<PathStrategy> strategy;
};

struct ForwardingPath {
  std::string tag;
  FlowId flow;
  DeviceId dev;
  std::string node;  // access node the flow enters through
  std::vector<std::string> nodes;
  std::string qos;
  int reserved = 0;
};

struct FmState {
  BbInstanceId self;
  Peers peers;
  SliceId slice;
  Graph topology;                     // capacities are the slice's share
  std::map<LinkKey, int> reserved;    // per link, summed over installed paths
  std::map<LinkKey, int> observed;    // last reported load
  std::map<std::string, ForwardingPath> path_table;  // by path tag
  std::map<std::string, QosPolicy> qos_policies;
  PathStrategy strategy = PathStrategy::ShortestPath;
  int stretch_percent = kDefaultStretchPercent;
  int tag_counter = 0;

  int reserved_on(const LinkKey& k) const;
  int observed_on(const LinkKey& k) const;
  int total_reserved() const;
  std::vector<std::string> tags_of(const FlowId& flow) const;
  std::string canonical() const;
};

/// Rejections from the D-plane adaptor come back as failed verdicts.
using SbiAdaptor = std::function<Verdict(const SignalMessage&)>;

/// ShortestPath: minimum total latency, ties by smallest node-id sequence.
/// LoadDistribution: among simple paths within (100 + stretch)% of the
/// shortest latency, minimum of the largest post-install utilization
/// (reserved + observed + demand) / capacity over the path's links, same tie
/// rule. Only links with enough unreserved capacity are eligible.
/// Reserves the QoS demand and assigns a fresh tag.
/// Throws NoPathError (unknown node or disconnected) or CapacityError.
ForwardingPath fm_define_path(FmState& s, const FlowId& flow, const std::string& ingress, const std::string& egress,
                              const std::string& qos);

/// One FlowConfigure per on-path node through the adaptor. On a rejection
/// the installed prefix is removed, the reservation returned and
/// AdaptorError thrown; path_table is left unchanged.
std::vector<Outgoing> fm_apply(FmState& s, const ForwardingPath& path, const SbiAdaptor& sbi, CorrelationId corr);

/// Removes the path's rules (mode "now" or "drain") and its reservation.
std::vector<Outgoing> fm_release(FmState& s, const std::string& tag, const std::string& mode, const SbiAdaptor& sbi,
                                 CorrelationId corr);

/// Asks MM to page an idle device (downlink data pending).
Effects fm_request_page(FmState& s, const DeviceId& dev, CorrelationId corr);

/// Payload read:
///   SessionEstablish  dev, session, flow, ingress, anchor, qos, op, node
///   FlowConfigure     dev, session, flow, ingress, anchor, qos   (handover install from MM)
///   SessionRelease    dev, session, flow, tag, mode, op
///   FlowNotify        loads, lat                                 (from the D-plane)
Effects fm_handle(FmState& s, const SignalMessage& msg, Tick tick, const SbiAdaptor& sbi);

}  // namespace ngcp
