#pragma once

// Run trace serialization, the metrics fold over a trace and the trace
// self-consistency audit. A trace is line-delimited, tab-separated:
//
//   RUN  scenario=<doc> seed=<n> fabric=<model|->
//   IN   <doc> <line>                       recorded input documents
//   FAB  <slice> <model> <mediator|->
//   BB   <instance> <slice>
//   DEV  <device> <supi>
//   MSG  <id> <tick> <kind> <src> <dst> <iface> <corr> <hops|-> <mediators|-> <recipients|-> <payload>
//   EVT  <tick> <name> <subject> <detail>
//   FLW  <slice> <flow> <key=value>...
//   DIG  <slice|all> <hex>
//
// Fields are escaped with \t, \n, \r and \\.

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "ngcp/fabric.hpp"
#include "ngcp/messages.hpp"

namespace ngcp {

std::string escape_field(std::string_view s);
std::string unescape_field(std::string_view s);

struct TraceLine {
  std::string tag;
  std::vector<std::string> fields;  // unescaped
};

std::string format_trace_line(const TraceLine& line);
/// Throws SchemaError on an empty tag.
std::vector<TraceLine> parse_trace(std::string_view text);

/// `record` is null for messages that bypass the fabric.
TraceLine msg_line(const SignalMessage& msg, const DeliveryRecord* record);

struct TracedMessage {
  SignalMessage msg;
  int hops = -1;  // -1: not fabric-routed
  std::vector<std::string> mediators;
  std::vector<std::string> recipients;
};
/// Throws SchemaError on malformed MSG lines.
TracedMessage parse_msg_line(const TraceLine& line);

/// Key-value metrics document, a pure fold over a trace:
///   msg.<kind>.<iface>, msg.total, msg.fabric, msg.unicast-interbb,
///   hops.total, event.<name>, proc.<name>.{count,sum,max},
///   flow.<slice>.<flow>.<key>, digest.<slice>
struct MetricsReport {
  std::map<std::string, std::string> values;

  long long number(const std::string& key) const;  // 0 when absent
  std::string str() const;
  static MetricsReport parse(std::string_view text);
  bool operator==(const MetricsReport&) const = default;
};

MetricsReport fold_metrics(std::string_view trace_text);

struct TraceAudit {
  std::vector<std::string> violations;
  bool ok() const { return violations.empty(); }
};

/// Ordering, interface legality, hop/mediator consistency, legal CM
/// transitions, flow conservation and latency fidelity, and no permanent
/// identity on the WBI after a device's first successful authentication.
TraceAudit check_trace(std::string_view trace_text);

}  // namespace ngcp
