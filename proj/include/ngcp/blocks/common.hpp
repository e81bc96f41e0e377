#pragma once

// Pieces shared by the building-block handlers. Each handler takes its
// block's state and one inbound message and returns the outbound messages
// and trace events it produced; the only state it touches is the one passed
// in (plus an explicitly passed random stream where noted).

#include <map>
#include <string>
#include <vector>

#include "ngcp/errors.hpp"
#include "ngcp/messages.hpp"

namespace ngcp {

/// An outbound message before the engine stamps msg_id and tick.
struct Outgoing {
  ProcedureKind kind = ProcedureKind::AttachRequest;
  Endpoint source;
  Endpoint destination;
  InterfacePoint iface = InterfacePoint::InterBB;
  CorrelationId correlation_id = 0;
  Payload payload;
};

/// A state transition or error observed by a handler, traced as EVT.
struct TraceEvent {
  std::string name;
  std::string subject;
  Payload detail;
};

struct Effects {
  std::vector<Outgoing> out;
  std::vector<TraceEvent> events;

  /// Interface is derived from the endpoint classes.
  void send(ProcedureKind kind, const Endpoint& src, const Endpoint& dst, CorrelationId corr, Payload payload);
  void event(std::string name, std::string subject, Payload detail = {});
  void append(Effects other);
};

/// The other BB instances a block can address inside its slice.
struct Peers {
  std::map<Role, BbInstanceId> ids;

  bool has(Role r) const { return ids.count(r) > 0; }
  /// Throws UnknownDestinationError if the slice has no such BB.
  Endpoint at(Role r) const;
};

enum class ConvergentState { Detached, Authenticating, Attached, SessionActive };
std::string_view to_string(ConvergentState s);
bool parse_state(std::string_view s, ConvergentState& out);
/// Edges of the per-device state machine kept by CM (forward chain plus the
/// teardown edges back to Detached).
bool is_legal_transition(ConvergentState from, ConvergentState to);

/// How a CN block reaches a UE: through the AF (I3 then I1) or directly (I2).
std::string_view to_string(Mediation m);
bool parse_mediation(std::string_view s, Mediation& out);

/// Destination for a UE-bound message given the device's signalling mode.
Endpoint ue_hop(const Peers& peers, const DeviceId& dev, Mediation mode);

}  // namespace ngcp
