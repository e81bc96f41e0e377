#pragma once

// Connectivity Management: the per-device convergent state machine,
// address allocation, D-plane anchor selection, session bookkeeping and
// slice selection. A Global CM authenticates through the common SAM and hands
// the device to the selected slice's local CM; a SliceLocal CM may redirect a
// device that attached to the wrong slice.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ngcp/blocks/af.hpp"
#include "ngcp/blocks/sam.hpp"

namespace ngcp {

enum class CmRole { Global, SliceLocal };

struct Subscription {
  std::vector<SliceId> allowed;
  SliceId default_slice;  // may be empty
};

struct CmSession {
  DeviceId dev;
  FlowId flow;
  std::string anchor;
  std::string node;     // access node
  std::string ingress;  // D-plane node behind the access node
  std::vector<NetworkAddress> addresses;
  std::string tag;  // installed path tag
};

/// Fields of an AttachRequest (or SliceSelect hand-off) kept while SAM runs.
struct PendingAttach {
  std::string node;
  std::string tech;
  int nets = 1;
  Mediation via = Mediation::ViaAF;
};

/// What CM reads from SAM's AuthResponse.
struct AuthResult {
  bool ok = false;
  std::string reason;
  std::string pseud;
  std::string ticket;
  std::string suci;
};

struct CmState {
  BbInstanceId self;
  Peers peers;
  CmRole role = CmRole::SliceLocal;
  SliceId slice;
  AuthScheme scheme = AuthScheme::Full;
  std::string qos = "default";

  std::map<DeviceId, ConvergentState> device_table;
  std::map<DeviceId, Mediation> device_via;
  std::map<DeviceId, PendingAttach> pending;
  std::map<DeviceId, std::string> pseudonyms;  // last pseudonym handed to the UE
  std::map<SessionId, CmSession> sessions;
  std::map<DeviceId, SliceId> slice_bindings;
  std::map<DeviceId, Subscription> subscription_view;  // provisioning

  std::vector<std::string> anchors;                                   // candidate anchor nodes
  std::map<std::string, std::map<std::string, int>> anchor_latency;  // ingress -> anchor -> ticks
  std::map<std::string, AccessNodeInfo> access_nodes;
  std::map<SliceId, BbInstanceId> local_cms;  // Global role only

  int session_counter = 0;
  int address_counter = 0;

  ConvergentState state_of(const DeviceId& dev) const;
  const CmSession* session_of(const DeviceId& dev) const;
  std::string canonical() const;
};

enum class LocalSelection { AcceptHere, Redirect };
struct LocalDecision {
  LocalSelection kind = LocalSelection::AcceptHere;
  SliceId target;
};

/// The subscription's designated slice: the default when it is allowed,
/// otherwise the smallest allowed id. Throws NoEligibleSliceError.
SliceId designated_slice(const Subscription& sub);
SliceId cm_select_slice_global(const CmState& s, const DeviceId& dev);
/// AcceptHere when the subscription allows this slice, else a redirect to
/// the designated slice.
LocalDecision cm_select_slice_local(const CmState& s, const DeviceId& dev);

/// Lowest latency-to-access anchor, ties by id, skipping `exclude`.
/// Throws NoDPlaneFunctionError.
std::string cm_select_anchor(const CmState& s, const std::string& ingress, const std::string& exclude = "");

/// Completes an attachment once SAM has answered. Emits SessionEstablish to
/// FM on success (local role), SliceSelect to the target local CM (global
/// role), a SliceRedirect or an auth denial to the UE otherwise.
Effects cm_attach(CmState& s, const DeviceId& dev, const PendingAttach& req, const AuthResult& auth,
                  CorrelationId corr);

/// Payload read:
///   AttachRequest / SliceSelect  dev, supi|suci|pseud, ticket, token, node, tech, nets, mode
///   AuthResponse                 dev, verdict, reason, pseud, ticket, suci
///   SessionEstablish (from FM)   dev, session, op, result, tag, reason, anchor
///   SessionRelease               dev, op, result
///   HandoverPrepare              dev, target, tech
///   HandoverExecute              dev, phase, session, target, tag
///   LocationUpdate               dev, node, area, state
///   ContextNotify                statement, subject
Effects cm_handle(CmState& s, const SignalMessage& msg, Tick tick);

}  // namespace ngcp
