#pragma once

// Identities, the interface taxonomy and the typed C-plane signalling unit
// shared by every other module.

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>

namespace ngcp {

using Tick = std::int64_t;
using MsgId = std::uint64_t;
using CorrelationId = std::uint64_t;

/// Opaque string identifier, distinct per tag so ids cannot be mixed up.
template <class Tag>
class Id {
 public:
  Id() = default;
  explicit Id(std::string v) : value_(std::move(v)) {}
  const std::string& str() const { return value_; }
  bool empty() const { return value_.empty(); }
  auto operator<=>(const Id&) const = default;

 private:
  std::string value_;
};

using DeviceId = Id<struct DeviceTag>;
using PermanentSubscriberId = Id<struct SupiTag>;
using Pseudonym = Id<struct PseudonymTag>;
using SliceId = Id<struct SliceTag>;
using SessionId = Id<struct SessionTag>;
using FlowId = Id<struct FlowTag>;
using NetworkAddress = Id<struct AddressTag>;
using ContextTopicId = Id<struct TopicTag>;

/// Building block roles, plus the two fabric mediators (dispatcher, broker).
enum class Role { AF, CM, MM, SAM, FM, CGHF, CPD, Broker };
std::string_view to_string(Role r);
bool parse_role(std::string_view s, Role& out);
inline bool is_cn_role(Role r) {
  return r == Role::CM || r == Role::MM || r == Role::SAM || r == Role::FM || r == Role::CGHF;
}

struct BbInstanceId {
  Role role = Role::CM;
  int ordinal = 0;

  std::string str() const;  // "CM#3"
  static std::optional<BbInstanceId> parse(std::string_view s);
  auto operator<=>(const BbInstanceId&) const = default;
};

enum class AccessTech { Cellular, WiFi, Fixed };
std::string_view to_string(AccessTech t);
bool parse_tech(std::string_view s, AccessTech& out);

enum class EndpointKind { UE, AccessNode, BB, DPlaneNode, Topic, External };

struct Endpoint {
  EndpointKind kind = EndpointKind::UE;
  BbInstanceId bb;   // kind == BB
  std::string name;  // device, access node, D-plane node, topic or external source

  static Endpoint ue(const DeviceId& d) { return {EndpointKind::UE, {}, d.str()}; }
  static Endpoint access_node(std::string n) { return {EndpointKind::AccessNode, {}, std::move(n)}; }
  static Endpoint of(BbInstanceId id) { return {EndpointKind::BB, id, {}}; }
  static Endpoint dplane(std::string n) { return {EndpointKind::DPlaneNode, {}, std::move(n)}; }
  static Endpoint topic(std::string t) { return {EndpointKind::Topic, {}, std::move(t)}; }
  static Endpoint external(std::string n) { return {EndpointKind::External, {}, std::move(n)}; }

  bool is_bb(Role r) const { return kind == EndpointKind::BB && bb.role == r; }
  std::string str() const;  // "ue:d1", "an:a1", "CM#3", "dp:n1", "topic:t", "ext:x"
  static std::optional<Endpoint> parse(std::string_view s);
  auto operator<=>(const Endpoint&) const = default;
};

enum class InterfacePoint { I1, I2, I3, I4_SBI, I7, InterBB, WBI_composite };
std::string_view to_string(InterfacePoint i);
bool parse_interface(std::string_view s, InterfacePoint& out);
inline bool is_wbi(InterfacePoint i) {
  return i == InterfacePoint::I1 || i == InterfacePoint::I2 || i == InterfacePoint::I3;
}

enum class ProcedureKind {
  AttachRequest,
  AuthChallenge,
  AuthResponse,
  SliceSelect,
  SliceRedirect,
  SessionEstablish,
  SessionRelease,
  HandoverPrepare,
  HandoverExecute,
  PathRecordUpdate,
  Page,
  LocationUpdate,
  FlowConfigure,
  FlowNotify,
  ContextPublish,
  ContextNotify,
};
inline constexpr int kProcedureKindCount = 16;
std::string_view to_string(ProcedureKind k);
bool parse_kind(std::string_view s, ProcedureKind& out);

/// Within-tick processing class: auth > mobility > session > flow > context.
int priority_class(ProcedureKind k);

/// Kind-specific record. Ordered so serialization is deterministic; the keys
/// each handler reads are documented next to the handler.
using Payload = std::map<std::string, std::string>;

struct SignalMessage {
  MsgId msg_id = 0;
  Tick tick = 0;
  ProcedureKind kind = ProcedureKind::AttachRequest;
  Endpoint source;
  Endpoint destination;
  InterfacePoint iface = InterfacePoint::InterBB;
  CorrelationId correlation_id = 0;
  Payload payload;

  const std::string* field(std::string_view key) const;
  std::string field_or(std::string_view key, std::string_view fallback = "") const;
};

/// Accept, or the violated rule with a human-readable detail.
struct Verdict {
  bool ok = true;
  std::string rule;
  std::string detail;

  static Verdict accept() { return {}; }
  static Verdict reject(std::string rule, std::string detail) { return {false, std::move(rule), std::move(detail)}; }
  explicit operator bool() const { return ok; }
};

enum class EndpointClass { UE, AccessNode, AF, CnBB, DPlane, OtherDomain, Topic, Mediator };
EndpointClass endpoint_class(const Endpoint& e);
std::string_view to_string(EndpointClass c);

enum class Mediation { Direct, ViaAF };

/// Interface a single hop between the two endpoint classes uses. Throws
/// NoInterfaceError for pairs with no defined reference point.
InterfacePoint route_interface_for(EndpointClass source, EndpointClass destination, Mediation mediation);
InterfacePoint route_interface_for(const Endpoint& source, const Endpoint& destination, Mediation mediation);

Verdict validate_message(const SignalMessage& msg);

/// `k=v;k=v` with %-escaping of separators; "-" for an empty payload.
std::string encode_payload(const Payload& p);
Payload decode_payload(std::string_view s);

}  // namespace ngcp
