#include "ngcp/messages.hpp"

#include <charconv>

#include "ngcp/errors.hpp"
#include "ngcp/textrec.hpp"

namespace ngcp {

namespace {

constexpr EnumTable<Role, 8> kRoles{{
    {Role::AF, "AF"},
    {Role::CM, "CM"},
    {Role::MM, "MM"},
    {Role::SAM, "SAM"},
    {Role::FM, "FM"},
    {Role::CGHF, "CGHF"},
    {Role::CPD, "CPD"},
    {Role::Broker, "PS"},
}};

constexpr EnumTable<InterfacePoint, 7> kInterfaces{{
    {InterfacePoint::I1, "I1"},
    {InterfacePoint::I2, "I2"},
    {InterfacePoint::I3, "I3"},
    {InterfacePoint::I4_SBI, "I4_SBI"},
    {InterfacePoint::I7, "I7"},
    {InterfacePoint::InterBB, "InterBB"},
    {InterfacePoint::WBI_composite, "WBI_composite"},
}};

constexpr EnumTable<ProcedureKind, kProcedureKindCount> kKinds{{
    {ProcedureKind::AttachRequest, "AttachRequest"},
    {ProcedureKind::AuthChallenge, "AuthChallenge"},
    {ProcedureKind::AuthResponse, "AuthResponse"},
    {ProcedureKind::SliceSelect, "SliceSelect"},
    {ProcedureKind::SliceRedirect, "SliceRedirect"},
    {ProcedureKind::SessionEstablish, "SessionEstablish"},
    {ProcedureKind::SessionRelease, "SessionRelease"},
    {ProcedureKind::HandoverPrepare, "HandoverPrepare"},
    {ProcedureKind::HandoverExecute, "HandoverExecute"},
    {ProcedureKind::PathRecordUpdate, "PathRecordUpdate"},
    {ProcedureKind::Page, "Page"},
    {ProcedureKind::LocationUpdate, "LocationUpdate"},
    {ProcedureKind::FlowConfigure, "FlowConfigure"},
    {ProcedureKind::FlowNotify, "FlowNotify"},
    {ProcedureKind::ContextPublish, "ContextPublish"},
    {ProcedureKind::ContextNotify, "ContextNotify"},
}};

constexpr EnumTable<AccessTech, 3> kTechs{{
    {AccessTech::Cellular, "Cellular"},
    {AccessTech::WiFi, "WiFi"},
    {AccessTech::Fixed, "Fixed"},
}};

constexpr EnumTable<EndpointClass, 8> kClasses{{
    {EndpointClass::UE, "UE"},
    {EndpointClass::AccessNode, "AccessNode"},
    {EndpointClass::AF, "AF"},
    {EndpointClass::CnBB, "CN"},
    {EndpointClass::DPlane, "DPlane"},
    {EndpointClass::OtherDomain, "OtherDomain"},
    {EndpointClass::Topic, "Topic"},
    {EndpointClass::Mediator, "Mediator"},
}};

// Interface for an unordered pair of classes, independent of mediation.
std::optional<InterfacePoint> pair_interface(EndpointClass a, EndpointClass b) {
  using C = EndpointClass;
  auto is = [&](C x, C y) { return (a == x && b == y) || (a == y && b == x); };
  if (is(C::UE, C::AF) || is(C::UE, C::AccessNode)) return InterfacePoint::I1;
  if (is(C::UE, C::CnBB)) return InterfacePoint::I2;
  if (is(C::AF, C::CnBB) || is(C::AccessNode, C::CnBB)) return InterfacePoint::I3;
  if (is(C::CnBB, C::CnBB) || is(C::AF, C::AF)) return InterfacePoint::InterBB;
  if (is(C::CnBB, C::Topic) || is(C::AF, C::Topic)) return InterfacePoint::InterBB;
  if (is(C::CnBB, C::OtherDomain)) return InterfacePoint::I7;
  if (is(C::CnBB, C::DPlane)) return InterfacePoint::I4_SBI;
  return std::nullopt;
}

std::string_view interface_rule_text(InterfacePoint i) {
  switch (i) {
    case InterfacePoint::I1: return "I1 is UE<->AF";
    case InterfacePoint::I2: return "I2 is UE<->CN C-plane";
    case InterfacePoint::I3: return "I3 is AF<->CN C-plane";
    case InterfacePoint::I4_SBI: return "I4_SBI is FM<->D-plane";
    case InterfacePoint::I7: return "I7 is CN<->other domain";
    case InterfacePoint::InterBB: return "InterBB is BB<->BB";
    case InterfacePoint::WBI_composite: return "WBI_composite is a reporting aggregate";
  }
  return "?";
}

bool needs_escape(char c) { return c == '%' || c == ';' || c == '=' || c == ' ' || c == '\t' || c == '\n' || c == '\r'; }

void escape_into(std::string& out, std::string_view s) {
  static constexpr char kHex[] = "0123456789ABCDEF";
  for (char c : s) {
    if (needs_escape(c)) {
      out.push_back('%');
      out.push_back(kHex[(static_cast<unsigned char>(c) >> 4) & 0xF]);
      out.push_back(kHex[static_cast<unsigned char>(c) & 0xF]);
    } else {
      out.push_back(c);
    }
  }
}

std::string unescape(std::string_view s) {
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '%' && i + 2 < s.size()) {
      unsigned v = 0;
      std::from_chars(s.data() + i + 1, s.data() + i + 3, v, 16);
      out.push_back(static_cast<char>(v));
      i += 2;
    } else {
      out.push_back(s[i]);
    }
  }
  return out;
}

}  // namespace

std::string_view to_string(Role r) { return enum_name(kRoles, r); }
bool parse_role(std::string_view s, Role& out) { return enum_parse(kRoles, s, out); }
std::string_view to_string(InterfacePoint i) { return enum_name(kInterfaces, i); }
bool parse_interface(std::string_view s, InterfacePoint& out) { return enum_parse(kInterfaces, s, out); }
std::string_view to_string(ProcedureKind k) { return enum_name(kKinds, k); }
bool parse_kind(std::string_view s, ProcedureKind& out) { return enum_parse(kKinds, s, out); }
std::string_view to_string(EndpointClass c) { return enum_name(kClasses, c); }
std::string_view to_string(AccessTech t) { return enum_name(kTechs, t); }
bool parse_tech(std::string_view s, AccessTech& out) { return enum_parse(kTechs, s, out); }

int priority_class(ProcedureKind k) {
  switch (k) {
    case ProcedureKind::AttachRequest:
    case ProcedureKind::AuthChallenge:
    case ProcedureKind::AuthResponse:
      return 0;
    case ProcedureKind::HandoverPrepare:
    case ProcedureKind::HandoverExecute:
    case ProcedureKind::PathRecordUpdate:
    case ProcedureKind::Page:
    case ProcedureKind::LocationUpdate:
      return 1;
    case ProcedureKind::SliceSelect:
    case ProcedureKind::SliceRedirect:
    case ProcedureKind::SessionEstablish:
    case ProcedureKind::SessionRelease:
      return 2;
    case ProcedureKind::FlowConfigure:
    case ProcedureKind::FlowNotify:
      return 3;
    case ProcedureKind::ContextPublish:
    case ProcedureKind::ContextNotify:
      return 4;
  }
  return 5;
}

std::string BbInstanceId::str() const { return std::string(to_string(role)) + "#" + std::to_string(ordinal); }

std::optional<BbInstanceId> BbInstanceId::parse(std::string_view s) {
  auto hash = s.find('#');
  if (hash == std::string_view::npos) return std::nullopt;
  BbInstanceId id;
  if (!parse_role(s.substr(0, hash), id.role)) return std::nullopt;
  auto digits = s.substr(hash + 1);
  auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), id.ordinal);
  if (ec != std::errc{} || ptr != digits.data() + digits.size()) return std::nullopt;
  return id;
}

std::string Endpoint::str() const {
  switch (kind) {
    case EndpointKind::UE: return "ue:" + name;
    case EndpointKind::AccessNode: return "an:" + name;
    case EndpointKind::BB: return bb.str();
    case EndpointKind::DPlaneNode: return "dp:" + name;
    case EndpointKind::Topic: return "topic:" + name;
    case EndpointKind::External: return "ext:" + name;
  }
  return "?";
}

std::optional<Endpoint> Endpoint::parse(std::string_view s) {
  auto colon = s.find(':');
  if (colon == std::string_view::npos) {
    if (auto id = BbInstanceId::parse(s)) return Endpoint::of(*id);
    return std::nullopt;
  }
  auto prefix = s.substr(0, colon);
  std::string rest(s.substr(colon + 1));
  if (rest.empty()) return std::nullopt;
  if (prefix == "ue") return Endpoint{EndpointKind::UE, {}, rest};
  if (prefix == "an") return Endpoint::access_node(rest);
  if (prefix == "dp") return Endpoint::dplane(rest);
  if (prefix == "topic") return Endpoint::topic(rest);
  if (prefix == "ext") return Endpoint::external(rest);
  return std::nullopt;
}

const std::string* SignalMessage::field(std::string_view key) const {
  auto it = payload.find(std::string(key));
  return it == payload.end() ? nullptr : &it->second;
}

std::string SignalMessage::field_or(std::string_view key, std::string_view fallback) const {
  const auto* v = field(key);
  return v ? *v : std::string(fallback);
}

EndpointClass endpoint_class(const Endpoint& e) {
  switch (e.kind) {
    case EndpointKind::UE: return EndpointClass::UE;
    case EndpointKind::AccessNode: return EndpointClass::AccessNode;
    case EndpointKind::DPlaneNode: return EndpointClass::DPlane;
    case EndpointKind::Topic: return EndpointClass::Topic;
    case EndpointKind::External: return EndpointClass::OtherDomain;
    case EndpointKind::BB:
      if (e.bb.role == Role::AF) return EndpointClass::AF;
      if (is_cn_role(e.bb.role)) return EndpointClass::CnBB;
      return EndpointClass::Mediator;
  }
  return EndpointClass::Mediator;
}

InterfacePoint route_interface_for(EndpointClass source, EndpointClass destination, Mediation mediation) {
  using C = EndpointClass;
  auto fail = [&] {
    return NoInterfaceError(std::string("no interface from ") + std::string(to_string(source)) + " to " +
                            std::string(to_string(destination)) +
                            (mediation == Mediation::ViaAF ? " (via AF)" : " (direct)"));
  };
  bool ue_cn = (source == C::UE && destination == C::CnBB) || (source == C::CnBB && destination == C::UE);
  // Mediated UE signalling terminates at the AF; the UE never addresses the CN directly.
  if (ue_cn && mediation == Mediation::ViaAF) throw fail();
  auto i = pair_interface(source, destination);
  if (!i) throw fail();
  return *i;
}

InterfacePoint route_interface_for(const Endpoint& source, const Endpoint& destination, Mediation mediation) {
  auto sc = endpoint_class(source);
  auto dc = endpoint_class(destination);
  // The SBI is FM's alone.
  if ((sc == EndpointClass::DPlane && !destination.is_bb(Role::FM)) ||
      (dc == EndpointClass::DPlane && !source.is_bb(Role::FM)))
    throw NoInterfaceError("only FM terminates the southbound interface (" + source.str() + " -> " +
                           destination.str() + ")");
  return route_interface_for(sc, dc, mediation);
}

Verdict validate_message(const SignalMessage& msg) {
  if (msg.iface == InterfacePoint::WBI_composite)
    return Verdict::reject("reporting-only-interface", std::string(interface_rule_text(msg.iface)));
  auto sc = endpoint_class(msg.source);
  auto dc = endpoint_class(msg.destination);
  if (sc == EndpointClass::Mediator || dc == EndpointClass::Mediator)
    return Verdict::reject("mediator-endpoint", "fabric mediators never originate or terminate messages");
  if (dc == EndpointClass::Topic && sc == EndpointClass::Topic)
    return Verdict::reject("no-interface", "topic to topic");
  if (sc == EndpointClass::Topic) return Verdict::reject("no-interface", "topics cannot originate messages");
  auto expected = pair_interface(sc, dc);
  if (!expected)
    return Verdict::reject("no-interface", "no reference point between " + msg.source.str() + " and " +
                                               msg.destination.str());
  if ((sc == EndpointClass::DPlane && !msg.destination.is_bb(Role::FM)) ||
      (dc == EndpointClass::DPlane && !msg.source.is_bb(Role::FM)))
    return Verdict::reject("no-interface", "only FM terminates the southbound interface");
  if (*expected != msg.iface)
    return Verdict::reject("interface-role mismatch", std::string(interface_rule_text(msg.iface)) + ", message is " +
                                                          msg.source.str() + " -> " + msg.destination.str());
  if (msg.correlation_id == 0) return Verdict::reject("missing-correlation", "correlation_id must be set");
  return Verdict::accept();
}

std::string encode_payload(const Payload& p) {
  if (p.empty()) return "-";
  std::string out;
  bool first = true;
  for (const auto& [k, v] : p) {
    if (!first) out.push_back(';');
    first = false;
    escape_into(out, k);
    out.push_back('=');
    escape_into(out, v);
  }
  return out;
}

Payload decode_payload(std::string_view s) {
  Payload p;
  if (s == "-" || s.empty()) return p;
  for (const auto& part : split(s, ';')) {
    auto eq = part.find('=');
    if (eq == std::string::npos) {
      p[unescape(part)] = "";
    } else {
      p[unescape(std::string_view(part).substr(0, eq))] = unescape(std::string_view(part).substr(eq + 1));
    }
  }
  return p;
}

}  // namespace ngcp
