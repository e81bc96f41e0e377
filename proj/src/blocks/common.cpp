#include "ngcp/blocks/common.hpp"

#include "ngcp/textrec.hpp"

namespace ngcp {

namespace {

constexpr EnumTable<ConvergentState, 4> kStates{{
    {ConvergentState::Detached, "Detached"},
    {ConvergentState::Authenticating, "Authenticating"},
    {ConvergentState::Attached, "Attached"},
    {ConvergentState::SessionActive, "SessionActive"},
}};

constexpr EnumTable<Mediation, 2> kMediations{{
    {Mediation::Direct, "DirectI2"},
    {Mediation::ViaAF, "ViaAF"},
}};

}  // namespace

void Effects::send(ProcedureKind kind, const Endpoint& src, const Endpoint& dst, CorrelationId corr,
                   Payload payload) {
  Outgoing o;
  o.kind = kind;
  o.source = src;
  o.destination = dst;
  o.iface = route_interface_for(src, dst, Mediation::Direct);
  o.correlation_id = corr;
  o.payload = std::move(payload);
  out.push_back(std::move(o));
}

void Effects::event(std::string name, std::string subject, Payload detail) {
  events.push_back({std::move(name), std::move(subject), std::move(detail)});
}

void Effects::append(Effects other) {
  for (auto& o : other.out) out.push_back(std::move(o));
  for (auto& e : other.events) events.push_back(std::move(e));
}

Endpoint Peers::at(Role r) const {
  auto it = ids.find(r);
  if (it == ids.end()) throw UnknownDestinationError("slice has no " + std::string(to_string(r)) + " instance");
  return Endpoint::of(it->second);
}

std::string_view to_string(ConvergentState s) { return enum_name(kStates, s); }
bool parse_state(std::string_view s, ConvergentState& out) { return enum_parse(kStates, s, out); }

bool is_legal_transition(ConvergentState from, ConvergentState to) {
  using S = ConvergentState;
  if (to == S::Detached) return from != S::Detached;
  return (from == S::Detached && to == S::Authenticating) || (from == S::Authenticating && to == S::Attached) ||
         (from == S::Attached && to == S::SessionActive);
}

std::string_view to_string(Mediation m) { return enum_name(kMediations, m); }
bool parse_mediation(std::string_view s, Mediation& out) { return enum_parse(kMediations, s, out); }

Endpoint ue_hop(const Peers& peers, const DeviceId& dev, Mediation mode) {
  if (mode == Mediation::ViaAF) return peers.at(Role::AF);
  return Endpoint::ue(dev);
}

}  // namespace ngcp
