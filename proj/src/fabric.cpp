#include "ngcp/fabric.hpp"

#include <algorithm>

#include "ngcp/errors.hpp"
#include "ngcp/textrec.hpp"

namespace ngcp {

namespace {

constexpr EnumTable<FabricModelKind, 4> kModels{{
    {FabricModelKind::FullMesh, "FullMesh"},
    {FabricModelKind::Relay, "Relay"},
    {FabricModelKind::Dispatcher, "Dispatcher"},
    {FabricModelKind::PubSub, "PubSub"},
}};

ProjectionTable build_default_projections() {
  using K = ProcedureKind;
  ProjectionTable t;
  auto add = [&](K k, Role r, std::set<std::string> keys) { t[{k, r}] = std::move(keys); };
  add(K::AttachRequest, Role::CM, {"dev", "supi", "suci", "pseud", "ticket", "token", "node", "tech", "nets"});
  add(K::AttachRequest, Role::SAM, {"dev", "supi", "suci", "pseud", "ticket", "token", "scheme", "via"});
  add(K::AuthChallenge, Role::AF, {"dev", "nonce"});
  add(K::AuthResponse, Role::SAM, {"dev", "res"});
  add(K::AuthResponse, Role::CM, {"dev", "verdict", "reason", "pseud", "ticket", "suci"});
  add(K::AuthResponse, Role::AF, {"dev", "verdict", "reason"});
  add(K::SliceSelect, Role::CM, {"dev", "ticket", "suci", "node", "tech", "nets", "mode"});
  add(K::SliceRedirect, Role::AF, {"dev", "target", "ticket", "suci"});
  add(K::SessionEstablish, Role::FM, {"dev", "session", "flow", "ingress", "anchor", "qos", "op", "node"});
  add(K::SessionEstablish, Role::CM, {"dev", "session", "flow", "op", "result", "tag", "reason", "anchor"});
  add(K::SessionEstablish, Role::AF, {"dev", "session", "addr", "pseud", "slice", "node", "flow"});
  add(K::SessionRelease, Role::CM, {"dev", "op", "session", "result"});
  add(K::SessionRelease, Role::FM, {"dev", "session", "flow", "tag", "mode", "op"});
  add(K::SessionRelease, Role::MM, {"dev", "flow", "op", "result"});
  add(K::SessionRelease, Role::SAM, {"dev", "op"});
  add(K::SessionRelease, Role::AF, {"dev", "cause"});
  add(K::HandoverPrepare, Role::CM, {"dev", "target", "tech"});
  add(K::HandoverPrepare, Role::MM,
      {"dev", "session", "flow", "target", "tech", "ingress", "anchor", "area", "tag", "qos"});
  add(K::HandoverExecute, Role::AF, {"dev", "target", "tag"});
  add(K::HandoverExecute, Role::CM, {"dev", "phase", "session", "target", "tag", "anchor"});
  add(K::PathRecordUpdate, Role::MM, {"dev", "node"});
  add(K::Page, Role::MM, {"dev", "node", "resp"});
  add(K::Page, Role::AF, {"dev", "node"});
  add(K::LocationUpdate, Role::MM, {"dev", "node", "area", "state"});
  add(K::LocationUpdate, Role::CM, {"dev", "node", "area", "state"});
  add(K::FlowConfigure, Role::FM, {"dev", "session", "flow", "ingress", "anchor", "qos", "op", "node"});
  add(K::FlowConfigure, Role::MM, {"dev", "flow", "tag", "result", "reason", "op"});
  add(K::FlowConfigure, Role::AF, {"dev", "flow", "node", "op"});
  add(K::ContextPublish, Role::CGHF, {"source", "metric", "samples"});
  for (Role r : {Role::CM, Role::MM, Role::SAM, Role::FM, Role::AF})
    add(K::ContextNotify, r, {"topic", "subject", "statement", "evidence", "at"});
  return t;
}

}  // namespace

std::string_view to_string(FabricModelKind k) { return enum_name(kModels, k); }
bool parse_fabric_kind(std::string_view s, FabricModelKind& out) { return enum_parse(kModels, s, out); }

const ProjectionTable& default_projections() {
  static const ProjectionTable table = build_default_projections();
  return table;
}

Fabric::Fabric(std::set<BbInstanceId> members, FabricModel model, int mediator_ordinal)
    : model_(std::move(model)),
      members_(std::move(members)),
      mediator_ordinal_(mediator_ordinal),
      projections_(default_projections()) {}

Fabric Fabric::connect(std::set<BbInstanceId> members, FabricModel model, int mediator_ordinal) {
  if (members.empty()) throw SchemaError("a fabric needs at least one member");
  if (model.kind == FabricModelKind::Relay) {
    if (!model.relay_bb) throw BadRelayError("relay model without a relay BB");
    if (!members.count(*model.relay_bb))
      throw BadRelayError("relay BB " + model.relay_bb->str() + " is not a member of the fabric");
  } else {
    model.relay_bb.reset();
  }
  return Fabric(std::move(members), std::move(model), mediator_ordinal);
}

std::optional<BbInstanceId> Fabric::mediator() const {
  switch (model_.kind) {
    case FabricModelKind::FullMesh: return std::nullopt;
    case FabricModelKind::Relay: return model_.relay_bb;
    case FabricModelKind::Dispatcher: return BbInstanceId{Role::CPD, mediator_ordinal_};
    case FabricModelKind::PubSub: return BbInstanceId{Role::Broker, mediator_ordinal_};
  }
  return std::nullopt;
}

int Fabric::link_count() const {
  int n = static_cast<int>(members_.size());
  switch (model_.kind) {
    case FabricModelKind::FullMesh: return n * (n - 1) / 2;
    case FabricModelKind::Relay: return n - 1;
    case FabricModelKind::Dispatcher:
    case FabricModelKind::PubSub: return n;
  }
  return 0;
}

void Fabric::subscribe(BbInstanceId bb, const ContextTopicId& topic) {
  if (model_.kind != FabricModelKind::PubSub)
    throw ModelMismatchError("subscribe requires the PubSub model, fabric is " +
                             std::string(to_string(model_.kind)));
  if (!members_.count(bb)) throw UnknownDestinationError(bb.str() + " is not a member of the fabric");
  subscriptions_[topic.str()].insert(bb);
}

bool Fabric::reachable(const Endpoint& e) const {
  if (e.kind == EndpointKind::BB) return members_.count(e.bb) > 0;
  return e.kind == EndpointKind::UE || e.kind == EndpointKind::AccessNode;
}

SignalMessage Fabric::project(const SignalMessage& msg, const Endpoint& recipient) const {
  if (model_.kind != FabricModelKind::Dispatcher || recipient.kind != EndpointKind::BB) return msg;
  SignalMessage out = msg;
  auto it = projections_.find({msg.kind, recipient.bb.role});
  out.payload.clear();
  if (it == projections_.end()) return out;
  for (const auto& [k, v] : msg.payload)
    if (it->second.count(k)) out.payload.emplace(k, v);
  return out;
}

Fabric::SendResult Fabric::send(const SignalMessage& msg) {
  if (!reachable(msg.source))
    throw UnknownDestinationError("source " + msg.source.str() + " is not attached to the fabric");

  SendResult result;
  auto& rec = result.record;
  rec.msg_id = msg.msg_id;

  if (msg.destination.kind == EndpointKind::Topic) {
    if (model_.kind != FabricModelKind::PubSub)
      throw ModelMismatchError("topic destination on a " + std::string(to_string(model_.kind)) + " fabric");
    rec.hop_count = 2;
    rec.mediators.push_back(*mediator());
    auto it = subscriptions_.find(msg.destination.name);
    if (it == subscriptions_.end() || it->second.empty()) {
      rec.no_subscriber = true;
    } else {
      for (const auto& bb : it->second) rec.recipients.push_back(Endpoint::of(bb));
    }
  } else {
    if (!reachable(msg.destination))
      throw UnknownDestinationError("destination " + msg.destination.str() + " is not attached to the fabric");
    rec.recipients.push_back(msg.destination);
    switch (model_.kind) {
      case FabricModelKind::FullMesh:
        rec.hop_count = 1;
        break;
      case FabricModelKind::Relay: {
        auto relay = Endpoint::of(*model_.relay_bb);
        if (msg.source == relay || msg.destination == relay) {
          rec.hop_count = 1;
        } else {
          rec.hop_count = 2;
          rec.mediators.push_back(*model_.relay_bb);
        }
        break;
      }
      case FabricModelKind::Dispatcher:
      case FabricModelKind::PubSub:
        // Unicast over PubSub rides a per-destination topic.
        rec.hop_count = 2;
        rec.mediators.push_back(*mediator());
        break;
    }
  }
  std::sort(rec.recipients.begin(), rec.recipients.end());
  for (const auto& r : rec.recipients) result.deliveries.push_back({r, project(msg, r)});
  log_.push_back(rec);
  return result;
}

}  // namespace ngcp
