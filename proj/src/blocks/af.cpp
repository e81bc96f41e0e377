#include "ngcp/blocks/af.hpp"

#include <sstream>

#include "ngcp/textrec.hpp"

namespace ngcp {

namespace {

void record_path(AfState& s, const DeviceId& dev, const std::string& node, bool force) {
  if (node.empty()) return;
  auto& hist = s.path_records[dev];
  if (force || hist.empty() || hist.back() != node) hist.push_back(node);
}

void require_known(const AfState& s, const DeviceId& dev) {
  if (!s.path_records.count(dev)) throw UnknownDevice("AF has no path record for " + dev.str());
}

Effects from_ue(AfState& s, const SignalMessage& msg) {
  using K = ProcedureKind;
  Effects fx;
  DeviceId dev(msg.field_or("dev"));
  Payload p = msg.payload;
  Endpoint self = Endpoint::of(s.self);
  Role to = Role::CM;
  switch (msg.kind) {
    case K::AttachRequest: {
      std::string node = msg.field_or("node");
      auto it = s.access_nodes.find(node);
      if (it != s.access_nodes.end()) p["tech"] = std::string(to_string(it->second.tech));
      record_path(s, dev, node, false);
      break;
    }
    case K::AuthResponse: to = Role::SAM; break;
    case K::SessionRelease: to = Role::CM; break;
    case K::HandoverPrepare:
      require_known(s, dev);
      break;
    case K::LocationUpdate:
      require_known(s, dev);
      record_path(s, dev, msg.field_or("node"), msg.field_or("state") == "active");
      to = s.peers.has(Role::MM) ? Role::MM : Role::CM;
      break;
    case K::Page:
      record_path(s, dev, msg.field_or("node"), true);
      to = Role::MM;
      break;
    default:
      fx.event("Dropped", dev.str(), {{"kind", std::string(to_string(msg.kind))}, {"at", "AF"}});
      return fx;
  }
  fx.send(msg.kind, self, s.peers.at(to), msg.correlation_id, std::move(p));
  return fx;
}

void check_permission(const AfState& s, const SignalMessage& msg) {
  Role from = msg.source.bb.role;
  auto it = s.cn_access_permissions.find(from);
  if (it == s.cn_access_permissions.end() || !it->second.count(msg.kind))
    throw PermissionDenied(msg.source.str() + " may not send " + std::string(to_string(msg.kind)) +
                           " to " + s.self.str());
}

Effects from_cn(AfState& s, const SignalMessage& msg) {
  using K = ProcedureKind;
  Effects fx;
  DeviceId dev(msg.field_or("dev"));
  Endpoint self = Endpoint::of(s.self);
  switch (msg.kind) {
    case K::FlowConfigure: {
      check_permission(s, msg);
      auto& flows = s.an_config[msg.field_or("node")];
      if (msg.field_or("op") == "remove")
        flows.erase(msg.field_or("flow"));
      else
        flows.insert(msg.field_or("flow"));
      return fx;
    }
    case K::HandoverExecute: {
      check_permission(s, msg);
      std::string target = msg.field_or("target");
      record_path(s, dev, target, false);
      fx.send(K::HandoverExecute, self, Endpoint::ue(dev), msg.correlation_id, msg.payload);
      fx.send(K::PathRecordUpdate, self, s.peers.at(Role::MM), msg.correlation_id,
              {{"dev", dev.str()}, {"node", target}});
      return fx;
    }
    case K::Page:
      check_permission(s, msg);
      break;
    case K::SessionEstablish:
      record_path(s, dev, msg.field_or("node"), false);
      break;
    default:
      break;
  }
  fx.send(msg.kind, self, Endpoint::ue(dev), msg.correlation_id, msg.payload);
  return fx;
}

}  // namespace

std::map<Role, std::set<ProcedureKind>> default_an_permissions() {
  return {
      {Role::FM, {ProcedureKind::FlowConfigure}},
      {Role::MM, {ProcedureKind::HandoverExecute, ProcedureKind::Page}},
  };
}

Effects af_handle(AfState& s, const SignalMessage& msg) {
  if (msg.iface == InterfacePoint::I1 && msg.source.kind == EndpointKind::UE) return from_ue(s, msg);
  if (msg.iface == InterfacePoint::I3 && msg.source.kind == EndpointKind::BB) return from_cn(s, msg);
  throw SchemaError("AF handles I1 from UEs and I3 from CN blocks, got " + std::string(to_string(msg.iface)) +
                    " from " + msg.source.str());
}

std::optional<std::string> af_latest_endpoint(const AfState& s, const DeviceId& dev) {
  auto it = s.path_records.find(dev);
  if (it == s.path_records.end() || it->second.empty()) return std::nullopt;
  return it->second.back();
}

std::string AfState::canonical() const {
  std::ostringstream os;
  os << "AF " << self.str() << "\n";
  for (const auto& [dev, hist] : path_records) os << "path " << dev.str() << " " << join(hist, ",") << "\n";
  for (const auto& [node, flows] : an_config)
    os << "an " << node << " " << join(std::vector<std::string>(flows.begin(), flows.end()), ",") << "\n";
  return os.str();
}

}  // namespace ngcp
