#include "ngcp/blocks/cm.hpp"

#include <algorithm>
#include <climits>
#include <sstream>

#include "ngcp/textrec.hpp"

namespace ngcp {

namespace {

using K = ProcedureKind;

void transition(CmState& s, Effects& fx, const DeviceId& dev, ConvergentState to) {
  ConvergentState from = s.state_of(dev);
  if (from == to) return;
  s.device_table[dev] = to;
  fx.event("transition", dev.str(),
           {{"from", std::string(to_string(from))}, {"to", std::string(to_string(to))}, {"slice", s.slice.str()}});
}

Mediation via_of(const CmState& s, const DeviceId& dev) {
  auto it = s.device_via.find(dev);
  return it == s.device_via.end() ? Mediation::ViaAF : it->second;
}

Endpoint to_ue(const CmState& s, const DeviceId& dev) { return ue_hop(s.peers, dev, via_of(s, dev)); }

SessionId find_session(const CmState& s, const DeviceId& dev) {
  for (const auto& [sid, sess] : s.sessions)
    if (sess.dev == dev) return sid;
  return {};
}

void deny(CmState& s, Effects& fx, const DeviceId& dev, CorrelationId corr, const std::string& reason) {
  transition(s, fx, dev, ConvergentState::Detached);
  fx.send(K::AuthResponse, Endpoint::of(s.self), to_ue(s, dev), corr,
          {{"dev", dev.str()}, {"verdict", "fail"}, {"reason", reason}});
}

Effects on_attach_request(CmState& s, const SignalMessage& msg) {
  Effects fx;
  DeviceId dev(msg.field_or("dev"));
  if (s.state_of(dev) != ConvergentState::Detached) {
    fx.event("AttachRejected", dev.str(), {{"reason", "not detached"}, {"slice", s.slice.str()}});
    return fx;
  }
  PendingAttach req;
  req.node = msg.field_or("node");
  req.tech = msg.field_or("tech");
  req.nets = std::max(1, std::atoi(msg.field_or("nets", "1").c_str()));
  if (msg.kind == K::SliceSelect)
    parse_mediation(msg.field_or("mode", "ViaAF"), req.via);
  else
    req.via = msg.source.kind == EndpointKind::UE ? Mediation::Direct : Mediation::ViaAF;
  s.pending[dev] = req;
  s.device_via[dev] = req.via;
  transition(s, fx, dev, ConvergentState::Authenticating);

  Payload p{{"dev", dev.str()},
            {"scheme", std::string(to_string(s.scheme))},
            {"via", std::string(to_string(req.via))}};
  for (const char* key : {"supi", "suci", "pseud", "ticket", "token"})
    if (auto v = msg.field(key)) p[key] = *v;
  fx.send(K::AttachRequest, Endpoint::of(s.self), s.peers.at(Role::SAM), msg.correlation_id, std::move(p));
  return fx;
}

Effects on_session_established(CmState& s, const SignalMessage& msg) {
  Effects fx;
  DeviceId dev(msg.field_or("dev"));
  SessionId sid(msg.field_or("session"));
  auto it = s.sessions.find(sid);
  if (it == s.sessions.end()) {
    fx.event("Dropped", dev.str(), {{"kind", "SessionEstablish"}, {"at", "CM"}});
    return fx;
  }
  auto& sess = it->second;
  bool ok = msg.field_or("result") == "ok";
  if (msg.field_or("op") == "reselect") {
    if (ok) {
      sess.anchor = msg.field_or("anchor");
      sess.tag = msg.field_or("tag");
      fx.event("reselected", dev.str(), {{"anchor", sess.anchor}, {"flow", sess.flow.str()}});
    } else {
      fx.event("ReselectFailed", dev.str(), {{"reason", msg.field_or("reason")}});
    }
    return fx;
  }
  if (!ok) {
    fx.event("SessionFailed", dev.str(), {{"reason", msg.field_or("reason")}, {"slice", s.slice.str()}});
    s.sessions.erase(it);
    return fx;
  }
  sess.tag = msg.field_or("tag");
  transition(s, fx, dev, ConvergentState::SessionActive);
  s.slice_bindings[dev] = s.slice;
  fx.event("bound", dev.str(), {{"slice", s.slice.str()}, {"session", sid.str()}});
  std::vector<std::string> addrs;
  for (const auto& a : sess.addresses) addrs.push_back(a.str());
  Payload p{{"dev", dev.str()},   {"session", sid.str()},   {"addr", join(addrs, ",")},
            {"slice", s.slice.str()}, {"node", sess.node}, {"flow", sess.flow.str()}};
  if (auto pn = s.pseudonyms.find(dev); pn != s.pseudonyms.end()) p["pseud"] = pn->second;
  fx.send(K::SessionEstablish, Endpoint::of(s.self), to_ue(s, dev), msg.correlation_id, std::move(p));
  return fx;
}

void finish_detach(CmState& s, Effects& fx, const DeviceId& dev, CorrelationId corr) {
  SessionId sid = find_session(s, dev);
  if (!sid.empty()) s.sessions.erase(sid);
  s.slice_bindings.erase(dev);
  s.pending.erase(dev);
  transition(s, fx, dev, ConvergentState::Detached);
  Endpoint self = Endpoint::of(s.self);
  fx.send(K::SessionRelease, self, s.peers.at(Role::SAM), corr, {{"dev", dev.str()}, {"op", "detach"}});
  fx.send(K::SessionRelease, self, to_ue(s, dev), corr, {{"dev", dev.str()}, {"cause", "detach"}});
}

Effects on_session_release(CmState& s, const SignalMessage& msg) {
  Effects fx;
  DeviceId dev(msg.field_or("dev"));
  if (msg.source.is_bb(Role::FM)) {
    if (msg.field_or("op") == "detach") finish_detach(s, fx, dev, msg.correlation_id);
    return fx;
  }
  ConvergentState st = s.state_of(dev);
  if (st == ConvergentState::Detached) {
    fx.event("DetachIgnored", dev.str(), {{"slice", s.slice.str()}});
    return fx;
  }
  SessionId sid = find_session(s, dev);
  if (sid.empty()) {
    finish_detach(s, fx, dev, msg.correlation_id);
    return fx;
  }
  const auto& sess = s.sessions.at(sid);
  fx.send(K::SessionRelease, Endpoint::of(s.self), s.peers.at(Role::FM), msg.correlation_id,
          {{"dev", dev.str()}, {"session", sid.str()}, {"flow", sess.flow.str()}, {"op", "detach"}});
  return fx;
}

Effects on_handover_prepare(CmState& s, const SignalMessage& msg) {
  Effects fx;
  DeviceId dev(msg.field_or("dev"));
  if (!s.peers.has(Role::MM)) {
    fx.event("MobilityUnsupported", dev.str(), {{"slice", s.slice.str()}});
    return fx;
  }
  std::string target = msg.field_or("target");
  Payload p{{"dev", dev.str()}, {"target", target}, {"tech", msg.field_or("tech")}, {"qos", s.qos}};
  if (auto it = s.access_nodes.find(target); it != s.access_nodes.end()) {
    p["ingress"] = it->second.ingress;
    p["area"] = it->second.area;
    p["tech"] = std::string(to_string(it->second.tech));
  }
  SessionId sid = find_session(s, dev);
  if (!sid.empty() && s.state_of(dev) == ConvergentState::SessionActive) {
    const auto& sess = s.sessions.at(sid);
    p["session"] = sid.str();
    p["flow"] = sess.flow.str();
    p["anchor"] = sess.anchor;
    p["tag"] = sess.tag;
  }
  fx.send(K::HandoverPrepare, Endpoint::of(s.self), s.peers.at(Role::MM), msg.correlation_id, std::move(p));
  return fx;
}

Effects on_handover_complete(CmState& s, const SignalMessage& msg) {
  Effects fx;
  DeviceId dev(msg.field_or("dev"));
  auto it = s.sessions.find(SessionId(msg.field_or("session")));
  if (it == s.sessions.end() || msg.field_or("phase") != "complete") return fx;
  auto& sess = it->second;
  sess.node = msg.field_or("target");
  if (auto an = s.access_nodes.find(sess.node); an != s.access_nodes.end()) sess.ingress = an->second.ingress;
  sess.tag = msg.field_or("tag");
  fx.event("handover-complete", dev.str(), {{"node", sess.node}, {"session", it->first.str()}});
  return fx;
}

Effects on_context(CmState& s, const SignalMessage& msg) {
  Effects fx;
  if (msg.field_or("statement") != "LatencyAboveNormal") return fx;
  FlowId flow(msg.field_or("subject"));
  for (const auto& [sid, sess] : s.sessions) {
    if (sess.flow != flow) continue;
    std::string anchor;
    try {
      anchor = cm_select_anchor(s, sess.ingress, sess.anchor);
    } catch (const NoDPlaneFunctionError& e) {
      fx.event("NoDPlaneFunctionError", sess.dev.str(), {{"detail", e.what()}});
      return fx;
    }
    fx.event("reselect", sess.dev.str(), {{"flow", flow.str()}, {"from", sess.anchor}, {"to", anchor}});
    fx.send(K::SessionEstablish, Endpoint::of(s.self), s.peers.at(Role::FM), msg.correlation_id,
            {{"dev", sess.dev.str()},
             {"session", sid.str()},
             {"flow", flow.str()},
             {"ingress", sess.ingress},
             {"anchor", anchor},
             {"qos", s.qos},
             {"op", "reselect"}});
    return fx;
  }
  return fx;
}

}  // namespace

ConvergentState CmState::state_of(const DeviceId& dev) const {
  auto it = device_table.find(dev);
  return it == device_table.end() ? ConvergentState::Detached : it->second;
}

const CmSession* CmState::session_of(const DeviceId& dev) const {
  for (const auto& [sid, sess] : sessions)
    if (sess.dev == dev) return &sess;
  return nullptr;
}

SliceId designated_slice(const Subscription& sub) {
  if (sub.allowed.empty()) throw NoEligibleSliceError("subscription allows no slice");
  if (!sub.default_slice.empty() &&
      std::find(sub.allowed.begin(), sub.allowed.end(), sub.default_slice) != sub.allowed.end())
    return sub.default_slice;
  return *std::min_element(sub.allowed.begin(), sub.allowed.end());
}

SliceId cm_select_slice_global(const CmState& s, const DeviceId& dev) {
  auto it = s.subscription_view.find(dev);
  if (it == s.subscription_view.end()) throw NoEligibleSliceError("no subscription record for " + dev.str());
  return designated_slice(it->second);
}

LocalDecision cm_select_slice_local(const CmState& s, const DeviceId& dev) {
  auto it = s.subscription_view.find(dev);
  if (it == s.subscription_view.end()) throw NoEligibleSliceError("no subscription record for " + dev.str());
  const auto& allowed = it->second.allowed;
  if (std::find(allowed.begin(), allowed.end(), s.slice) != allowed.end()) return {LocalSelection::AcceptHere, {}};
  SliceId target = designated_slice(it->second);
  return {LocalSelection::Redirect, target};
}

std::string cm_select_anchor(const CmState& s, const std::string& ingress, const std::string& exclude) {
  auto row = s.anchor_latency.find(ingress);
  std::string best;
  int best_lat = INT_MAX;
  for (const auto& a : s.anchors) {
    if (a == exclude || row == s.anchor_latency.end()) continue;
    auto l = row->second.find(a);
    if (l == row->second.end()) continue;
    if (l->second < best_lat || (l->second == best_lat && a < best)) {
      best = a;
      best_lat = l->second;
    }
  }
  if (best.empty())
    throw NoDPlaneFunctionError("slice " + s.slice.str() + " offers no reachable anchor from " + ingress);
  return best;
}

Effects cm_attach(CmState& s, const DeviceId& dev, const PendingAttach& req, const AuthResult& auth,
                  CorrelationId corr) {
  Effects fx;
  Endpoint self = Endpoint::of(s.self);
  if (!auth.ok) {
    deny(s, fx, dev, corr, auth.reason.empty() ? "authentication failed" : auth.reason);
    return fx;
  }
  transition(s, fx, dev, ConvergentState::Attached);
  if (!auth.pseud.empty()) s.pseudonyms[dev] = auth.pseud;

  if (s.role == CmRole::Global) {
    SliceId target;
    try {
      target = cm_select_slice_global(s, dev);
    } catch (const NoEligibleSliceError& e) {
      fx.event("NoEligibleSliceError", dev.str(), {{"detail", e.what()}});
      deny(s, fx, dev, corr, "no eligible slice");
      return fx;
    }
    auto cm = s.local_cms.find(target);
    if (cm == s.local_cms.end()) {
      fx.event("NoEligibleSliceError", dev.str(), {{"detail", "slice " + target.str() + " not operating"}});
      deny(s, fx, dev, corr, "no eligible slice");
      return fx;
    }
    fx.event("slice-selected", dev.str(), {{"slice", target.str()}, {"method", "global"}});
    fx.send(K::SliceSelect, self, Endpoint::of(cm->second), corr,
            {{"dev", dev.str()},
             {"ticket", auth.ticket},
             {"suci", auth.suci},
             {"node", req.node},
             {"tech", req.tech},
             {"nets", std::to_string(req.nets)},
             {"mode", std::string(to_string(req.via))}});
    transition(s, fx, dev, ConvergentState::Detached);
    return fx;
  }

  LocalDecision d;
  try {
    d = cm_select_slice_local(s, dev);
  } catch (const NoEligibleSliceError& e) {
    fx.event("NoEligibleSliceError", dev.str(), {{"detail", e.what()}});
    deny(s, fx, dev, corr, "no eligible slice");
    return fx;
  }
  if (d.kind == LocalSelection::Redirect) {
    fx.event("redirect", dev.str(), {{"from", s.slice.str()}, {"to", d.target.str()}});
    transition(s, fx, dev, ConvergentState::Detached);
    fx.send(K::SliceRedirect, self, to_ue(s, dev), corr,
            {{"dev", dev.str()}, {"target", d.target.str()}, {"ticket", auth.ticket}, {"suci", auth.suci}});
    return fx;
  }

  std::string ingress;
  if (auto an = s.access_nodes.find(req.node); an != s.access_nodes.end()) ingress = an->second.ingress;
  std::string anchor;
  try {
    anchor = cm_select_anchor(s, ingress);
  } catch (const NoDPlaneFunctionError& e) {
    fx.event("NoDPlaneFunctionError", dev.str(), {{"detail", e.what()}});
    return fx;
  }
  CmSession sess;
  sess.dev = dev;
  sess.anchor = anchor;
  sess.node = req.node;
  sess.ingress = ingress;
  for (int i = 0; i < req.nets; ++i)
    sess.addresses.emplace_back("addr-" + s.slice.str() + "-" + std::to_string(++s.address_counter));
  int n = ++s.session_counter;
  SessionId sid("sess-" + s.slice.str() + "-" + std::to_string(n));
  sess.flow = FlowId("flow-" + s.slice.str() + "-" + std::to_string(n));
  s.sessions[sid] = sess;
  fx.send(K::SessionEstablish, self, s.peers.at(Role::FM), corr,
          {{"dev", dev.str()},
           {"session", sid.str()},
           {"flow", sess.flow.str()},
           {"ingress", ingress},
           {"anchor", anchor},
           {"qos", s.qos},
           {"node", req.node},
           {"op", "establish"}});
  return fx;
}

Effects cm_handle(CmState& s, const SignalMessage& msg, Tick) {
  DeviceId dev(msg.field_or("dev"));
  switch (msg.kind) {
    case K::AttachRequest:
    case K::SliceSelect:
      return on_attach_request(s, msg);
    case K::AuthResponse: {
      auto it = s.pending.find(dev);
      if (it == s.pending.end()) {
        Effects fx;
        fx.event("Dropped", dev.str(), {{"kind", "AuthResponse"}, {"at", "CM"}});
        return fx;
      }
      PendingAttach req = it->second;
      s.pending.erase(it);
      AuthResult auth{msg.field_or("verdict") == "ok", msg.field_or("reason"), msg.field_or("pseud"),
                      msg.field_or("ticket"), msg.field_or("suci")};
      return cm_attach(s, dev, req, auth, msg.correlation_id);
    }
    case K::SessionEstablish:
      return on_session_established(s, msg);
    case K::SessionRelease:
      return on_session_release(s, msg);
    case K::HandoverPrepare:
      return on_handover_prepare(s, msg);
    case K::HandoverExecute:
      return on_handover_complete(s, msg);
    case K::LocationUpdate: {
      Effects fx;
      fx.event("location", dev.str(), {{"node", msg.field_or("node")}, {"state", msg.field_or("state")}});
      return fx;
    }
    case K::ContextNotify:
      return on_context(s, msg);
    default: {
      Effects fx;
      fx.event("Dropped", dev.str(), {{"kind", std::string(to_string(msg.kind))}, {"at", "CM"}});
      return fx;
    }
  }
}

std::string CmState::canonical() const {
  std::ostringstream os;
  os << "CM " << self.str() << " " << (role == CmRole::Global ? "Global" : "SliceLocal") << " " << slice.str()
     << " sessions=" << session_counter << " addrs=" << address_counter << "\n";
  for (const auto& [dev, st] : device_table) os << "dev " << dev.str() << " " << to_string(st) << "\n";
  for (const auto& [dev, p] : pseudonyms) os << "pn " << dev.str() << " " << p << "\n";
  for (const auto& [dev, req] : pending) os << "pending " << dev.str() << " " << req.node << "\n";
  for (const auto& [sid, sess] : sessions) {
    std::vector<std::string> addrs;
    for (const auto& a : sess.addresses) addrs.push_back(a.str());
    os << "sess " << sid.str() << " " << sess.dev.str() << " " << sess.flow.str() << " " << sess.anchor << " "
       << sess.node << " " << sess.ingress << " " << join(addrs, ",") << " " << sess.tag << "\n";
  }
  for (const auto& [dev, sl] : slice_bindings) os << "bind " << dev.str() << " " << sl.str() << "\n";
  return os.str();
}

}  // namespace ngcp
