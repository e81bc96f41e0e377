#include "ngcp/netsim.hpp"

#include <algorithm>
#include <sstream>

#include "ngcp/textrec.hpp"

namespace ngcp {

namespace {

using K = ProcedureKind;

Endpoint to_cn(const UeContext& ctx, const SimDevice& dev, Role role) {
  if (dev.mode == Mediation::ViaAF) return ctx.peers.at(Role::AF);
  return ctx.peers.at(role);
}

UeBinding& binding(SimDevice& dev, const SliceId& slice) { return dev.bindings[slice]; }

ConvergentState state_in(const SimDevice& dev, const SliceId& slice) {
  auto it = dev.bindings.find(slice);
  return it == dev.bindings.end() ? ConvergentState::Detached : it->second.state;
}

const AccessNode* access_of(const UeContext& ctx, const std::string& node) {
  if (!ctx.access) return nullptr;
  auto it = ctx.access->find(node);
  return it == ctx.access->end() ? nullptr : &it->second;
}

void drop_link_load(DPlane& dp, const Unit& u) {
  if (u.pos + 1 >= u.route.size()) return;
  auto& l = dp.load[LinkKey(u.route[u.pos], u.route[u.pos + 1])];
  if (--l <= 0) dp.load.erase(LinkKey(u.route[u.pos], u.route[u.pos + 1]));
}

/// Occupies the link the unit is about to traverse. False on overload or a
/// vanished link.
bool enter_link(DPlane& dp, Unit& u) {
  const auto& a = u.route[u.pos];
  const auto& b = u.route[u.pos + 1];
  const LinkSpec* spec = dp.graph.link(a, b);
  if (!spec) return false;
  LinkKey key(a, b);
  int cur = dp.load.count(key) ? dp.load.at(key) : 0;
  if (cur + 1 > spec->capacity) return false;
  dp.load[key] = cur + 1;
  u.remaining = u.link_latency[u.pos];
  return true;
}

void deliver(DPlane& dp, const Unit& u, Tick tick, StepResult& r) {
  auto& run = dp.flows[u.flow];
  long long lat = tick - u.sent;
  ++run.delivered;
  run.latency_sum += lat;
  run.latency_max = std::max(run.latency_max, lat);
  run.delivered_per_tick[tick] += 1;
  run.latencies.push_back(lat);
  long long expected = 0;
  for (int l : u.link_latency) expected += l;
  run.expected_latencies.push_back(expected);
  r.latencies[u.flow].push_back(lat);
}

const Rule* rule_at(const DPlane& dp, const std::string& node, const DPlane::RuleKey& key) {
  auto n = dp.rules.find(node);
  if (n == dp.rules.end()) return nullptr;
  auto it = n->second.find(key);
  return it == n->second.end() ? nullptr : &it->second;
}

/// The newest non-draining path whose first hop sits at `ingress`.
std::optional<std::string> pick_tag(const DPlane& dp, const FlowId& flow, const std::string& ingress) {
  auto n = dp.rules.find(ingress);
  if (n == dp.rules.end()) return std::nullopt;
  std::optional<std::string> best;
  int best_seq = -1;
  for (const auto& [key, rule] : n->second) {
    if (key.first != flow.str() || rule.hop != 0 || rule.draining) continue;
    int seq = dp.install_seq.count(key) ? dp.install_seq.at(key) : 0;
    if (seq > best_seq) {
      best_seq = seq;
      best = key.second;
    }
  }
  return best;
}

/// Follows installed rules from `ingress`; stops at egress, at a node with
/// no rule (the unit will be lost there) or at a missing link.
void snapshot_route(const DPlane& dp, Unit& u, const std::string& ingress) {
  DPlane::RuleKey key{u.flow.str(), u.tag};
  u.route = {ingress};
  std::string node = ingress;
  for (std::size_t guard = 0; guard <= dp.graph.nodes.size(); ++guard) {
    const Rule* r = rule_at(dp, node, key);
    if (!r || r->next == "egress") return;
    const LinkSpec* spec = dp.graph.link(node, r->next);
    if (!spec) return;
    u.route.push_back(r->next);
    u.link_latency.push_back(spec->latency);
    node = r->next;
  }
}

bool at_egress(const DPlane& dp, const Unit& u) {
  const Rule* r = rule_at(dp, u.route[u.pos], {u.flow.str(), u.tag});
  return r && r->next == "egress";
}

void sweep_drained(DPlane& dp) {
  std::set<DPlane::RuleKey> busy;
  for (const auto& u : dp.in_flight) busy.insert({u.flow.str(), u.tag});
  for (auto n = dp.rules.begin(); n != dp.rules.end();) {
    for (auto it = n->second.begin(); it != n->second.end();) {
      if (it->second.draining && !busy.count(it->first))
        it = n->second.erase(it);
      else
        ++it;
    }
    n = n->second.empty() ? dp.rules.erase(n) : std::next(n);
  }
  for (auto it = dp.install_seq.begin(); it != dp.install_seq.end();) {
    bool live = false;
    for (const auto& [node, rules] : dp.rules) live = live || rules.count(it->first);
    it = live ? std::next(it) : dp.install_seq.erase(it);
  }
}

}  // namespace

// ---------------------------------------------------------------- topology

std::vector<std::string> Topology::anchors() const {
  std::vector<std::string> out;
  for (const auto& [id, kind] : node_kind)
    if (kind == "anchor") out.push_back(id);
  return out;
}

Topology load_topology(std::string_view text, std::string_view doc) {
  Topology t;
  for (const auto& rec : parse_records(text, doc)) {
    if (rec.kind == "node") {
      rec.expect_keys({"id", "kind"});
      std::string id = rec.get("id");
      if (t.graph.nodes.count(id)) throw SchemaError(rec.where() + ": duplicate node " + id);
      t.graph.nodes.insert(id);
      t.node_kind[id] = rec.get_or("kind", "transport");
    } else if (rec.kind == "link") {
      rec.expect_keys({"a", "b", "capacity", "latency"});
      std::string a = rec.get("a"), b = rec.get("b");
      if (!t.graph.nodes.count(a) || !t.graph.nodes.count(b))
        throw SchemaError(rec.where() + ": link references an undeclared node");
      if (a == b) throw SchemaError(rec.where() + ": self loop on " + a);
      LinkSpec spec{static_cast<int>(rec.get_int("capacity")), static_cast<int>(rec.get_int_or("latency", 1))};
      if (spec.capacity < 0 || spec.latency < 1)
        throw SchemaError(rec.where() + ": capacity must be >= 0 and latency >= 1");
      if (t.graph.link(a, b)) throw SchemaError(rec.where() + ": duplicate link " + a + "~" + b);
      t.graph.add_link(a, b, spec);
    } else if (rec.kind == "access") {
      rec.expect_keys({"id", "tech", "area", "attach"});
      AccessNode an;
      an.id = rec.get("id");
      if (!parse_tech(rec.get("tech"), an.tech)) throw SchemaError(rec.where() + ": unknown tech " + rec.get("tech"));
      an.area = rec.get("area");
      an.attach = rec.get("attach");
      if (!t.graph.nodes.count(an.attach))
        throw SchemaError(rec.where() + ": access node attaches to unknown node " + an.attach);
      if (t.access.count(an.id)) throw SchemaError(rec.where() + ": duplicate access node " + an.id);
      t.access[an.id] = an;
    } else {
      throw SchemaError(rec.where() + ": unknown record kind '" + rec.kind + "'");
    }
  }
  return t;
}

// ------------------------------------------------------------------ D-plane

long long DPlane::in_flight_of(const FlowId& flow) const {
  return std::count_if(in_flight.begin(), in_flight.end(), [&](const Unit& u) { return u.flow == flow; });
}

std::string DPlane::canonical() const {
  std::ostringstream os;
  for (const auto& [k, spec] : graph.links) os << "link " << k.str() << " " << spec.capacity << " " << spec.latency << "\n";
  for (const auto& [node, rules] : this->rules)
    for (const auto& [key, r] : rules)
      os << "rule " << node << " " << key.first << " " << key.second << " " << r.next << " " << r.hop << " "
         << r.draining << "\n";
  for (const auto& [flow, run] : flows)
    os << "flow " << flow.str() << " " << run.sent << " " << run.delivered << " " << run.lost << " "
       << run.latency_sum << " " << run.latency_max << " " << in_flight_of(flow) << "\n";
  return os.str();
}

Verdict dplane_configure(DPlane& dp, const SignalMessage& cmd) {
  std::string node = cmd.destination.name;
  if (cmd.destination.kind != EndpointKind::DPlaneNode || !dp.graph.nodes.count(node))
    return Verdict::reject("unknown-node", "no D-plane node " + cmd.destination.str());
  DPlane::RuleKey key{cmd.field_or("flow"), cmd.field_or("tag")};
  std::string op = cmd.field_or("op");
  if (op == "install") {
    std::string next = cmd.field_or("next", "egress");
    if (next != "egress" && !dp.graph.link(node, next))
      return Verdict::reject("stale-link", node + " has no link to " + next);
    Rule r;
    r.next = next;
    r.hop = std::atoi(cmd.field_or("hop", "0").c_str());
    dp.rules[node][key] = r;
    if (r.hop == 0) dp.install_seq[key] = ++dp.seq;
    return Verdict::accept();
  }
  if (op == "remove") {
    auto n = dp.rules.find(node);
    if (n == dp.rules.end() || !n->second.count(key))
      return Verdict::reject("unknown-rule", "no rule " + key.first + "/" + key.second + " at " + node);
    if (cmd.field_or("mode", "now") == "drain") {
      n->second.at(key).draining = true;
      sweep_drained(dp);
    } else {
      n->second.erase(key);
      if (n->second.empty()) dp.rules.erase(n);
      sweep_drained(dp);
    }
    return Verdict::accept();
  }
  return Verdict::reject("bad-op", "unknown rule operation '" + op + "'");
}

StepResult dplane_step(DPlane& dp, Tick tick) {
  StepResult r;
  std::vector<Unit> still;
  bool activity = false;

  for (auto& u : dp.in_flight) {
    activity = true;
    if (--u.remaining > 0) {
      still.push_back(std::move(u));
      continue;
    }
    drop_link_load(dp, u);
    ++u.pos;
    const Rule* rule = rule_at(dp, u.route[u.pos], {u.flow.str(), u.tag});
    if (!rule) {
      ++dp.flows[u.flow].lost;
      continue;
    }
    if (rule->next == "egress") {
      deliver(dp, u, tick, r);
      continue;
    }
    if (u.pos + 1 >= u.route.size() || rule->next != u.route[u.pos + 1] || !enter_link(dp, u)) {
      ++dp.flows[u.flow].lost;
      continue;
    }
    still.push_back(std::move(u));
  }
  dp.in_flight = std::move(still);

  for (const auto& [flow, src] : dp.sources) {
    for (int i = 0; i < src.rate; ++i) {
      activity = true;
      auto& run = dp.flows[flow];
      ++run.sent;
      auto tag = pick_tag(dp, flow, src.ingress);
      if (!tag) {
        ++run.lost;
        continue;
      }
      Unit u;
      u.flow = flow;
      u.tag = *tag;
      u.sent = tick;
      snapshot_route(dp, u, src.ingress);
      if (at_egress(dp, u)) {
        deliver(dp, u, tick, r);
        continue;
      }
      if (u.route.size() < 2 || !enter_link(dp, u)) {
        ++run.lost;
        continue;
      }
      dp.in_flight.push_back(std::move(u));
    }
  }
  sweep_drained(dp);

  for (const auto& [k, n] : dp.load)
    if (n > 0) r.loads[k] = n;
  r.report = activity || dp.reported_load;
  dp.reported_load = !r.loads.empty();
  return r;
}

Payload flow_notify_payload(const StepResult& r) {
  std::vector<std::string> loads, lat;
  for (const auto& [k, n] : r.loads) loads.push_back(k.str() + ":" + std::to_string(n));
  for (const auto& [flow, vals] : r.latencies)
    for (long long v : vals) lat.push_back(flow.str() + ":" + std::to_string(v));
  return {{"loads", loads.empty() ? "-" : join(loads, ",")}, {"lat", lat.empty() ? "-" : join(lat, ",")}};
}

// ------------------------------------------------------------------ devices

const UeBinding* SimDevice::active_binding() const {
  for (const auto& [slice, b] : bindings)
    if (b.state == ConvergentState::SessionActive) return &b;
  return nullptr;
}

std::string SimDevice::canonical(const SliceId& slice) const {
  std::ostringstream os;
  auto it = bindings.find(slice);
  os << "ue " << id.str();
  if (it != bindings.end()) {
    const auto& b = it->second;
    os << " " << to_string(b.state) << " " << b.session.str() << " " << b.flow.str() << " "
       << join(b.addresses, ",") << " " << b.pseudonym.str();
  } else {
    os << " Detached";
  }
  auto tr = traffic_rate.find(slice);
  os << " rate=" << (tr == traffic_rate.end() ? 0 : tr->second) << "\n";
  return os.str();
}

Effects ue_event(SimDevice& dev, const UeEvent& ev, const UeContext& ctx, CorrelationId corr) {
  Effects fx;
  Endpoint self = Endpoint::ue(dev.id);
  ConvergentState st = state_in(dev, ctx.slice);
  auto illegal = [&](const std::string& why) {
    return IllegalEventError(dev.id.str() + ": " + why + " (state " + std::string(to_string(st)) + " in " +
                             ctx.slice.str() + ")");
  };

  switch (ev.kind) {
    case UeEventKind::Attach: {
      if (st != ConvergentState::Detached) throw illegal("attach while not detached");
      if (dev.attaching) throw illegal("attach already in progress");
      Payload p{{"dev", dev.id.str()}, {"node", dev.node}, {"nets", std::to_string(dev.nets)}};
      if (const auto* an = access_of(ctx, dev.node)) p["tech"] = std::string(to_string(an->tech));
      auto b = dev.bindings.find(ctx.slice);
      if (!dev.ticket.empty()) {
        p["ticket"] = dev.ticket;
        p["suci"] = dev.suci;
        dev.ticket.clear();
      } else if (!dev.authenticated_once) {
        p["supi"] = dev.supi.str();
      } else if (b != dev.bindings.end() && !b->second.pseudonym.empty()) {
        p["pseud"] = b->second.pseudonym.str();
      } else {
        p["suci"] = dev.suci;
      }
      if (ctx.scheme == AuthScheme::LowSecure) p["token"] = derive(dev.credential, "-");
      binding(dev, ctx.slice).state = ConvergentState::Authenticating;
      dev.attaching = ctx.slice;
      fx.send(K::AttachRequest, self, to_cn(ctx, dev, Role::CM), corr, std::move(p));
      return fx;
    }
    case UeEventKind::Detach: {
      if (st != ConvergentState::SessionActive && st != ConvergentState::Attached) throw illegal("detach while not attached");
      fx.send(K::SessionRelease, self, to_cn(ctx, dev, Role::CM), corr, {{"dev", dev.id.str()}, {"op", "detach"}});
      return fx;
    }
    case UeEventKind::Move: {
      if (st != ConvergentState::SessionActive) throw illegal("move without an active session");
      const AccessNode* target = access_of(ctx, ev.target);
      if (!target) throw illegal("unknown target access node " + ev.target);
      if (ev.target == dev.node) throw illegal("already at " + ev.target);
      if (!ctx.has_mm) {
        fx.event("MobilityUnsupported", dev.id.str(), {{"slice", ctx.slice.str()}, {"target", ev.target}});
        return fx;
      }
      fx.send(K::HandoverPrepare, self, to_cn(ctx, dev, Role::CM), corr,
              {{"dev", dev.id.str()}, {"target", ev.target}, {"tech", std::string(to_string(target->tech))}});
      return fx;
    }
    case UeEventKind::TrafficStart:
      if (st != ConvergentState::SessionActive) throw illegal("traffic without an active session");
      if (ev.rate < 1) throw illegal("traffic rate must be positive");
      dev.traffic_rate[ctx.slice] = ev.rate;
      fx.event("traffic", dev.id.str(), {{"rate", std::to_string(ev.rate)}, {"slice", ctx.slice.str()}});
      return fx;
    case UeEventKind::TrafficStop:
      if (!dev.traffic_rate.count(ctx.slice)) throw illegal("no traffic to stop");
      dev.traffic_rate.erase(ctx.slice);
      fx.event("traffic", dev.id.str(), {{"rate", "0"}, {"slice", ctx.slice.str()}});
      return fx;
    case UeEventKind::Idle: {
      if (st != ConvergentState::SessionActive) throw illegal("idle without an active session");
      if (dev.idle) throw illegal("already idle");
      dev.idle = true;
      Payload p{{"dev", dev.id.str()}, {"node", dev.node}, {"state", "idle"}};
      if (const auto* an = access_of(ctx, dev.node)) p["area"] = an->area;
      Role to = ctx.has_mm ? Role::MM : Role::CM;
      fx.send(K::LocationUpdate, self, to_cn(ctx, dev, to), corr, std::move(p));
      return fx;
    }
    case UeEventKind::Unreachable:
      if (!dev.reachable) throw illegal("already unreachable");
      dev.reachable = false;
      fx.event("unreachable", dev.id.str());
      return fx;
  }
  return fx;
}

Effects ue_receive(SimDevice& dev, const SignalMessage& msg, const UeContext& ctx) {
  Effects fx;
  Endpoint self = Endpoint::ue(dev.id);
  switch (msg.kind) {
    case K::AuthChallenge:
      fx.send(K::AuthResponse, self, to_cn(ctx, dev, Role::SAM), msg.correlation_id,
              {{"dev", dev.id.str()}, {"res", derive(dev.credential, msg.field_or("nonce"))}});
      return fx;
    case K::AuthResponse:
      if (msg.field_or("verdict") == "fail") {
        if (dev.attaching) dev.bindings.erase(*dev.attaching);
        dev.attaching.reset();
        fx.event("attach-failed", dev.id.str(), {{"reason", msg.field_or("reason")}, {"slice", ctx.slice.str()}});
      }
      return fx;
    case K::SessionEstablish: {
      SliceId slice(msg.field_or("slice", ctx.slice.str()));
      if (dev.attaching && *dev.attaching != slice) dev.bindings.erase(*dev.attaching);
      dev.attaching.reset();
      auto& b = binding(dev, slice);
      b.state = ConvergentState::SessionActive;
      b.session = SessionId(msg.field_or("session"));
      b.flow = FlowId(msg.field_or("flow"));
      b.addresses = split(msg.field_or("addr"), ',');
      if (auto p = msg.field("pseud")) b.pseudonym = Pseudonym(*p);
      dev.authenticated_once = true;
      fx.event("ue-session", dev.id.str(), {{"slice", slice.str()}, {"session", b.session.str()}});
      return fx;
    }
    case K::SliceRedirect:
      if (dev.attaching) dev.bindings.erase(*dev.attaching);
      dev.attaching.reset();
      dev.authenticated_once = true;
      dev.ticket = msg.field_or("ticket");
      if (auto s = msg.field("suci"); s && !s->empty()) dev.suci = *s;
      dev.redirect_target = SliceId(msg.field_or("target"));
      fx.event("ue-redirect", dev.id.str(), {{"from", ctx.slice.str()}, {"to", dev.redirect_target->str()}});
      return fx;
    case K::HandoverExecute:
      dev.node = msg.field_or("target");
      fx.event("ue-moved", dev.id.str(), {{"node", dev.node}});
      return fx;
    case K::Page: {
      std::string node = msg.field_or("node");
      if (!dev.reachable || !dev.idle || node != dev.node) return fx;
      dev.idle = false;
      fx.send(K::Page, self, ctx.peers.at(Role::AF), msg.correlation_id,
              {{"dev", dev.id.str()}, {"node", node}, {"resp", "1"}});
      return fx;
    }
    case K::SessionRelease: {
      dev.bindings.erase(ctx.slice);
      dev.traffic_rate.erase(ctx.slice);
      fx.event("ue-released", dev.id.str(), {{"slice", ctx.slice.str()}, {"cause", msg.field_or("cause")}});
      return fx;
    }
    default:
      fx.event("Dropped", dev.id.str(), {{"kind", std::string(to_string(msg.kind))}, {"at", "UE"}});
      return fx;
  }
}

}  // namespace ngcp
