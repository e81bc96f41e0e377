#include "ngcp/blocks/fm.hpp"

#include <sstream>

#include "ngcp/textrec.hpp"

namespace ngcp {

namespace {

using K = ProcedureKind;

constexpr EnumTable<PathStrategy, 2> kStrategies{{
    {PathStrategy::ShortestPath, "ShortestPath"},
    {PathStrategy::LoadDistribution, "LoadDistribution"},
}};

struct Ratio {
  long long num = 0;
  long long den = 1;
  bool operator<(const Ratio& o) const { return num * o.den < o.num * den; }
  bool operator==(const Ratio& o) const { return num * o.den == o.num * den; }
};

std::vector<std::string> shortest_path(const Graph& g, const std::string& ingress, const std::string& egress,
                                       const std::function<bool(const LinkKey&, const LinkSpec&)>& usable) {
  auto dist = shortest_latencies(g, egress, usable);
  if (!dist.count(ingress)) return {};
  std::vector<std::string> path{ingress};
  std::string u = ingress;
  while (u != egress) {
    for (const auto& v : g.neighbors(u)) {
      LinkKey key(u, v);
      const auto& spec = g.links.at(key);
      auto dv = dist.find(v);
      if (!usable(key, spec) || dv == dist.end()) continue;
      if (dv->second + spec.latency == dist.at(u)) {
        u = v;
        break;
      }
    }
    path.push_back(u);
  }
  return path;
}

struct LoadSearch {
  const FmState& s;
  const std::function<bool(const LinkKey&, const LinkSpec&)>& usable;
  std::string egress;
  long long bound_x100;  // latency * 100 must not exceed this
  int demand;
  std::vector<std::string> cur;
  std::set<std::string> on_path;
  std::vector<std::string> best;
  Ratio best_util;
  bool found = false;

  Ratio utilization(const std::vector<std::string>& p) const {
    Ratio worst{0, 1};
    for (std::size_t i = 0; i + 1 < p.size(); ++i) {
      LinkKey key(p[i], p[i + 1]);
      const auto& spec = s.topology.links.at(key);
      Ratio u{s.reserved_on(key) + s.observed_on(key) + demand, spec.capacity};
      if (worst < u) worst = u;
    }
    return worst;
  }

  void dfs(const std::string& u, long long lat) {
    if (u == egress) {
      Ratio util = utilization(cur);
      if (!found || util < best_util || (util == best_util && cur < best)) {
        best = cur;
        best_util = util;
        found = true;
      }
      return;
    }
    for (const auto& v : s.topology.neighbors(u)) {
      if (on_path.count(v)) continue;
      LinkKey key(u, v);
      const auto& spec = s.topology.links.at(key);
      if (!usable(key, spec)) continue;
      long long nl = lat + spec.latency;
      if (nl * 100 > bound_x100) continue;
      cur.push_back(v);
      on_path.insert(v);
      dfs(v, nl);
      on_path.erase(v);
      cur.pop_back();
    }
  }
};

void add_reservation(FmState& s, const std::vector<std::string>& nodes, int amount) {
  if (amount == 0) return;
  for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
    LinkKey key(nodes[i], nodes[i + 1]);
    s.reserved[key] += amount;
    if (s.reserved[key] == 0) s.reserved.erase(key);
  }
}

SignalMessage sbi_command(const FmState& s, const std::string& node, CorrelationId corr, Payload p) {
  SignalMessage m;
  m.kind = K::FlowConfigure;
  m.source = Endpoint::of(s.self);
  m.destination = Endpoint::dplane(node);
  m.iface = InterfacePoint::I4_SBI;
  m.correlation_id = corr;
  m.payload = std::move(p);
  return m;
}

Outgoing as_outgoing(const SignalMessage& m) {
  return {m.kind, m.source, m.destination, m.iface, m.correlation_id, m.payload};
}

std::vector<std::pair<std::string, std::string>> parse_pairs(const std::string& s) {
  std::vector<std::pair<std::string, std::string>> out;
  if (s.empty() || s == "-") return out;
  for (const auto& item : split(s, ',')) {
    auto colon = item.rfind(':');
    if (colon == std::string::npos) continue;
    out.emplace_back(item.substr(0, colon), item.substr(colon + 1));
  }
  return out;
}

Effects install_for(FmState& s, const SignalMessage& msg, const SbiAdaptor& sbi, ForwardingPath& out_path) {
  Effects fx;
  FlowId flow(msg.field_or("flow"));
  out_path = fm_define_path(s, flow, msg.field_or("ingress"), msg.field_or("anchor"), msg.field_or("qos", "default"));
  out_path.dev = DeviceId(msg.field_or("dev"));
  out_path.node = msg.field_or("node");
  for (auto& o : fm_apply(s, out_path, sbi, msg.correlation_id)) fx.out.push_back(std::move(o));
  if (auto it = s.path_table.find(out_path.tag); it != s.path_table.end()) it->second = out_path;
  return fx;
}

}  // namespace

std::string_view to_string(PathStrategy s) { return enum_name(kStrategies, s); }
bool parse_strategy(std::string_view s, PathStrategy& out) { return enum_parse(kStrategies, s, out); }

int FmState::reserved_on(const LinkKey& k) const {
  auto it = reserved.find(k);
  return it == reserved.end() ? 0 : it->second;
}

int FmState::observed_on(const LinkKey& k) const {
  auto it = observed.find(k);
  return it == observed.end() ? 0 : it->second;
}

int FmState::total_reserved() const {
  int t = 0;
  for (const auto& [k, v] : reserved) t += v;
  return t;
}

std::vector<std::string> FmState::tags_of(const FlowId& flow) const {
  std::vector<std::string> out;
  for (const auto& [tag, p] : path_table)
    if (p.flow == flow) out.push_back(tag);
  return out;
}

ForwardingPath fm_define_path(FmState& s, const FlowId& flow, const std::string& ingress, const std::string& egress,
                              const std::string& qos) {
  const auto& g = s.topology;
  if (!g.nodes.count(ingress) || !g.nodes.count(egress))
    throw NoPathError("unknown endpoint " + (g.nodes.count(ingress) ? egress : ingress) + " in slice " +
                      s.slice.str());
  QosPolicy pol;
  if (auto it = s.qos_policies.find(qos); it != s.qos_policies.end()) pol = it->second;
  int demand = pol.reserve;
  PathStrategy strategy = pol.strategy.value_or(s.strategy);

  auto any = [](const LinkKey&, const LinkSpec& spec) { return spec.capacity > 0; };
  std::function<bool(const LinkKey&, const LinkSpec&)> usable = [&](const LinkKey& k, const LinkSpec& spec) {
    return spec.capacity > 0 && spec.capacity - s.reserved_on(k) >= demand;
  };

  if (!shortest_latencies(g, ingress, any).count(egress))
    throw NoPathError(ingress + " and " + egress + " are disconnected");
  auto dist = shortest_latencies(g, ingress, usable);
  if (!dist.count(egress))
    throw CapacityError("no path from " + ingress + " to " + egress + " can reserve " + std::to_string(demand) +
                        " units");

  ForwardingPath path;
  if (strategy == PathStrategy::ShortestPath) {
    path.nodes = shortest_path(g, ingress, egress, usable);
  } else {
    LoadSearch search{s, usable, egress, dist.at(egress) * (100 + s.stretch_percent), demand, {ingress}, {ingress}, {}, {0, 1}, false};
    search.dfs(ingress, 0);
    path.nodes = search.best;
  }
  path.tag = "t" + std::to_string(++s.tag_counter);
  path.flow = flow;
  path.qos = qos;
  path.reserved = demand;
  add_reservation(s, path.nodes, demand);
  return path;
}

std::vector<Outgoing> fm_apply(FmState& s, const ForwardingPath& path, const SbiAdaptor& sbi, CorrelationId corr) {
  std::vector<Outgoing> out;
  for (std::size_t i = 0; i < path.nodes.size(); ++i) {
    std::string next = i + 1 < path.nodes.size() ? path.nodes[i + 1] : "egress";
    auto cmd = sbi_command(s, path.nodes[i], corr,
                           {{"flow", path.flow.str()},
                            {"tag", path.tag},
                            {"op", "install"},
                            {"next", next},
                            {"hop", std::to_string(i)}});
    Verdict v = sbi(cmd);
    if (!v) {
      for (std::size_t j = 0; j < i; ++j)
        sbi(sbi_command(s, path.nodes[j], corr,
                        {{"flow", path.flow.str()}, {"tag", path.tag}, {"op", "remove"}, {"mode", "now"}}));
      add_reservation(s, path.nodes, -path.reserved);
      throw AdaptorError("node " + path.nodes[i] + " rejected " + path.tag + ": " + v.detail);
    }
    out.push_back(as_outgoing(cmd));
  }
  s.path_table[path.tag] = path;
  return out;
}

std::vector<Outgoing> fm_release(FmState& s, const std::string& tag, const std::string& mode, const SbiAdaptor& sbi,
                                 CorrelationId corr) {
  std::vector<Outgoing> out;
  auto it = s.path_table.find(tag);
  if (it == s.path_table.end()) return out;
  const auto& path = it->second;
  for (const auto& node : path.nodes) {
    auto cmd = sbi_command(s, node, corr,
                           {{"flow", path.flow.str()}, {"tag", tag}, {"op", "remove"}, {"mode", mode}});
    sbi(cmd);
    out.push_back(as_outgoing(cmd));
  }
  add_reservation(s, path.nodes, -path.reserved);
  s.path_table.erase(it);
  return out;
}

Effects fm_request_page(FmState& s, const DeviceId& dev, CorrelationId corr) {
  Effects fx;
  if (!s.peers.has(Role::MM)) {
    fx.event("PagingUnsupported", dev.str(), {{"slice", s.slice.str()}});
    return fx;
  }
  fx.send(K::Page, Endpoint::of(s.self), s.peers.at(Role::MM), corr, {{"dev", dev.str()}});
  return fx;
}

Effects fm_handle(FmState& s, const SignalMessage& msg, Tick, const SbiAdaptor& sbi) {
  Effects fx;
  Endpoint self = Endpoint::of(s.self);
  DeviceId dev(msg.field_or("dev"));
  FlowId flow(msg.field_or("flow"));

  switch (msg.kind) {
    case K::SessionEstablish: {
      std::string op = msg.field_or("op", "establish");
      Payload reply{{"dev", dev.str()}, {"session", msg.field_or("session")}, {"flow", flow.str()}, {"op", op}};
      auto old_tags = s.tags_of(flow);
      ForwardingPath path;
      try {
        fx.append(install_for(s, msg, sbi, path));
      } catch (const Error& e) {
        reply["result"] = "fail";
        reply["reason"] = e.kind();
        fx.event(e.kind(), dev.str(), {{"detail", e.what()}});
        fx.send(K::SessionEstablish, self, s.peers.at(Role::CM), msg.correlation_id, std::move(reply));
        return fx;
      }
      if (op == "reselect") {
        for (const auto& t : old_tags)
          for (auto& o : fm_release(s, t, "drain", sbi, msg.correlation_id)) fx.out.push_back(std::move(o));
      } else if (s.peers.has(Role::AF) && !path.node.empty()) {
        fx.send(K::FlowConfigure, self, s.peers.at(Role::AF), msg.correlation_id,
                {{"dev", dev.str()}, {"flow", flow.str()}, {"node", path.node}, {"op", "install"}});
      }
      reply["result"] = "ok";
      reply["tag"] = path.tag;
      reply["anchor"] = msg.field_or("anchor");
      fx.send(K::SessionEstablish, self, s.peers.at(Role::CM), msg.correlation_id, std::move(reply));
      return fx;
    }
    case K::FlowConfigure: {
      Payload reply{{"dev", dev.str()}, {"flow", flow.str()}, {"op", "install"}};
      ForwardingPath path;
      try {
        fx.append(install_for(s, msg, sbi, path));
        reply["result"] = "ok";
        reply["tag"] = path.tag;
      } catch (const Error& e) {
        reply["result"] = "fail";
        reply["reason"] = e.kind();
        fx.event(e.kind(), dev.str(), {{"detail", e.what()}});
      }
      fx.send(K::FlowConfigure, self, msg.source, msg.correlation_id, std::move(reply));
      return fx;
    }
    case K::SessionRelease: {
      std::string op = msg.field_or("op");
      if (op == "handover") {
        for (auto& o : fm_release(s, msg.field_or("tag"), msg.field_or("mode", "now"), sbi, msg.correlation_id))
          fx.out.push_back(std::move(o));
        fx.send(K::SessionRelease, self, msg.source, msg.correlation_id,
                {{"dev", dev.str()}, {"flow", flow.str()}, {"op", op}, {"result", "ok"}});
        return fx;
      }
      std::string node;
      for (const auto& t : s.tags_of(flow)) {
        node = s.path_table.at(t).node.empty() ? node : s.path_table.at(t).node;
        for (auto& o : fm_release(s, t, "now", sbi, msg.correlation_id)) fx.out.push_back(std::move(o));
      }
      if (s.peers.has(Role::AF) && !node.empty())
        fx.send(K::FlowConfigure, self, s.peers.at(Role::AF), msg.correlation_id,
                {{"dev", dev.str()}, {"flow", flow.str()}, {"node", node}, {"op", "remove"}});
      fx.send(K::SessionRelease, self, msg.source, msg.correlation_id,
              {{"dev", dev.str()}, {"session", msg.field_or("session")}, {"op", op}, {"result", "ok"}});
      return fx;
    }
    case K::FlowNotify: {
      s.observed.clear();
      for (const auto& [link, units] : parse_pairs(msg.field_or("loads"))) {
        auto tilde = link.find('~');
        if (tilde == std::string::npos) continue;
        s.observed[LinkKey(link.substr(0, tilde), link.substr(tilde + 1))] = std::stoi(units);
      }
      std::string lat = msg.field_or("lat");
      if (s.peers.has(Role::CGHF) && !lat.empty() && lat != "-")
        fx.send(K::ContextPublish, self, s.peers.at(Role::CGHF), msg.correlation_id,
                {{"source", "FM"}, {"metric", "flow-latency"}, {"samples", lat}});
      return fx;
    }
    case K::ContextNotify:
      return fx;
    default:
      fx.event("Dropped", dev.str(), {{"kind", std::string(to_string(msg.kind))}, {"at", "FM"}});
      return fx;
  }
}

std::string FmState::canonical() const {
  std::ostringstream os;
  os << "FM " << self.str() << " " << to_string(strategy) << " tags=" << tag_counter << "\n";
  for (const auto& [k, v] : reserved) os << "res " << k.str() << " " << v << "\n";
  for (const auto& [k, v] : observed) os << "obs " << k.str() << " " << v << "\n";
  for (const auto& [tag, p] : path_table)
    os << "path " << tag << " " << p.flow.str() << " " << p.dev.str() << " " << p.node << " " << join(p.nodes, ",")
       << " " << p.qos << " " << p.reserved << "\n";
  return os.str();
}

}  // namespace ngcp
