#include "ngcp/blocks/mm.hpp"

#include <sstream>

#include "ngcp/textrec.hpp"

namespace ngcp {

namespace {

using K = ProcedureKind;

constexpr EnumTable<HandoverStyle, 2> kStyles{{
    {HandoverStyle::BreakBeforeMake, "BreakBeforeMake"},
    {HandoverStyle::MakeBeforeBreak, "MakeBeforeBreak"},
}};
constexpr EnumTable<Anchoring, 2> kAnchoring{{
    {Anchoring::Centralised, "Centralised"},
    {Anchoring::Distributed, "Distributed"},
}};
constexpr EnumTable<PagingState, 3> kPaging{{
    {PagingState::Reachable, "Reachable"},
    {PagingState::Idle, "Idle"},
    {PagingState::PagingInProgress, "PagingInProgress"},
}};
constexpr EnumTable<PlanStep, 3> kSteps{{
    {PlanStep::InstallNewPath, "InstallNewPath"},
    {PlanStep::ExecuteHandover, "ExecuteHandover"},
    {PlanStep::ReleaseOldPath, "ReleaseOldPath"},
}};

void emit_step(MmState& s, Effects& fx, const HandoverRun& run) {
  Endpoint self = Endpoint::of(s.self);
  const auto& r = run.req;
  switch (run.plan[run.step]) {
    case PlanStep::InstallNewPath:
      fx.send(K::FlowConfigure, self, s.peers.at(Role::FM), run.corr,
              {{"dev", r.dev.str()},
               {"session", r.session.str()},
               {"flow", r.flow.str()},
               {"ingress", r.ingress},
               {"anchor", r.anchor},
               {"qos", r.qos},
               {"node", r.target},
               {"op", "install"}});
      break;
    case PlanStep::ExecuteHandover:
      fx.send(K::HandoverExecute, self, s.peers.at(Role::AF), run.corr,
              {{"dev", r.dev.str()}, {"target", r.target}, {"tag", run.new_tag.empty() ? "-" : run.new_tag}});
      break;
    case PlanStep::ReleaseOldPath:
      fx.send(K::SessionRelease, self, s.peers.at(Role::FM), run.corr,
              {{"dev", r.dev.str()},
               {"flow", r.flow.str()},
               {"tag", r.old_tag},
               {"mode", run.style == HandoverStyle::MakeBeforeBreak ? "drain" : "now"},
               {"op", "handover"}});
      break;
  }
}

/// Called with the ack of the current step.
Effects advance(MmState& s, const DeviceId& dev, PlanStep acked) {
  Effects fx;
  auto it = s.handovers.find(dev);
  if (it == s.handovers.end() || it->second.plan[it->second.step] != acked) {
    fx.event("Dropped", dev.str(), {{"kind", std::string(to_string(acked))}, {"at", "MM"}});
    return fx;
  }
  auto& run = it->second;
  fx.event("handover-step", dev.str(), {{"step", std::string(to_string(acked))}});
  if (++run.step < run.plan.size()) {
    emit_step(s, fx, run);
    return fx;
  }
  fx.send(K::HandoverExecute, Endpoint::of(s.self), s.peers.at(Role::CM), run.corr,
          {{"dev", dev.str()},
           {"phase", "complete"},
           {"session", run.req.session.str()},
           {"target", run.req.target},
           {"anchor", run.req.anchor},
           {"tag", run.new_tag}});
  s.handovers.erase(it);
  return fx;
}

}  // namespace

std::string_view to_string(HandoverStyle s) { return enum_name(kStyles, s); }
bool parse_style(std::string_view s, HandoverStyle& out) { return enum_parse(kStyles, s, out); }
std::string_view to_string(Anchoring a) { return enum_name(kAnchoring, a); }
bool parse_anchoring(std::string_view s, Anchoring& out) { return enum_parse(kAnchoring, s, out); }
std::string_view to_string(PagingState s) { return enum_name(kPaging, s); }
std::string_view to_string(PlanStep s) { return enum_name(kSteps, s); }

std::vector<PlanStep> handover_plan(HandoverStyle style) {
  if (style == HandoverStyle::MakeBeforeBreak)
    return {PlanStep::InstallNewPath, PlanStep::ExecuteHandover, PlanStep::ReleaseOldPath};
  return {PlanStep::ReleaseOldPath, PlanStep::ExecuteHandover, PlanStep::InstallNewPath};
}

std::string MmState::area_of(const std::string& node) const {
  for (const auto& [area, nodes] : area_nodes)
    for (const auto& n : nodes)
      if (n == node) return area;
  return {};
}

Effects mm_handover(MmState& s, const HandoverRequest& req, CorrelationId corr) {
  if (req.session.empty()) throw NoSessionError(req.dev.str() + " has no active session");
  if (s.policy.forbidden.count(req.tech))
    throw PolicyForbidsError("slice " + s.slice.str() + " forbids handover to " + std::string(to_string(req.tech)) +
                             " access");
  Effects fx;
  if (s.handovers.count(req.dev)) {
    fx.event("HandoverBusy", req.dev.str());
    return fx;
  }
  HandoverRun run;
  run.req = req;
  run.style = s.policy.style;
  run.plan = handover_plan(run.style);
  run.corr = corr;
  s.tracking_areas[req.dev] = req.area.empty() ? s.area_of(req.target) : req.area;
  fx.event("handover-start", req.dev.str(),
           {{"style", std::string(to_string(run.style))}, {"target", req.target}, {"session", req.session.str()}});
  emit_step(s, fx, run);
  s.handovers[req.dev] = std::move(run);
  return fx;
}

Effects mm_page(MmState& s, const DeviceId& dev, CorrelationId corr, Tick tick) {
  auto st = s.paging_state.find(dev);
  if (st == s.paging_state.end() || st->second != PagingState::Idle)
    throw NotIdleError(dev.str() + " is not idle");
  Effects fx;
  auto area = s.tracking_areas[dev];
  auto nodes = s.area_nodes.find(area);
  st->second = PagingState::PagingInProgress;
  s.paging_deadline[dev] = tick + s.paging_timeout;
  s.paging_corr[dev] = corr;
  int count = 0;
  if (nodes != s.area_nodes.end()) {
    for (const auto& n : nodes->second) {
      fx.send(K::Page, Endpoint::of(s.self), s.peers.at(Role::AF), corr, {{"dev", dev.str()}, {"node", n}});
      ++count;
    }
  }
  fx.event("paging", dev.str(), {{"area", area}, {"nodes", std::to_string(count)}});
  return fx;
}

Effects mm_tick(MmState& s, Tick tick) {
  Effects fx;
  for (auto it = s.paging_deadline.begin(); it != s.paging_deadline.end();) {
    if (it->second > tick) {
      ++it;
      continue;
    }
    s.paging_state[it->first] = PagingState::Idle;
    fx.event("PagingFailed", it->first.str(), {{"slice", s.slice.str()}});
    s.paging_corr.erase(it->first);
    it = s.paging_deadline.erase(it);
  }
  return fx;
}

Effects mm_handle(MmState& s, const SignalMessage& msg, Tick tick) {
  DeviceId dev(msg.field_or("dev"));
  switch (msg.kind) {
    case K::HandoverPrepare: {
      HandoverRequest req;
      req.dev = dev;
      req.session = SessionId(msg.field_or("session"));
      req.flow = FlowId(msg.field_or("flow"));
      req.target = msg.field_or("target");
      parse_tech(msg.field_or("tech"), req.tech);
      req.area = msg.field_or("area");
      req.ingress = msg.field_or("ingress");
      req.anchor = msg.field_or("anchor");
      req.old_tag = msg.field_or("tag");
      req.qos = msg.field_or("qos", "default");
      return mm_handover(s, req, msg.correlation_id);
    }
    case K::FlowConfigure: {
      auto it = s.handovers.find(dev);
      if (it != s.handovers.end() && msg.field_or("result") != "ok") {
        Effects fx;
        fx.event("HandoverFailed", dev.str(), {{"reason", msg.field_or("reason")}});
        s.handovers.erase(it);
        return fx;
      }
      if (it != s.handovers.end()) it->second.new_tag = msg.field_or("tag");
      return advance(s, dev, PlanStep::InstallNewPath);
    }
    case K::PathRecordUpdate:
      return advance(s, dev, PlanStep::ExecuteHandover);
    case K::SessionRelease:
      return advance(s, dev, PlanStep::ReleaseOldPath);
    case K::Page: {
      Effects fx;
      if (msg.source.is_bb(Role::FM)) return mm_page(s, dev, msg.correlation_id, tick);
      if (msg.field_or("resp") != "1") return fx;
      auto st = s.paging_state.find(dev);
      if (st == s.paging_state.end() || st->second != PagingState::PagingInProgress) return fx;
      st->second = PagingState::Reachable;
      s.paging_deadline.erase(dev);
      s.paging_corr.erase(dev);
      std::string node = msg.field_or("node");
      s.tracking_areas[dev] = s.area_of(node);
      fx.event("paging-ok", dev.str(), {{"node", node}});
      return fx;
    }
    case K::LocationUpdate: {
      Effects fx;
      std::string area = msg.field_or("area");
      if (area.empty()) area = s.area_of(msg.field_or("node"));
      s.tracking_areas[dev] = area;
      bool idle = msg.field_or("state") == "idle";
      s.paging_state[dev] = idle ? PagingState::Idle : PagingState::Reachable;
      fx.event("location", dev.str(), {{"area", area}, {"state", idle ? "idle" : "active"}});
      return fx;
    }
    default: {
      Effects fx;
      fx.event("Dropped", dev.str(), {{"kind", std::string(to_string(msg.kind))}, {"at", "MM"}});
      return fx;
    }
  }
}

std::string MmState::canonical() const {
  std::ostringstream os;
  os << "MM " << self.str() << " " << to_string(policy.style) << "\n";
  for (const auto& [dev, a] : tracking_areas) os << "ta " << dev.str() << " " << a << "\n";
  for (const auto& [dev, p] : paging_state) os << "paging " << dev.str() << " " << to_string(p) << "\n";
  for (const auto& [dev, t] : paging_deadline) os << "deadline " << dev.str() << " " << t << "\n";
  for (const auto& [dev, run] : handovers)
    os << "ho " << dev.str() << " " << run.step << " " << run.req.target << " " << run.new_tag << "\n";
  return os.str();
}

}  // namespace ngcp
