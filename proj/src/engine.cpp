#include "ngcp/engine.hpp"

#include <algorithm>
#include <fstream>
#include <future>
#include <mutex>
#include <sstream>

#include "ngcp/hash.hpp"

namespace ngcp {

namespace {

using K = ProcedureKind;

constexpr EnumTable<AttachMethod, 2> kMethods{{
    {AttachMethod::GlobalSelection, "global"},
    {AttachMethod::DefaultSliceRedirect, "default"},
}};

const std::set<std::string> kEvents = {"attach", "detach",  "move",  "traffic-start", "traffic-stop",
                                       "idle",   "page",    "unreachable", "sso",     "degrade",
                                       "down",   "sample",  "teardown"};

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw ScenarioError("cannot read " + p.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::vector<std::string> doc_lines(const std::string& text) {
  auto lines = split(text, '\n');
  if (!lines.empty() && lines.back().empty()) lines.pop_back();
  return lines;
}

struct Pending {
  Tick at = 0;
  int prio = 0;
  MsgId id = 0;
  Endpoint recipient;
  SignalMessage msg;
};

bool pending_before(const Pending& a, const Pending& b) {
  return std::tie(a.at, a.prio, a.id, a.recipient) < std::tie(b.at, b.prio, b.id, b.recipient);
}

struct OpenProc {
  std::string name;
  Tick start = 0;
  DeviceId dev;
};

bool is_failure_event(const std::string& name) {
  static const std::set<std::string> failures = {"SessionFailed", "AttachRejected", "HandoverFailed", "HandoverBusy",
                                                 "PagingUnsupported", "DetachIgnored"};
  return failures.count(name) > 0 || (name.size() > 5 && name.compare(name.size() - 5, 5, "Error") == 0) ||
         name == "PermissionDenied" || name == "UnknownDevice";
}

class Simulation {
 public:
  Simulation(const InputBundle& in, const RunOptions& opts) : in_(in), opts_(opts) {}

  RunResult execute() {
    try {
      setup();
    } catch (const ScenarioError&) {
      throw;
    } catch (const Error& e) {
      throw ScenarioError(e.what());
    }
    for (now_ = 0; now_ <= sc_.ticks; ++now_) {
      while (next_event_ < sc_.script.size() && sc_.script[next_event_].tick == now_)
        script(sc_.script[next_event_++]);
      deliver_due();
      timers();
      dplane();
    }
    --now_;
    return finish();
  }

 private:
  // ------------------------------------------------------------- setup

  void setup() {
    const std::string& text = in_.get(in_.scenario_key);
    sc_ = parse_scenario(text, in_.scenario_key);
    seed_ = opts_.seed.value_or(sc_.seed);

    const std::string& key = in_.scenario_key;
    auto catalog_key = resolve_key(key, sc_.catalog_ref);
    auto defs = grouping_for(in_.get(catalog_key), catalog_key);
    auto topo_key = resolve_key(key, sc_.topology_ref);
    infra_.topology = load_topology(in_.get(topo_key), topo_key);

    for (const auto& d : sc_.devices) {
      if (!infra_.topology.access.count(d.node))
        throw ScenarioError("device " + d.id.str() + " starts at unknown access node " + d.node);
      provisioned_[d.id] = {d.supi, d.credential, d.subscription};
      SimDevice dev;
      dev.id = d.id;
      dev.supi = d.supi;
      dev.credential = d.credential;
      dev.suci = conceal(d.supi, sc_.operator_key);
      dev.subscription = d.subscription;
      dev.mode = d.mode;
      dev.nets = d.nets;
      dev.node = d.node;
      devices_[d.id] = dev;
      specs_[d.id] = d;
    }

    DocResolver resolver = [&](const std::string& from, const std::string& ref) {
      auto k = resolve_key(from, ref);
      return std::make_pair(k, in_.get(k));
    };
    auto load = [&](const std::string& ref, bool global) {
      auto k = resolve_key(key, ref);
      auto bp = load_blueprint(in_.get(k), k, resolver);
      if (global != (bp.scope == SliceScope::Global))
        throw ScenarioError(k + ": slice " + bp.slice_id.str() + (global ? " is not" : " is") +
                            " a global domain");
      if (opts_.fabric) bp.fabric_model = *opts_.fabric;
      auto v = validate_blueprint(bp, defs);
      if (!v.ok()) throw ScenarioError(k + ": " + join(v.violations, "; "));
      if (slices_.count(bp.slice_id)) throw ScenarioError(k + ": duplicate slice " + bp.slice_id.str());
      return bp;
    };

    std::set<BbInstanceId> local_cms;
    for (const auto& ref : sc_.blueprint_refs) {
      auto bp = load(ref, false);
      auto inst = instantiate(bp, infra_, seed_ ^ fnv1a(bp.slice_id.str()), provisioned_, sc_.operator_key);
      if (inst.cm) local_cms.insert(inst.cm->self);
      slices_.emplace(bp.slice_id, std::move(inst));
    }
    if (sc_.global_ref) {
      auto bp = load(*sc_.global_ref, true);
      auto inst = instantiate(bp, infra_, seed_ ^ fnv1a(bp.slice_id.str()), provisioned_, sc_.operator_key, local_cms);
      for (const auto& [id, sl] : slices_)
        if (sl.cm) inst.cm->local_cms[id] = sl.cm->self;
      global_ = bp.slice_id;
      slices_.emplace(bp.slice_id, std::move(inst));
    }
    if (!sc_.default_slice.empty() && !slices_.count(sc_.default_slice))
      throw ScenarioError("default slice " + sc_.default_slice.str() + " is not in the scenario");
    for (const auto& d : sc_.devices) {
      if (d.method == AttachMethod::GlobalSelection && !global_)
        throw ScenarioError("device " + d.id.str() + " uses global selection but no global domain is declared");
    }

    for (auto& [id, sl] : slices_) {
      if (opts_.projections) sl.fabric->set_projections(*opts_.projections);
      operate(sl);
      for (const auto& [role, bb] : sl.ids) owner_[bb] = id;
    }

    line({"RUN",
          {"scenario=" + in_.scenario_key, "seed=" + std::to_string(seed_),
           "fabric=" + (opts_.fabric ? std::string(to_string(*opts_.fabric)) : std::string("-"))}});
    for (const auto& [k, body] : in_.docs)
      for (const auto& l : doc_lines(body)) line({"IN", {k, l}});
    for (const auto& [id, sl] : slices_) {
      const auto& m = sl.fabric->model();
      line({"FAB", {id.str(), std::string(to_string(m.kind)), m.relay_bb ? m.relay_bb->str() : "-"}});
      for (const auto& [role, bb] : sl.ids) line({"BB", {bb.str(), id.str()}});
    }
    for (const auto& [id, d] : devices_) line({"DEV", {id.str(), d.supi.str()}});
  }

  // ------------------------------------------------------------- tracing

  void line(TraceLine l) { trace_ += format_trace_line(l); }

  void trace_event(const std::string& name, const std::string& subject, const Payload& detail) {
    line({"EVT", {std::to_string(now_), name, subject.empty() ? "-" : subject, encode_payload(detail)}});
  }

  void begin_proc(CorrelationId corr, const std::string& name, const DeviceId& dev) {
    procs_[corr] = {name, now_, dev};
    trace_event("begin", dev.str(), {{"proc", name}, {"corr", std::to_string(corr)}});
  }

  void end_proc(CorrelationId corr, const std::string& result, const std::string& only = "") {
    auto it = procs_.find(corr);
    if (it == procs_.end() || (!only.empty() && it->second.name != only)) return;
    trace_event("end", it->second.dev.str(),
                {{"proc", it->second.name}, {"ticks", std::to_string(now_ - it->second.start)}, {"result", result}});
    procs_.erase(it);
  }

  // ------------------------------------------------------------- messages

  std::optional<SliceId> fabric_slice(const SignalMessage& m) const {
    if (m.source.kind == EndpointKind::BB) {
      auto it = owner_.find(m.source.bb);
      if (it != owner_.end()) return it->second;
    }
    if (m.destination.kind == EndpointKind::BB) {
      auto it = owner_.find(m.destination.bb);
      if (it != owner_.end()) return it->second;
    }
    return std::nullopt;
  }

  void enqueue(const Endpoint& to, const SignalMessage& m) {
    queue_.push_back({now_ + 1, priority_class(m.kind), m.msg_id, to, m});
  }

  void emit(const Outgoing& o) {
    SignalMessage m;
    m.msg_id = ++next_msg_;
    m.tick = now_;
    m.kind = o.kind;
    m.source = o.source;
    m.destination = o.destination;
    m.iface = o.iface;
    m.correlation_id = o.correlation_id;
    m.payload = o.payload;

    if (m.iface == InterfacePoint::I4_SBI || m.iface == InterfacePoint::I1) {
      line(msg_line(m, nullptr));
      // Rule commands were applied synchronously by FM's adaptor.
      if (m.destination.kind != EndpointKind::DPlaneNode) enqueue(m.destination, m);
      return;
    }
    auto sid = fabric_slice(m);
    if (!sid) {
      trace_event("UnknownDestinationError", m.payload.count("dev") ? m.payload.at("dev") : "-",
                  {{"kind", std::string(to_string(m.kind))}, {"to", m.destination.str()}});
      return;
    }
    auto& sl = slices_.at(*sid);
    try {
      auto res = sl.fabric->send(m);
      SignalMessage shown = m;
      if (res.deliveries.size() == 1) shown.payload = res.deliveries.front().message.payload;
      line(msg_line(shown, &res.record));
      if (res.record.no_subscriber) trace_event("no-subscriber", m.destination.name, {{"msg", std::to_string(m.msg_id)}});
      for (const auto& d : res.deliveries) enqueue(d.recipient, d.message);
    } catch (const Error& e) {
      trace_event(e.kind(), m.payload.count("dev") ? m.payload.at("dev") : "-", {{"detail", e.what()}});
    }
  }

  void process(Effects fx, CorrelationId corr) {
    for (const auto& e : fx.events) {
      trace_event(e.name, e.subject, e.detail);
      if (e.name == "handover-complete") end_proc(corr, "ok", "move");
      else if (e.name == "MobilityUnsupported") end_proc(corr, "unsupported", "move");
      else if (e.name == "paging-ok") end_proc(corr, "ok", "page");
      else if (e.name == "attach-failed") end_proc(corr, "fail", "attach");
      else if (e.name == "ue-session") end_proc(corr, "ok", "attach");
      else if (e.name == "ue-released") end_proc(corr, "ok", "detach");
      else if (is_failure_event(e.name)) end_proc(corr, e.name);
    }
    for (const auto& o : fx.out) emit(o);
  }

  void deliver_due() {
    std::vector<Pending> due, later;
    for (auto& p : queue_) (p.at == now_ ? due : later).push_back(std::move(p));
    queue_ = std::move(later);
    std::sort(due.begin(), due.end(), pending_before);
    for (const auto& p : due) {
      if (p.recipient.kind == EndpointKind::UE)
        to_ue(p);
      else if (p.recipient.kind == EndpointKind::BB)
        to_bb(p);
    }
  }

  SbiAdaptor sbi_for(SliceInstance& sl) {
    return [&sl](const SignalMessage& m) { return dplane_configure(sl.dplane, m); };
  }

  void to_bb(const Pending& p) {
    const auto& bb = p.recipient.bb;
    const auto& msg = p.msg;
    auto own = owner_.find(bb);
    if (own == owner_.end()) {
      trace_event("UnknownDestinationError", msg.field_or("dev", "-"), {{"to", bb.str()}});
      return;
    }
    auto& sl = slices_.at(own->second);
    if (sl.state != LifecycleState::Operating) {
      trace_event("Rejected", msg.field_or("dev", "-"),
                  {{"kind", std::string(to_string(msg.kind))}, {"slice", sl.id().str()},
                   {"state", std::string(to_string(sl.state))}});
      return;
    }
    Effects fx;
    try {
      switch (bb.role) {
        case Role::AF: fx = af_handle(*sl.af, msg); break;
        case Role::CM: fx = cm_handle(*sl.cm, msg, now_); break;
        case Role::MM: fx = mm_handle(*sl.mm, msg, now_); break;
        case Role::SAM: fx = sam_handle(*sl.sam, msg, now_, sl.rng); break;
        case Role::FM: fx = fm_handle(*sl.fm, msg, now_, sbi_for(sl)); break;
        case Role::CGHF:
          fx = cghf_handle(*sl.cghf, msg, now_, sl.fabric->model().kind == FabricModelKind::PubSub);
          break;
        default: break;
      }
    } catch (const Error& e) {
      fx = Effects{};
      fx.event(e.kind(), msg.field_or("dev", "-"), {{"detail", e.what()}, {"at", bb.str()}});
    }
    process(std::move(fx), msg.correlation_id);
  }

  UeContext ue_context(const SliceId& id) const {
    const auto& sl = slices_.at(id);
    UeContext ctx;
    ctx.slice = id;
    ctx.peers = sl.peers();
    ctx.scheme = sl.blueprint.auth_scheme;
    ctx.has_mm = sl.mm.has_value();
    ctx.access = &infra_.topology.access;
    return ctx;
  }

  std::string ingress_of(const std::string& node) const {
    auto it = infra_.topology.access.find(node);
    return it == infra_.topology.access.end() ? "" : it->second.attach;
  }

  void to_ue(const Pending& p) {
    auto dit = devices_.find(DeviceId(p.recipient.name));
    if (dit == devices_.end()) {
      trace_event("UnknownDevice", p.recipient.name, {{"kind", std::string(to_string(p.msg.kind))}});
      return;
    }
    auto& dev = dit->second;
    auto sid = fabric_slice(p.msg);
    if (!sid) return;
    FlowId released;
    if (p.msg.kind == K::SessionRelease)
      if (auto b = dev.bindings.find(*sid); b != dev.bindings.end()) released = b->second.flow;
    Effects fx = ue_receive(dev, p.msg, ue_context(*sid));
    if (!released.empty()) slices_.at(*sid).dplane.sources.erase(released);
    if (p.msg.kind == K::HandoverExecute) retarget_sources(dev);
    process(std::move(fx), p.msg.correlation_id);

    if (dev.redirect_target) {
      SliceId target = *dev.redirect_target;
      dev.redirect_target.reset();
      auto t = slices_.find(target);
      if (t == slices_.end() || t->second.state != LifecycleState::Operating) {
        trace_event("NoEligibleSliceError", dev.id.str(), {{"detail", "redirect target " + target.str() + " unavailable"}});
        end_proc(p.msg.correlation_id, "NoEligibleSliceError");
        return;
      }
      try {
        process(ue_event(dev, {UeEventKind::Attach, "", 1}, ue_context(target), p.msg.correlation_id),
                p.msg.correlation_id);
      } catch (const Error& e) {
        trace_event(e.kind(), dev.id.str(), {{"detail", e.what()}});
      }
    }
  }

  void retarget_sources(const SimDevice& dev) {
    for (const auto& [sid, b] : dev.bindings) {
      auto sl = slices_.find(sid);
      if (sl == slices_.end() || b.flow.empty()) continue;
      auto src = sl->second.dplane.sources.find(b.flow);
      if (src != sl->second.dplane.sources.end()) src->second.ingress = ingress_of(dev.node);
    }
  }

  // ------------------------------------------------------------- script

  SliceId slice_param(const Record& rec, const SimDevice* dev) const {
    if (auto s = rec.find("slice")) {
      if (!slices_.count(SliceId(*s))) throw IllegalEventError("unknown slice " + *s);
      return SliceId(*s);
    }
    if (dev) {
      for (const auto& [sid, b] : dev->bindings)
        if (b.state == ConvergentState::SessionActive) return sid;
      for (const auto& [sid, b] : dev->bindings)
        if (b.state != ConvergentState::Detached) return sid;
      throw IllegalEventError(dev->id.str() + " is not attached to any slice");
    }
    throw IllegalEventError("event needs slice=");
  }

  SliceInstance& operating(const SliceId& id) {
    auto& sl = slices_.at(id);
    if (sl.state != LifecycleState::Operating)
      throw IllegalEventError("slice " + id.str() + " is " + std::string(to_string(sl.state)));
    return sl;
  }

  void script(const ScriptEvent& ev) {
    const auto& rec = ev.rec;
    SimDevice* dev = nullptr;
    if (auto d = rec.find("device")) dev = &devices_.at(DeviceId(*d));
    std::string subject = dev ? dev->id.str() : rec.get_or("slice", "-");
    try {
      run_event(ev.event, rec, dev);
    } catch (const Error& e) {
      trace_event(e.kind(), subject, {{"event", ev.event}, {"detail", e.what()}});
    }
  }

  void run_event(const std::string& name, const Record& rec, SimDevice* dev) {
    if (name == "attach") {
      SliceId target;
      if (rec.has("slice"))
        target = slice_param(rec, nullptr);
      else if (specs_.at(dev->id).method == AttachMethod::GlobalSelection)
        target = *global_;
      else
        target = sc_.default_slice;
      operating(target);
      CorrelationId corr = ++next_corr_;
      auto fx = ue_event(*dev, {UeEventKind::Attach, "", 1}, ue_context(target), corr);
      begin_proc(corr, "attach", dev->id);
      process(std::move(fx), corr);
    } else if (name == "detach" || name == "move" || name == "idle") {
      SliceId sid = slice_param(rec, dev);
      operating(sid);
      CorrelationId corr = ++next_corr_;
      UeEvent ue;
      ue.kind = name == "detach" ? UeEventKind::Detach : name == "move" ? UeEventKind::Move : UeEventKind::Idle;
      ue.target = rec.get_or("target", "");
      auto fx = ue_event(*dev, ue, ue_context(sid), corr);
      if (name != "idle") begin_proc(corr, name, dev->id);
      process(std::move(fx), corr);
    } else if (name == "traffic-start" || name == "traffic-stop") {
      SliceId sid = slice_param(rec, dev);
      auto& sl = operating(sid);
      bool start = name == "traffic-start";
      UeEvent ue{start ? UeEventKind::TrafficStart : UeEventKind::TrafficStop, "",
                 static_cast<int>(rec.get_int_or("rate", 1))};
      auto fx = ue_event(*dev, ue, ue_context(sid), 0);
      const auto& flow = dev->bindings.at(sid).flow;
      if (start)
        sl.dplane.sources[flow] = {ingress_of(dev->node), ue.rate};
      else
        sl.dplane.sources.erase(flow);
      process(std::move(fx), 0);
    } else if (name == "unreachable") {
      process(ue_event(*dev, {UeEventKind::Unreachable, "", 1}, ue_context(slice_param(rec, dev)), 0), 0);
    } else if (name == "page") {
      SliceId sid = slice_param(rec, dev);
      auto& sl = operating(sid);
      if (!sl.fm) throw IllegalEventError("slice " + sid.str() + " has no FM");
      CorrelationId corr = ++next_corr_;
      begin_proc(corr, "page", dev->id);
      process(fm_request_page(*sl.fm, dev->id, corr), corr);
    } else if (name == "sso") {
      SliceId sid = slice_param(rec, dev);
      auto& sl = operating(sid);
      std::string service = rec.get("service");
      auto v = sam_single_sign_on(*sl.sam, dev->id, service, now_);
      trace_event("sso", dev->id.str(),
                  {{"service", service}, {"slice", sid.str()}, {"ok", v.ok ? "1" : "0"}, {"rule", v.rule}});
    } else if (name == "sample") {
      auto& sl = operating(slice_param(rec, nullptr));
      if (!sl.cghf) throw IllegalEventError("slice " + sl.id().str() + " has no CGHF");
      long long count = rec.get_int_or("count", 1);
      for (long long i = 0; i < count; ++i) {
        Sample s;
        s.source = rec.get_or("source", "external");
        s.metric = rec.get_or("metric", "flow-latency");
        s.subject = rec.get("subject");
        s.value = rec.get_int("value");
        s.tick = now_;
        cghf_ingest(*sl.cghf, std::move(s));
      }
      CorrelationId corr = ++next_corr_;
      auto assertions = cghf_generate(*sl.cghf, now_);
      process(cghf_notify(*sl.cghf, assertions, corr, sl.fabric->model().kind == FabricModelKind::PubSub), corr);
    } else if (name == "degrade" || name == "down") {
      std::string a = rec.get("a"), b = rec.get("b");
      LinkKey key(a, b);
      long long factor = rec.get_int_or("factor", 2);
      bool any = false;
      for (auto& [sid, sl] : slices_) {
        if (rec.has("slice") && sid.str() != rec.get("slice")) continue;
        auto it = sl.dplane.graph.links.find(key);
        if (it == sl.dplane.graph.links.end()) continue;
        any = true;
        if (name == "down")
          sl.dplane.graph.links.erase(it);
        else
          it->second.latency = static_cast<int>(it->second.latency * factor);
      }
      if (!any) throw IllegalEventError("no slice uses link " + key.str());
      trace_event(name, key.str(), {{"factor", name == "down" ? "-" : std::to_string(factor)}});
    } else if (name == "teardown") {
      SliceId sid = slice_param(rec, nullptr);
      auto& sl = slices_.at(sid);
      CorrelationId corr = ++next_corr_;
      auto fx = teardown(sl, corr);
      for (auto& [id, d] : devices_) {
        d.bindings.erase(sid);
        d.traffic_rate.erase(sid);
        if (d.attaching == sid) d.attaching.reset();
      }
      process(std::move(fx), corr);
      trace_event("lifecycle", sid.str(), {{"state", std::string(to_string(sl.state))}});
    }
  }

  // ------------------------------------------------------------- per tick

  void timers() {
    for (auto& [sid, sl] : slices_) {
      if (sl.state != LifecycleState::Operating || !sl.mm) continue;
      auto corrs = sl.mm->paging_corr;
      auto fx = mm_tick(*sl.mm, now_);
      for (const auto& e : fx.events) {
        trace_event(e.name, e.subject, e.detail);
        if (e.name == "PagingFailed")
          if (auto c = corrs.find(DeviceId(e.subject)); c != corrs.end()) end_proc(c->second, "PagingFailed");
      }
      for (const auto& o : fx.out) emit(o);
    }
  }

  void dplane() {
    for (auto& [sid, sl] : slices_) {
      if (!sl.fm || (sl.state != LifecycleState::Operating && sl.state != LifecycleState::TornDown)) continue;
      auto r = dplane_step(sl.dplane, now_);
      if (!r.report || sl.state != LifecycleState::Operating) continue;
      Outgoing o;
      o.kind = K::FlowNotify;
      o.source = Endpoint::dplane("monitor");
      o.destination = Endpoint::of(sl.fm->self);
      o.iface = InterfacePoint::I4_SBI;
      o.correlation_id = ++next_corr_;
      o.payload = flow_notify_payload(r);
      emit(o);
    }
  }

  // ------------------------------------------------------------- finish

  RunResult finish() {
    RunResult res;
    for (const auto& [corr, p] : procs_) trace_event("open", p.dev.str(), {{"proc", p.name}});
    for (const auto& [sid, sl] : slices_) {
      for (const auto& [flow, run] : sl.dplane.flows) {
        long long mismatch = 0;
        for (std::size_t i = 0; i < run.latencies.size(); ++i)
          mismatch += run.latencies[i] != run.expected_latencies[i];
        line({"FLW",
              {sid.str(), flow.str(), "sent=" + std::to_string(run.sent),
               "delivered=" + std::to_string(run.delivered), "lost=" + std::to_string(run.lost),
               "inflight=" + std::to_string(sl.dplane.in_flight_of(flow)),
               "latsum=" + std::to_string(run.latency_sum), "latmax=" + std::to_string(run.latency_max),
               "latmismatch=" + std::to_string(mismatch)}});
      }
    }
    std::string all;
    for (const auto& [sid, sl] : slices_) {
      std::string state = sl.canonical();
      for (const auto& [id, d] : devices_)
        if (d.bindings.count(sid) || d.traffic_rate.count(sid)) state += d.canonical(sid);
      res.digests[sid.str()] = fnv_hex(state);
      all += sid.str() + " " + res.digests[sid.str()] + "\n";
    }
    for (const auto& [id, d] : devices_)
      all += "dev " + id.str() + " " + d.node + " " + std::to_string(d.idle) + std::to_string(d.reachable) +
             std::to_string(d.authenticated_once) + "\n";
    res.digests["all"] = fnv_hex(all);
    for (const auto& [k, v] : res.digests) line({"DIG", {k, v}});
    res.trace = trace_;
    res.metrics = fold_metrics(trace_);
    return res;
  }

  const InputBundle& in_;
  RunOptions opts_;
  Scenario sc_;
  std::uint64_t seed_ = 0;
  Infrastructure infra_;
  std::map<SliceId, SliceInstance> slices_;
  std::optional<SliceId> global_;
  std::map<BbInstanceId, SliceId> owner_;
  std::map<DeviceId, Provisioned> provisioned_;
  std::map<DeviceId, SimDevice> devices_;
  std::map<DeviceId, ScenarioDevice> specs_;

  Tick now_ = 0;
  std::size_t next_event_ = 0;
  MsgId next_msg_ = 0;
  CorrelationId next_corr_ = 0;
  std::vector<Pending> queue_;
  std::map<CorrelationId, OpenProc> procs_;
  std::string trace_;
};

}  // namespace

Scenario parse_scenario(std::string_view text, std::string_view doc) {
  Scenario sc;
  bool header = false;
  std::vector<Record> records;
  try {
    records = parse_records(text, doc);
  } catch (const Error& e) {
    throw ScenarioError(e.what());
  }
  std::set<DeviceId> ids;
  for (const auto& rec : records) {
    try {
      if (rec.kind == "scenario") {
        if (header) throw ScenarioError(rec.where() + ": more than one scenario record");
        header = true;
        rec.expect_keys({"name", "ticks", "seed", "topology", "catalog", "default-slice", "key"});
        sc.name = rec.get("name");
        sc.ticks = rec.get_int("ticks");
        if (sc.ticks < 0) throw ScenarioError(rec.where() + ": ticks must be >= 0");
        sc.seed = static_cast<std::uint64_t>(rec.get_int_or("seed", 1));
        sc.topology_ref = rec.get("topology");
        sc.catalog_ref = rec.get("catalog");
        sc.default_slice = SliceId(rec.get_or("default-slice", ""));
        sc.operator_key = rec.get_or("key", sc.operator_key);
      } else if (rec.kind == "blueprint") {
        rec.expect_keys({"ref"});
        sc.blueprint_refs.push_back(rec.get("ref"));
      } else if (rec.kind == "global") {
        rec.expect_keys({"ref"});
        if (sc.global_ref) throw ScenarioError(rec.where() + ": more than one global domain");
        sc.global_ref = rec.get("ref");
      } else if (rec.kind == "device") {
        rec.expect_keys({"id", "supi", "cred", "allowed", "default", "mode", "node", "nets", "method"});
        ScenarioDevice d;
        d.id = DeviceId(rec.get("id"));
        if (!ids.insert(d.id).second) throw ScenarioError(rec.where() + ": duplicate device " + d.id.str());
        d.supi = PermanentSubscriberId(rec.get("supi"));
        d.credential = rec.get("cred");
        for (const auto& s : rec.get_list("allowed")) d.subscription.allowed.emplace_back(s);
        d.subscription.default_slice = SliceId(rec.get_or("default", ""));
        if (!parse_mediation(rec.get_or("mode", "ViaAF"), d.mode))
          throw ScenarioError(rec.where() + ": mode must be ViaAF or DirectI2");
        d.node = rec.get("node");
        d.nets = static_cast<int>(rec.get_int_or("nets", 1));
        if (d.nets < 1) throw ScenarioError(rec.where() + ": nets must be >= 1");
        if (!enum_parse(kMethods, rec.get_or("method", "default"), d.method))
          throw ScenarioError(rec.where() + ": method must be global or default");
        sc.devices.push_back(d);
      } else if (rec.kind == "at") {
        rec.expect_keys({"tick", "event", "device", "slice", "target", "rate", "service", "source", "metric",
                         "subject", "value", "count", "a", "b", "factor"});
        ScriptEvent ev;
        ev.tick = rec.get_int("tick");
        ev.event = rec.get("event");
        ev.rec = rec;
        if (!kEvents.count(ev.event)) throw ScenarioError(rec.where() + ": unknown event '" + ev.event + "'");
        if (!sc.script.empty() && ev.tick < sc.script.back().tick)
          throw ScenarioError(rec.where() + ": event ticks must be non-decreasing");
        if (auto d = rec.find("device"); d && !ids.count(DeviceId(*d)))
          throw ScenarioError(rec.where() + ": unknown device " + *d);
        bool needs_device = ev.event != "degrade" && ev.event != "down" && ev.event != "sample" &&
                            ev.event != "teardown";
        if (needs_device && !rec.has("device")) throw ScenarioError(rec.where() + ": event needs device=");
        if (!needs_device && ev.event != "degrade" && ev.event != "down" && !rec.has("slice"))
          throw ScenarioError(rec.where() + ": event needs slice=");
        sc.script.push_back(std::move(ev));
      } else {
        throw ScenarioError(rec.where() + ": unknown record kind '" + rec.kind + "'");
      }
    } catch (const ScenarioError&) {
      throw;
    } catch (const Error& e) {
      throw ScenarioError(e.what());
    }
  }
  if (!header) throw ScenarioError(std::string(doc) + ": missing scenario record");
  if (!sc.script.empty() && sc.script.back().tick > sc.ticks)
    throw ScenarioError(std::string(doc) + ": event after the last tick");
  return sc;
}

const std::string& InputBundle::get(const std::string& key) const {
  auto it = docs.find(key);
  if (it == docs.end()) throw ScenarioError("unresolvable reference " + key);
  return it->second;
}

std::string resolve_key(const std::string& from, const std::string& ref) {
  return (std::filesystem::path(from).parent_path() / ref).lexically_normal().generic_string();
}

InputBundle load_inputs(const std::filesystem::path& scenario_file) {
  InputBundle in;
  auto root = scenario_file.parent_path();
  in.scenario_key = scenario_file.filename().generic_string();
  auto fetch = [&](const std::string& key) -> const std::string& {
    if (!in.docs.count(key)) in.docs[key] = read_file(root / key);
    return in.docs.at(key);
  };
  auto sc = parse_scenario(fetch(in.scenario_key), in.scenario_key);
  fetch(resolve_key(in.scenario_key, sc.catalog_ref));
  fetch(resolve_key(in.scenario_key, sc.topology_ref));
  auto refs = sc.blueprint_refs;
  if (sc.global_ref) refs.push_back(*sc.global_ref);
  for (const auto& ref : refs) {
    auto key = resolve_key(in.scenario_key, ref);
    std::vector<Record> recs;
    try {
      recs = parse_records(fetch(key), key);
    } catch (const ScenarioError&) {
      throw;
    } catch (const Error& e) {
      throw ScenarioError(e.what());
    }
    for (const auto& rec : recs)
      if (rec.kind == "policy" && rec.has("ref")) fetch(resolve_key(key, rec.get("ref")));
  }
  return in;
}

RunResult run(const InputBundle& inputs, const RunOptions& opts) { return Simulation(inputs, opts).execute(); }

RunResult replay(std::string_view trace) {
  InputBundle in;
  RunOptions opts;
  std::map<std::string, std::vector<std::string>> lines;
  bool saw_run = false;
  for (const auto& l : parse_trace(trace)) {
    if (l.tag == "RUN") {
      saw_run = true;
      for (const auto& f : l.fields) {
        auto eq = f.find('=');
        if (eq == std::string::npos) continue;
        auto k = f.substr(0, eq), v = f.substr(eq + 1);
        if (k == "scenario") in.scenario_key = v;
        if (k == "seed") opts.seed = std::stoull(v);
        if (k == "fabric" && v != "-") {
          FabricModelKind m;
          if (!parse_fabric_kind(v, m)) throw ScenarioError("trace names unknown fabric " + v);
          opts.fabric = m;
        }
      }
    } else if (l.tag == "IN" && l.fields.size() == 2) {
      lines[l.fields[0]].push_back(l.fields[1]);
    }
  }
  if (!saw_run) throw ScenarioError("trace has no RUN line");
  for (const auto& [k, ls] : lines) {
    std::string body;
    for (const auto& x : ls) body += x + "\n";
    in.docs[k] = body;
  }
  return run(in, opts);
}

std::string FabricComparison::str() const {
  std::string out;
  for (const auto& r : rows) {
    Record rec;
    rec.kind = "fabric";
    rec.set("model", std::string(to_string(r.model)))
        .set("hops", std::to_string(r.hops))
        .set("messages", std::to_string(r.messages))
        .set("fabric-messages", std::to_string(r.fabric_messages))
        .set("unicast-interbb", std::to_string(r.unicast_interbb))
        .set("digest", r.digest);
    out += format_record(rec) + "\n";
  }
  return out;
}

FabricComparison compare_fabrics(const InputBundle& inputs, std::optional<std::uint64_t> seed,
                                 std::optional<ProjectionTable> dispatcher_projections) {
  const FabricModelKind models[] = {FabricModelKind::FullMesh, FabricModelKind::Relay, FabricModelKind::Dispatcher,
                                    FabricModelKind::PubSub};
  std::vector<std::future<RunResult>> runs;
  for (auto m : models) {
    RunOptions opts;
    opts.seed = seed;
    opts.fabric = m;
    if (m == FabricModelKind::Dispatcher) opts.projections = dispatcher_projections;
    runs.push_back(std::async(std::launch::async, [&inputs, opts] { return run(inputs, opts); }));
  }
  FabricComparison cmp;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    auto res = runs[i].get();
    FabricRow row;
    row.model = models[i];
    row.hops = res.metrics.number("hops.total");
    row.messages = res.metrics.number("msg.total");
    row.fabric_messages = res.metrics.number("msg.fabric");
    row.unicast_interbb = res.metrics.number("msg.unicast-interbb");
    row.digest = res.digests.at("all");
    cmp.rows.push_back(row);
  }
  for (const auto& r : cmp.rows)
    if (r.digest != cmp.rows.front().digest)
      throw EquivalenceViolation("terminal state under " + std::string(to_string(r.model)) + " (" + r.digest +
                                 ") differs from FullMesh (" + cmp.rows.front().digest + ")");
  return cmp;
}

std::vector<BbDefinition> grouping_for(const std::string& catalog_text, const std::string& doc) {
  static std::mutex mu;
  static std::map<std::string, std::vector<BbDefinition>> cache;
  std::string key = fnv_hex(catalog_text) + std::to_string(catalog_text.size());
  {
    std::lock_guard<std::mutex> lock(mu);
    if (auto it = cache.find(key); it != cache.end()) return it->second;
  }
  auto cat = load_catalog(catalog_text, doc);
  auto defs = group_into_bbs(cat, derive_separation_constraints(cat));
  std::lock_guard<std::mutex> lock(mu);
  cache[key] = defs;
  return defs;
}

}  // namespace ngcp
