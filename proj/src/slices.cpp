#include "ngcp/slices.hpp"

#include <algorithm>
#include <sstream>

#include "ngcp/textrec.hpp"

namespace ngcp {

namespace {

constexpr EnumTable<SliceType, 4> kTypes{{
    {SliceType::eMBB, "eMBB"},
    {SliceType::mIoT, "mIoT"},
    {SliceType::CriticalComms, "CriticalComms"},
    {SliceType::FixedAccess, "FixedAccess"},
}};

constexpr EnumTable<LifecycleState, 4> kLifecycle{{
    {LifecycleState::Designed, "Designed"},
    {LifecycleState::Instantiated, "Instantiated"},
    {LifecycleState::Operating, "Operating"},
    {LifecycleState::TornDown, "TornDown"},
}};

const Role kBlockRoles[] = {Role::AF, Role::CM, Role::MM, Role::SAM, Role::FM, Role::CGHF};

Role role_of(const Record& rec, std::string_view value) {
  Role r;
  if (!parse_role(value, r) || (!is_cn_role(r) && r != Role::AF))
    throw SchemaError(rec.where() + ": unknown building block role '" + std::string(value) + "'");
  return r;
}

int parse_int(const Record& rec, std::string_view key, long long fallback, long long lo, long long hi) {
  long long v = rec.get_int_or(key, fallback);
  if (v < lo || v > hi)
    throw SchemaError(rec.where() + ": " + std::string(key) + " must be in [" + std::to_string(lo) + ", " +
                      std::to_string(hi) + "]");
  return static_cast<int>(v);
}

/// Records that may appear in a blueprint or in a policy it references.
bool apply_policy_record(SliceBlueprint& bp, const Record& rec) {
  if (rec.kind == "mobility") {
    rec.expect_keys({"style", "anchoring", "forbid"});
    MobilityPolicy mp;
    if (!parse_style(rec.get_or("style", "MakeBeforeBreak"), mp.style))
      throw SchemaError(rec.where() + ": unknown handover style '" + rec.get("style") + "'");
    if (!parse_anchoring(rec.get_or("anchoring", "Centralised"), mp.anchoring))
      throw SchemaError(rec.where() + ": unknown anchoring '" + rec.get("anchoring") + "'");
    for (const auto& t : rec.get_list("forbid")) {
      AccessTech tech;
      if (!parse_tech(t, tech)) throw SchemaError(rec.where() + ": unknown access technology '" + t + "'");
      mp.forbidden.insert(tech);
    }
    bp.mobility_policy = mp;
  } else if (rec.kind == "auth") {
    rec.expect_keys({"scheme"});
    if (!parse_scheme(rec.get("scheme"), bp.auth_scheme))
      throw SchemaError(rec.where() + ": unknown auth scheme '" + rec.get("scheme") + "'");
  } else if (rec.kind == "path") {
    rec.expect_keys({"strategy", "stretch"});
    if (rec.has("strategy") && !parse_strategy(rec.get("strategy"), bp.path_strategy))
      throw SchemaError(rec.where() + ": unknown path strategy '" + rec.get("strategy") + "'");
    bp.stretch_percent = parse_int(rec, "stretch", bp.stretch_percent, 0, 1000);
  } else if (rec.kind == "qos") {
    rec.expect_keys({"class", "reserve", "strategy", "session"});
    std::string cls = rec.get_or("class", "default");
    QosPolicy q;
    q.reserve = parse_int(rec, "reserve", 0, 0, 1000000);
    if (rec.has("strategy")) {
      PathStrategy ps;
      if (!parse_strategy(rec.get("strategy"), ps))
        throw SchemaError(rec.where() + ": unknown path strategy '" + rec.get("strategy") + "'");
      q.strategy = ps;
    }
    bp.qos_policies[cls] = q;
    if (rec.get_or("session", "") == "yes") bp.session_qos = cls;
  } else if (rec.kind == "context-model") {
    rec.expect_keys({"name", "statement", "topic", "metric", "factor"});
    ContextModel m;
    m.name = rec.get("name");
    m.statement = rec.get_or("statement", m.statement);
    m.topic = ContextTopicId(rec.get_or("topic", "context"));
    m.metric = rec.get_or("metric", m.metric);
    if (rec.has("factor")) {
      auto parts = split(rec.get("factor"), '/');
      try {
        m.factor_num = std::stoll(parts.at(0));
        m.factor_den = parts.size() > 1 ? std::stoll(parts.at(1)) : 1;
      } catch (const std::exception&) {
        throw SchemaError(rec.where() + ": factor must be n or n/d");
      }
      if (m.factor_num <= 0 || m.factor_den <= 0) throw SchemaError(rec.where() + ": factor must be positive");
    }
    bp.context_models.push_back(m);
  } else if (rec.kind == "context") {
    rec.expect_keys({"window"});
    bp.context_window = parse_int(rec, "window", bp.context_window, 1, 100000);
  } else if (rec.kind == "subscribe") {
    rec.expect_keys({"topic", "roles"});
    SubscribeRule s;
    s.topic = ContextTopicId(rec.get("topic"));
    for (const auto& r : rec.get_list("roles")) s.roles.push_back(role_of(rec, r));
    bp.subscriptions.push_back(s);
  } else if (rec.kind == "permission") {
    rec.expect_keys({"role", "kinds"});
    Role r = role_of(rec, rec.get("role"));
    auto& set = bp.an_permissions[r];
    for (const auto& k : rec.get_list("kinds")) {
      ProcedureKind kind;
      if (!parse_kind(k, kind)) throw SchemaError(rec.where() + ": unknown procedure kind '" + k + "'");
      set.insert(kind);
    }
  } else if (rec.kind == "paging") {
    rec.expect_keys({"timeout"});
    bp.paging_timeout = parse_int(rec, "timeout", bp.paging_timeout, 1, 100000);
  } else {
    return false;
  }
  return true;
}

}  // namespace

std::string_view to_string(SliceType t) { return enum_name(kTypes, t); }
bool parse_slice_type(std::string_view s, SliceType& out) { return enum_parse(kTypes, s, out); }
std::string_view to_string(LifecycleState s) { return enum_name(kLifecycle, s); }

SliceBlueprint load_blueprint(std::string_view text, std::string_view doc, const DocResolver& resolve) {
  SliceBlueprint bp;
  bool header = false;
  for (const auto& rec : parse_records(text, doc)) {
    if (rec.kind == "slice") {
      if (header) throw SchemaError(rec.where() + ": more than one slice record");
      header = true;
      rec.expect_keys({"id", "type", "fabric", "relay", "scope", "share"});
      bp.slice_id = SliceId(rec.get("id"));
      if (!parse_slice_type(rec.get_or("type", "eMBB"), bp.type))
        throw SchemaError(rec.where() + ": unknown slice type '" + rec.get("type") + "'");
      if (!parse_fabric_kind(rec.get_or("fabric", "FullMesh"), bp.fabric_model))
        throw SchemaError(rec.where() + ": unknown fabric model '" + rec.get("fabric") + "'");
      bp.relay_role = role_of(rec, rec.get_or("relay", "CM"));
      std::string scope = rec.get_or("scope", "local");
      if (scope != "local" && scope != "global") throw SchemaError(rec.where() + ": scope must be local or global");
      bp.scope = scope == "global" ? SliceScope::Global : SliceScope::Local;
      bp.capacity_share = parse_int(rec, "share", 100, 0, 100);
    } else if (rec.kind == "bb") {
      rec.expect_keys({"role", "sfs"});
      Role r = role_of(rec, rec.get("role"));
      if (bp.bb_set.count(r)) throw SchemaError(rec.where() + ": duplicate bb " + rec.get("role"));
      auto sfs = rec.get_list("sfs");
      bp.bb_set[r] = std::set<std::string>(sfs.begin(), sfs.end());
    } else if (rec.kind == "anchors") {
      rec.expect_keys({"nodes"});
      bp.anchors = rec.get_list("nodes");
    } else if (rec.kind == "policy") {
      rec.expect_keys({"ref"});
      if (!resolve) throw SchemaError(rec.where() + ": policy reference without a resolver");
      auto [key, body] = resolve(std::string(doc), rec.get("ref"));
      for (const auto& prec : parse_records(body, key))
        if (!apply_policy_record(bp, prec))
          throw SchemaError(prec.where() + ": record kind '" + prec.kind + "' is not allowed in a policy");
    } else if (!apply_policy_record(bp, rec)) {
      throw SchemaError(rec.where() + ": unknown record kind '" + rec.kind + "'");
    }
  }
  if (!header) throw SchemaError(std::string(doc) + ": missing slice record");
  return bp;
}

BlueprintVerdict validate_blueprint(const SliceBlueprint& bp, const std::vector<BbDefinition>& bb_definitions) {
  BlueprintVerdict v;
  std::vector<Role> mandatory = {Role::AF, Role::CM, Role::SAM};
  if (bp.scope == SliceScope::Local) mandatory.push_back(Role::FM);
  for (Role r : mandatory)
    if (!bp.has(r)) v.violations.push_back("mandatory BB " + std::string(to_string(r)) + " absent");
  if (!bp.has(Role::MM) && bp.mobility_policy) v.violations.push_back("mobility policy without MM");
  if (!bp.has(Role::CGHF) && !bp.context_models.empty()) v.violations.push_back("context model without CGHF");

  for (const auto& [role, sfs] : bp.bb_set) {
    std::string name(to_string(role));
    auto def = std::find_if(bb_definitions.begin(), bb_definitions.end(),
                            [&](const BbDefinition& d) { return d.name == name; });
    if (def == bb_definitions.end()) {
      v.violations.push_back("BB " + name + " has no definition");
      continue;
    }
    for (const auto& sf : sfs)
      if (!def->sf_set.count(sf)) v.violations.push_back("SF " + sf + " does not belong to BB " + name);
  }
  if (bp.fabric_model == FabricModelKind::Relay && !bp.has(bp.relay_role))
    v.violations.push_back("relay BB " + std::string(to_string(bp.relay_role)) + " absent");
  for (const auto& sub : bp.subscriptions)
    for (Role r : sub.roles)
      if (!bp.has(r))
        v.violations.push_back("subscriber " + std::string(to_string(r)) + " of topic " + sub.topic.str() + " absent");
  if (!bp.qos_policies.empty() && !bp.qos_policies.count(bp.session_qos))
    v.violations.push_back("session QoS class " + bp.session_qos + " undefined");
  return v;
}

BbInstanceId Infrastructure::allocate(Role r) { return {r, ++next_ordinal[r]}; }

bool SliceInstance::owns(const BbInstanceId& bb) const {
  auto it = ids.find(bb.role);
  return it != ids.end() && it->second == bb;
}

std::set<DeviceId> SliceInstance::attached_devices() const {
  std::set<DeviceId> out;
  if (!cm) return out;
  for (const auto& [dev, st] : cm->device_table)
    if (st != ConvergentState::Detached) out.insert(dev);
  return out;
}

std::string SliceInstance::canonical() const {
  std::ostringstream os;
  os << "slice " << id().str() << " " << to_string(state) << "\n";
  if (af) os << af->canonical();
  if (cm) os << cm->canonical();
  if (mm) os << mm->canonical();
  if (sam) os << sam->canonical();
  if (fm) os << fm->canonical();
  if (cghf) os << cghf->canonical();
  os << dplane.canonical();
  return os.str();
}

SliceInstance instantiate(const SliceBlueprint& bp, Infrastructure& infra, std::uint64_t seed,
                          const std::map<DeviceId, Provisioned>& subscribers, const std::string& operator_key,
                          const std::set<BbInstanceId>& extra_members) {
  const auto& topo = infra.topology;
  bool needs_dplane = bp.has(Role::FM);
  if (needs_dplane) {
    if (bp.capacity_share <= 0) throw InfraCapacityError("slice " + bp.slice_id.str() + " requests no capacity");
    bool any = false;
    for (const auto& [k, spec] : topo.graph.links) {
      int used = infra.allocated_percent.count(k) ? infra.allocated_percent.at(k) : 0;
      if (used + bp.capacity_share > 100)
        throw InfraCapacityError("link " + k.str() + " has " + std::to_string(100 - used) +
                                 "% left, slice " + bp.slice_id.str() + " asks " +
                                 std::to_string(bp.capacity_share) + "%");
      any = any || spec.capacity * bp.capacity_share / 100 > 0;
    }
    if (!any) throw InfraCapacityError("infrastructure offers no capacity to slice " + bp.slice_id.str());
    for (const auto& [k, spec] : topo.graph.links) infra.allocated_percent[k] += bp.capacity_share;
  }

  SliceInstance s;
  s.blueprint = bp;
  s.rng.seed(seed);
  for (Role r : kBlockRoles)
    if (bp.has(r)) s.ids[r] = infra.allocate(r);
  Peers peers = s.peers();

  std::map<std::string, AccessNodeInfo> access;
  for (const auto& [id, an] : topo.access) access[id] = {an.tech, an.area, an.attach};

  Graph share;
  share.nodes = topo.graph.nodes;
  for (const auto& [k, spec] : topo.graph.links)
    share.links[k] = {spec.capacity * bp.capacity_share / 100, spec.latency};
  if (needs_dplane) s.dplane.graph = share;

  std::vector<std::string> anchors = bp.anchors.empty() ? topo.anchors() : bp.anchors;
  for (const auto& a : anchors)
    if (!topo.graph.nodes.count(a))
      throw InfraCapacityError("anchor " + a + " of slice " + bp.slice_id.str() + " is not a topology node");

  if (bp.has(Role::AF)) {
    AfState af;
    af.self = s.ids.at(Role::AF);
    af.peers = peers;
    af.access_nodes = access;
    af.cn_access_permissions = bp.an_permissions.empty() ? default_an_permissions() : bp.an_permissions;
    s.af = std::move(af);
  }
  if (bp.has(Role::CM)) {
    CmState cm;
    cm.self = s.ids.at(Role::CM);
    cm.peers = peers;
    cm.role = bp.scope == SliceScope::Global ? CmRole::Global : CmRole::SliceLocal;
    cm.slice = bp.slice_id;
    cm.scheme = bp.auth_scheme;
    cm.qos = bp.session_qos;
    cm.access_nodes = access;
    cm.anchors = anchors;
    auto any = [](const LinkKey&, const LinkSpec& spec) { return spec.capacity > 0; };
    for (const auto& [id, an] : topo.access) {
      auto dist = shortest_latencies(share, an.attach, any);
      for (const auto& a : anchors)
        if (dist.count(a)) cm.anchor_latency[an.attach][a] = static_cast<int>(dist.at(a));
    }
    for (const auto& [dev, p] : subscribers) cm.subscription_view[dev] = p.subscription;
    s.cm = std::move(cm);
  }
  if (bp.has(Role::MM)) {
    MmState mm;
    mm.self = s.ids.at(Role::MM);
    mm.peers = peers;
    mm.slice = bp.slice_id;
    mm.policy = bp.mobility_policy.value_or(MobilityPolicy{});
    mm.paging_timeout = bp.paging_timeout;
    for (const auto& [id, an] : topo.access) mm.area_nodes[an.area].push_back(id);
    s.mm = std::move(mm);
  }
  if (bp.has(Role::SAM)) {
    SamState sam;
    sam.self = s.ids.at(Role::SAM);
    sam.peers = peers;
    sam.operator_key = operator_key;
    for (const auto& [dev, p] : subscribers) sam.identity_db[p.supi] = {p.credential};
    s.sam = std::move(sam);
  }
  if (bp.has(Role::FM)) {
    FmState fm;
    fm.self = s.ids.at(Role::FM);
    fm.peers = peers;
    fm.slice = bp.slice_id;
    fm.topology = share;
    fm.qos_policies = bp.qos_policies;
    fm.strategy = bp.path_strategy;
    fm.stretch_percent = bp.stretch_percent;
    s.fm = std::move(fm);
  }
  if (bp.has(Role::CGHF)) {
    CghfState c;
    c.self = s.ids.at(Role::CGHF);
    c.peers = peers;
    c.slice = bp.slice_id;
    c.window = bp.context_window;
    c.context_models = bp.context_models;
    for (const auto& sub : bp.subscriptions)
      for (Role r : sub.roles) c.subscriptions[sub.topic.str()].insert(s.ids.at(r));
    s.cghf = std::move(c);
  }

  std::set<BbInstanceId> members = extra_members;
  for (const auto& [r, id] : s.ids) members.insert(id);
  FabricModel model;
  model.kind = bp.fabric_model;
  if (model.kind == FabricModelKind::Relay && s.ids.count(bp.relay_role)) model.relay_bb = s.ids.at(bp.relay_role);
  s.fabric = Fabric::connect(members, model, ++infra.next_mediator);
  if (model.kind == FabricModelKind::PubSub)
    for (const auto& sub : bp.subscriptions)
      for (Role r : sub.roles) s.fabric->subscribe(s.ids.at(r), sub.topic);

  s.state = LifecycleState::Instantiated;
  return s;
}

void operate(SliceInstance& s) {
  if (s.state != LifecycleState::Instantiated)
    throw LifecycleOrderError("operate requires Instantiated, slice " + s.id().str() + " is " +
                              std::string(to_string(s.state)));
  s.state = LifecycleState::Operating;
}

Effects teardown(SliceInstance& s, CorrelationId corr) {
  if (s.state != LifecycleState::Instantiated && s.state != LifecycleState::Operating)
    throw LifecycleOrderError("teardown requires a live slice, " + s.id().str() + " is " +
                              std::string(to_string(s.state)));
  Effects fx;
  if (s.cm) {
    for (const auto& dev : s.attached_devices()) {
      fx.event("transition", dev.str(),
               {{"from", std::string(to_string(s.cm->state_of(dev)))}, {"to", "Detached"}, {"slice", s.id().str()}});
      fx.event("detach", dev.str(), {{"slice", s.id().str()}, {"cause", "teardown"}});
      s.cm->device_table[dev] = ConvergentState::Detached;
    }
    s.cm->sessions.clear();
    s.cm->slice_bindings.clear();
    s.cm->pending.clear();
  }
  if (s.fm) {
    SbiAdaptor sbi = [&](const SignalMessage& m) { return dplane_configure(s.dplane, m); };
    std::vector<std::string> tags;
    for (const auto& [tag, p] : s.fm->path_table) tags.push_back(tag);
    for (const auto& tag : tags)
      for (auto& o : fm_release(*s.fm, tag, "now", sbi, corr)) fx.out.push_back(std::move(o));
  }
  if (s.sam) s.sam->security_contexts.clear();
  s.dplane.sources.clear();
  s.state = LifecycleState::TornDown;
  return fx;
}

}  // namespace ngcp
