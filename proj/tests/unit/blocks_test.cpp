#include <random>

#include "doctest.h"
#include "ngcp/blocks/af.hpp"
#include "ngcp/blocks/cghf.hpp"
#include "ngcp/blocks/cm.hpp"
#include "ngcp/blocks/fm.hpp"
#include "ngcp/blocks/mm.hpp"
#include "ngcp/blocks/sam.hpp"
#include "ngcp/errors.hpp"

using namespace ngcp;

namespace {

SamState sam_with(const std::string& supi, const std::string& cred) {
  SamState s;
  s.self = {Role::SAM, 1};
  s.operator_key = "op";
  s.identity_db[PermanentSubscriberId(supi)] = {cred};
  return s;
}

Graph diamond() {
  // s - a - t and s - b - t, the upper route shorter.
  Graph g;
  g.add_link("s", "a", {10, 1});
  g.add_link("a", "t", {10, 1});
  g.add_link("s", "b", {10, 2});
  g.add_link("b", "t", {10, 1});
  return g;
}

}  // namespace

TEST_CASE("SAM: every attempt is audited and success rotates the pseudonym") {
  auto s = sam_with("imsi-1", "pw");
  std::mt19937_64 rng(3);
  DeviceId d("d1");
  PermanentSubscriberId supi("imsi-1");
  auto bad = sam_authenticate(s, d, supi, {"nope", ""}, AuthScheme::LowSecure, 1, rng);
  CHECK_FALSE(bad.ok);
  CHECK(bad.reason == "credential mismatch");
  CHECK(sam_authenticate(s, d, PermanentSubscriberId("ghost"), {}, AuthScheme::Full, 2, rng).reason ==
        "unknown subscriber");

  auto a = sam_authenticate(s, d, supi, {derive("pw", "-"), ""}, AuthScheme::LowSecure, 3, rng);
  REQUIRE(a.ok);
  auto first = a.context->pseudonym;
  auto b = sam_authenticate(s, d, supi, {derive("pw", "n1"), "n1"}, AuthScheme::Full, 4, rng);
  REQUIRE(b.ok);
  CHECK(b.context->ordinal == a.context->ordinal + 1);
  CHECK(b.context->pseudonym != first);
  CHECK(s.audit_log.size() == 4);
  CHECK(s.auth_invocations == 4);
}

TEST_CASE("SAM: concealment, tickets and single sign-on") {
  PermanentSubscriberId supi("imsi-42");
  auto suci = conceal(supi, "k");
  CHECK(suci.find("imsi-42") == std::string::npos);
  CHECK(reveal(suci, "k") == supi);
  CHECK(reveal(suci, "other") != supi);
  auto t = issue_ticket(supi, 1, "k");
  CHECK(check_ticket(supi, t, "k"));
  CHECK_FALSE(check_ticket(PermanentSubscriberId("imsi-43"), t, "k"));

  auto s = sam_with("imsi-42", "pw");
  std::mt19937_64 rng(1);
  CHECK_THROWS_AS(sam_single_sign_on(s, DeviceId("d"), "video", 1), NoContextError);
  sam_authenticate(s, DeviceId("d"), supi, {derive("pw", "-"), ""}, AuthScheme::LowSecure, 1, rng);
  CHECK(sam_single_sign_on(s, DeviceId("d"), "video", 2).ok);
  CHECK(s.audit_log.back().kind == AuditKind::SingleSignOn);
}

TEST_CASE("CM: slice selection") {
  Subscription sub{{SliceId("miot"), SliceId("embb")}, SliceId("embb")};
  CHECK(designated_slice(sub) == SliceId("embb"));
  sub.default_slice = SliceId("generic");
  CHECK(designated_slice(sub) == SliceId("embb"));
  CHECK_THROWS_AS(designated_slice(Subscription{}), NoEligibleSliceError);

  CmState cm;
  cm.slice = SliceId("miot");
  cm.subscription_view[DeviceId("d")] = sub;
  CHECK(cm_select_slice_local(cm, DeviceId("d")).kind == LocalSelection::AcceptHere);
  cm.slice = SliceId("generic");
  auto r = cm_select_slice_local(cm, DeviceId("d"));
  CHECK(r.kind == LocalSelection::Redirect);
  CHECK(r.target == SliceId("embb"));
}

TEST_CASE("CM: anchor selection by latency then id") {
  CmState cm;
  cm.anchors = {"p2", "p1", "p3"};
  cm.anchor_latency["g1"] = {{"p1", 4}, {"p2", 4}, {"p3", 9}};
  CHECK(cm_select_anchor(cm, "g1") == "p1");
  CHECK(cm_select_anchor(cm, "g1", "p1") == "p2");
  cm.anchors.clear();
  CHECK_THROWS_AS(cm_select_anchor(cm, "g1"), NoDPlaneFunctionError);
}

TEST_CASE("CM: state machine edges") {
  using S = ConvergentState;
  CHECK(is_legal_transition(S::Detached, S::Authenticating));
  CHECK(is_legal_transition(S::Authenticating, S::Attached));
  CHECK(is_legal_transition(S::Attached, S::SessionActive));
  CHECK(is_legal_transition(S::SessionActive, S::Detached));
  CHECK_FALSE(is_legal_transition(S::Detached, S::SessionActive));
  CHECK_FALSE(is_legal_transition(S::Attached, S::Authenticating));
}

TEST_CASE("MM: handover plans and policy") {
  using P = PlanStep;
  CHECK(handover_plan(HandoverStyle::MakeBeforeBreak) ==
        std::vector<P>{P::InstallNewPath, P::ExecuteHandover, P::ReleaseOldPath});
  CHECK(handover_plan(HandoverStyle::BreakBeforeMake) ==
        std::vector<P>{P::ReleaseOldPath, P::ExecuteHandover, P::InstallNewPath});

  MmState mm;
  mm.self = {Role::MM, 1};
  mm.peers.ids = {{Role::AF, {Role::AF, 1}}, {Role::FM, {Role::FM, 1}}, {Role::CM, {Role::CM, 1}}};
  mm.policy.forbidden = {AccessTech::Fixed};
  HandoverRequest req;
  req.dev = DeviceId("d");
  CHECK_THROWS_AS(mm_handover(mm, req, 1), NoSessionError);
  req.session = SessionId("s");
  req.tech = AccessTech::Fixed;
  CHECK_THROWS_AS(mm_handover(mm, req, 1), PolicyForbidsError);
}

TEST_CASE("MM: paging times out into PagingFailed") {
  MmState mm;
  mm.self = {Role::MM, 1};
  mm.peers.ids = {{Role::AF, {Role::AF, 1}}};
  mm.paging_timeout = 4;
  DeviceId d("d");
  CHECK_THROWS_AS(mm_page(mm, d, 9, 0), NotIdleError);
  mm.paging_state[d] = PagingState::Idle;
  mm.tracking_areas[d] = "north";
  mm.area_nodes["north"] = {"a1", "a2"};
  auto fx = mm_page(mm, d, 9, 10);
  CHECK(fx.out.size() == 2);
  CHECK(mm_tick(mm, 13).events.empty());
  auto late = mm_tick(mm, 14);
  REQUIRE(late.events.size() == 1);
  CHECK(late.events[0].name == "PagingFailed");
  CHECK(mm.paging_state[d] == PagingState::Idle);
}

TEST_CASE("FM: strategies, reservations and failures") {
  FmState fm;
  fm.topology = diamond();
  fm.qos_policies["video"] = {6, std::nullopt};
  auto p1 = fm_define_path(fm, FlowId("f1"), "s", "t", "video");
  CHECK(p1.nodes == std::vector<std::string>{"s", "a", "t"});
  CHECK(fm.reserved_on(LinkKey("s", "a")) == 6);

  // The upper route cannot take another 6 units; the lower one can.
  auto p2 = fm_define_path(fm, FlowId("f2"), "s", "t", "video");
  CHECK(p2.nodes == std::vector<std::string>{"s", "b", "t"});
  CHECK(p2.tag != p1.tag);
  CHECK_THROWS_AS(fm_define_path(fm, FlowId("f3"), "s", "t", "video"), CapacityError);
  CHECK_THROWS_AS(fm_define_path(fm, FlowId("f3"), "s", "zz", "video"), NoPathError);

  FmState ld;
  ld.topology = diamond();
  ld.strategy = PathStrategy::LoadDistribution;
  ld.observed[LinkKey("s", "a")] = 8;
  CHECK(fm_define_path(ld, FlowId("f"), "s", "t", "default").nodes == std::vector<std::string>{"s", "b", "t"});
  ld.stretch_percent = 0;
  CHECK(fm_define_path(ld, FlowId("g"), "s", "t", "default").nodes == std::vector<std::string>{"s", "a", "t"});
}

TEST_CASE("AF: permission guard and path records") {
  AfState af;
  af.self = {Role::AF, 1};
  af.peers.ids = {{Role::CM, {Role::CM, 1}}};
  af.cn_access_permissions = default_an_permissions();
  SignalMessage m;
  m.kind = ProcedureKind::FlowConfigure;
  m.source = Endpoint::of({Role::SAM, 1});
  m.destination = Endpoint::of(af.self);
  m.iface = InterfacePoint::I3;
  m.correlation_id = 1;
  m.payload = {{"dev", "d"}, {"node", "a1"}, {"flow", "f"}, {"op", "install"}};
  CHECK_THROWS_AS(af_handle(af, m), PermissionDenied);
  CHECK_FALSE(af_latest_endpoint(af, DeviceId("d")).has_value());
}

TEST_CASE("CGHF: fires once above factor x baseline and re-arms") {
  CghfState c;
  c.self = {Role::CGHF, 1};
  c.window = 4;
  c.subscriptions["ctx"] = {{Role::CM, 1}};
  c.context_models.push_back({"watch", "LatencyAboveNormal", ContextTopicId("ctx"), "flow-latency", 3, 2});
  auto feed = [&](long long v, Tick t) {
    cghf_ingest(c, {"FM", "flow-latency", "f", v, t});
    return cghf_generate(c, t);
  };
  for (int i = 0; i < 4; ++i) CHECK(feed(4, i).empty());
  CHECK(feed(6, 4).empty());  // mean 4.5
  CHECK(feed(8, 5).empty());  // mean 5.5
  auto fired = feed(8, 6);    // mean 6.5 > 6
  REQUIRE(fired.size() == 1);
  CHECK(fired[0].subject == "f");
  CHECK(fired[0].evidence.size() == 4);
  CHECK(feed(9, 7).empty());  // latched
  auto fx = cghf_notify(c, fired, 5, false);
  REQUIRE(fx.out.size() == 1);
  CHECK(fx.out[0].kind == ProcedureKind::ContextNotify);
  for (int i = 0; i < 4; ++i) feed(4, 8 + i);
  CHECK(c.latched.empty());
  CHECK(is_internal_source("FM"));
  CHECK_FALSE(is_internal_source("weather"));
}
