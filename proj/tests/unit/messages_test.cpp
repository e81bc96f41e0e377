#include "doctest.h"
#include "ngcp/errors.hpp"
#include "ngcp/messages.hpp"

using namespace ngcp;

namespace {

Endpoint bb(Role r, int n = 1) { return Endpoint::of({r, n}); }

SignalMessage msg(Endpoint src, Endpoint dst, InterfacePoint iface) {
  SignalMessage m;
  m.msg_id = 1;
  m.correlation_id = 7;
  m.source = std::move(src);
  m.destination = std::move(dst);
  m.iface = iface;
  return m;
}

}  // namespace

TEST_CASE("endpoint text round-trips") {
  for (const auto& e : {Endpoint::ue(DeviceId("d1")), Endpoint::access_node("a1"), bb(Role::CM, 3),
                        Endpoint::dplane("t1"), Endpoint::topic("flow-context"), Endpoint::external("x")}) {
    auto back = Endpoint::parse(e.str());
    REQUIRE(back.has_value());
    CHECK(*back == e);
  }
  CHECK(bb(Role::CM, 3).str() == "CM#3");
  CHECK_FALSE(Endpoint::parse("nonsense").has_value());
  CHECK_FALSE(BbInstanceId::parse("XX#1").has_value());
}

TEST_CASE("interface table") {
  using C = EndpointClass;
  CHECK(route_interface_for(C::UE, C::AF, Mediation::ViaAF) == InterfacePoint::I1);
  CHECK(route_interface_for(C::UE, C::CnBB, Mediation::Direct) == InterfacePoint::I2);
  CHECK(route_interface_for(C::AF, C::CnBB, Mediation::ViaAF) == InterfacePoint::I3);
  CHECK(route_interface_for(C::CnBB, C::CnBB, Mediation::ViaAF) == InterfacePoint::InterBB);
  CHECK(route_interface_for(C::CnBB, C::OtherDomain, Mediation::ViaAF) == InterfacePoint::I7);
  CHECK(route_interface_for(C::CnBB, C::DPlane, Mediation::ViaAF) == InterfacePoint::I4_SBI);
  CHECK_THROWS_AS(route_interface_for(C::UE, C::CnBB, Mediation::ViaAF), NoInterfaceError);
  CHECK_THROWS_AS(route_interface_for(C::UE, C::DPlane, Mediation::Direct), NoInterfaceError);
  CHECK_THROWS_AS(route_interface_for(bb(Role::CM), Endpoint::dplane("n"), Mediation::ViaAF), NoInterfaceError);
  CHECK(route_interface_for(bb(Role::FM), Endpoint::dplane("n"), Mediation::ViaAF) == InterfacePoint::I4_SBI);
}

TEST_CASE("message validation") {
  CHECK(validate_message(msg(bb(Role::CM), bb(Role::SAM), InterfacePoint::InterBB)).ok);
  CHECK(validate_message(msg(Endpoint::ue(DeviceId("d")), bb(Role::AF), InterfacePoint::I1)).ok);

  auto v = validate_message(msg(bb(Role::CM), bb(Role::SAM), InterfacePoint::I3));
  CHECK_FALSE(v.ok);
  CHECK(v.rule == "interface-role mismatch");
  CHECK(validate_message(msg(bb(Role::CM), bb(Role::SAM), InterfacePoint::WBI_composite)).rule ==
        "reporting-only-interface");
  CHECK(validate_message(msg(bb(Role::CM), Endpoint::dplane("n"), InterfacePoint::I4_SBI)).rule == "no-interface");
  CHECK(validate_message(msg(bb(Role::CM), bb(Role::CPD), InterfacePoint::InterBB)).rule == "mediator-endpoint");
  auto m = msg(bb(Role::CM), bb(Role::FM), InterfacePoint::InterBB);
  m.correlation_id = 0;
  CHECK(validate_message(m).rule == "missing-correlation");
}

TEST_CASE("payload encoding round-trips separators") {
  Payload p{{"a", "plain"}, {"b", "x;y=z%w"}, {"c", "tab\there"}, {"d", ""}};
  auto text = encode_payload(p);
  CHECK(text.find('\t') == std::string::npos);
  CHECK(decode_payload(text) == p);
  CHECK(encode_payload({}) == "-");
  CHECK(decode_payload("-").empty());
}

TEST_CASE("priority classes order auth before mobility before session before flow before context") {
  using K = ProcedureKind;
  CHECK(priority_class(K::AuthChallenge) < priority_class(K::HandoverPrepare));
  CHECK(priority_class(K::Page) < priority_class(K::SessionEstablish));
  CHECK(priority_class(K::SessionRelease) < priority_class(K::FlowConfigure));
  CHECK(priority_class(K::FlowNotify) < priority_class(K::ContextNotify));
  for (int i = 0; i < kProcedureKindCount; ++i) {
    auto k = static_cast<K>(i);
    K back;
    REQUIRE(parse_kind(to_string(k), back));
    CHECK(back == k);
  }
}
