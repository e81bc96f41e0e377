#include "doctest.h"
#include "ngcp/errors.hpp"
#include "ngcp/fabric.hpp"

using namespace ngcp;

namespace {

BbInstanceId id(Role r, int n = 1) { return {r, n}; }

std::set<BbInstanceId> members() { return {id(Role::AF), id(Role::CM), id(Role::SAM), id(Role::FM)}; }

SignalMessage msg(Role from, Role to, ProcedureKind kind = ProcedureKind::SessionEstablish) {
  SignalMessage m;
  m.msg_id = 5;
  m.correlation_id = 1;
  m.kind = kind;
  m.source = Endpoint::of(id(from));
  m.destination = Endpoint::of(id(to));
  m.payload = {{"dev", "d1"}, {"anchor", "p1"}, {"session", "s"}, {"secret", "x"}};
  return m;
}

}  // namespace

TEST_CASE("hop counts per model") {
  auto full = Fabric::connect(members(), FabricModel::full_mesh());
  auto relay = Fabric::connect(members(), FabricModel::relay(id(Role::CM)));
  auto cpd = Fabric::connect(members(), FabricModel::dispatcher(), 3);
  auto ps = Fabric::connect(members(), FabricModel::pub_sub(), 4);

  auto m = msg(Role::SAM, Role::FM);
  CHECK(full.send(m).record.hop_count == 1);
  auto r = relay.send(m).record;
  CHECK(r.hop_count == 2);
  CHECK(r.mediators == std::vector<BbInstanceId>{id(Role::CM)});
  CHECK(relay.send(msg(Role::CM, Role::FM)).record.hop_count == 1);
  auto c = cpd.send(m).record;
  CHECK(c.hop_count == 2);
  CHECK(c.mediators == std::vector<BbInstanceId>{id(Role::CPD, 3)});
  CHECK(ps.send(m).record.mediators == std::vector<BbInstanceId>{id(Role::Broker, 4)});
  CHECK(full.log().size() == 1);
  for (const auto* f : {&full, &relay, &cpd, &ps})
    for (const auto& rec : f->log()) CHECK(rec.hop_count == 1 + static_cast<int>(rec.mediators.size()));
}

TEST_CASE("implied link counts") {
  CHECK(Fabric::connect(members(), FabricModel::full_mesh()).link_count() == 6);
  CHECK(Fabric::connect(members(), FabricModel::relay(id(Role::CM))).link_count() == 3);
  CHECK(Fabric::connect(members(), FabricModel::dispatcher()).link_count() == 4);
}

TEST_CASE("connect and send errors") {
  CHECK_THROWS_AS(Fabric::connect(members(), FabricModel::relay(id(Role::MM))), BadRelayError);
  CHECK_THROWS_AS(Fabric::connect({}, FabricModel::full_mesh()), SchemaError);
  auto f = Fabric::connect(members(), FabricModel::full_mesh());
  CHECK_THROWS_AS(f.send(msg(Role::CM, Role::MM)), UnknownDestinationError);
  CHECK_THROWS_AS(f.subscribe(id(Role::CM), ContextTopicId("t")), ModelMismatchError);
  auto topic = msg(Role::CM, Role::FM);
  topic.destination = Endpoint::topic("t");
  CHECK_THROWS_AS(f.send(topic), ModelMismatchError);
}

TEST_CASE("dispatcher projects payloads per destination role") {
  auto cpd = Fabric::connect(members(), FabricModel::dispatcher());
  auto res = cpd.send(msg(Role::CM, Role::FM));
  REQUIRE(res.deliveries.size() == 1);
  const auto& p = res.deliveries[0].message.payload;
  CHECK(p.count("anchor") == 1);
  CHECK(p.count("secret") == 0);
  auto full = Fabric::connect(members(), FabricModel::full_mesh()).send(msg(Role::CM, Role::FM));
  CHECK(full.deliveries[0].message.payload.count("secret") == 1);
}

TEST_CASE("pubsub fans out to subscribers in id order") {
  auto ps = Fabric::connect({id(Role::CGHF), id(Role::CM, 2), id(Role::CM, 1), id(Role::FM)}, FabricModel::pub_sub());
  ps.subscribe(id(Role::CM, 2), ContextTopicId("ctx"));
  ps.subscribe(id(Role::CM, 1), ContextTopicId("ctx"));
  ps.subscribe(id(Role::CM, 1), ContextTopicId("ctx"));
  auto m = msg(Role::CGHF, Role::CM, ProcedureKind::ContextNotify);
  m.destination = Endpoint::topic("ctx");
  auto res = ps.send(m);
  REQUIRE(res.deliveries.size() == 2);
  CHECK(res.deliveries[0].recipient == Endpoint::of(id(Role::CM, 1)));
  CHECK(res.record.hop_count == 2);
  m.destination = Endpoint::topic("nobody");
  CHECK(ps.send(m).record.no_subscriber);
}
