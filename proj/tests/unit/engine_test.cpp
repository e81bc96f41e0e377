#include <set>

#include "doctest.h"
#include "ngcp/engine.hpp"
#include "ngcp/errors.hpp"
#include "support/corpus.hpp"

using namespace ngcp;

namespace {

std::string proc_result(const std::string& trace, const std::string& dev, const std::string& proc) {
  std::string result;
  for (const auto& e : corpus::events(trace))
    if (e.name == "end" && e.subject == dev && e.detail.at("proc") == proc) result = e.detail.at("result");
  return result;
}

std::string scenario_text(const std::string& name) { return corpus::read("scenarios/" + name + ".scn"); }

}  // namespace

TEST_CASE("scenario parsing") {
  auto sc = parse_scenario(scenario_text("paging"), "paging.scn");
  CHECK(sc.name == "paging");
  CHECK(sc.ticks == 40);
  CHECK(sc.seed == 5);
  CHECK(sc.devices.size() == 2);
  CHECK(sc.script.size() == 7);
  CHECK(sc.default_slice == SliceId("embb"));

  CHECK_THROWS_AS(parse_scenario("scenario name=x ticks=5 topology=t catalog=c\nat tick=1 event=explode\n"),
                  ScenarioError);
  CHECK_THROWS_AS(parse_scenario("scenario name=x ticks=5 topology=t catalog=c\n"
                                 "at tick=3 event=idle device=d\nat tick=2 event=idle device=d\n"),
                  ScenarioError);
  CHECK_THROWS_AS(parse_scenario("device id=d\n"), ScenarioError);
}

TEST_CASE("reference resolution") {
  CHECK(resolve_key("scenarios/a.scn", "../blueprints/b.bp") == "blueprints/b.bp");
  CHECK(resolve_key("a.scn", "b.bp") == "b.bp");
  CHECK(resolve_key("x/y/a.scn", "../../t.topo") == "t.topo");
  auto in = corpus::scenario("paging");
  CHECK(in.scenario_key == "paging.scn");
  CHECK(in.docs.count("../blueprints/embb.bp") == 1);
  CHECK(in.docs.count("../policies/mbb.pol") == 1);
  CHECK_THROWS_AS(in.get("nope"), ScenarioError);
  CHECK_THROWS_AS(load_inputs(corpus::data_path("scenarios/absent.scn")), ScenarioError);
}

TEST_CASE("setup failures surface as ScenarioError") {
  CHECK_THROWS_AS(run(corpus::scenario("bad-capacity")), ScenarioError);
  auto in = corpus::scenario("paging");
  auto broken = corpus::with_scenario(in, scenario_text("paging") + "blueprint ref=../blueprints/missing-sam.bp\n");
  CHECK_THROWS_AS(run(broken), ScenarioError);
}

TEST_CASE("paging outcomes") {
  auto trace = run(corpus::scenario("paging")).trace;
  CHECK(proc_result(trace, "d1", "page") == "ok");
  CHECK(proc_result(trace, "d2", "page") == "PagingFailed");
  CHECK(corpus::count_events(trace, "PagingFailed") == 1);
}

TEST_CASE("redirect attaches each device to its subscribed slice") {
  auto trace = run(corpus::scenario("attach-redirect")).trace;
  std::map<std::string, std::string> bound;
  for (const auto& e : corpus::events(trace))
    if (e.name == "bound") bound[e.subject] = e.detail.at("slice");
  CHECK(bound == std::map<std::string, std::string>{{"d1", "embb"}, {"d2", "generic"}, {"d3", "miot"}});
  std::set<std::string> redirected;
  for (const auto& m : corpus::messages(trace))
    if (m.msg.kind == ProcedureKind::SliceRedirect) redirected.insert(m.msg.payload.at("dev"));
  CHECK(redirected == std::set<std::string>{"d1", "d3"});
  for (const auto& d : {"d1", "d2", "d3"}) CHECK(proc_result(trace, d, "attach") == "ok");
}

TEST_CASE("one device in two slices, one torn down") {
  auto res = run(corpus::scenario("two-slices"));
  int bound = 0;
  for (const auto& e : corpus::events(res.trace)) bound += e.name == "bound" && e.subject == "d1";
  CHECK(bound == 2);
  CHECK(corpus::count_events(res.trace, "lifecycle") >= 1);
  CHECK(check_trace(res.trace).ok());
}

TEST_CASE("seed and fabric options") {
  auto in = corpus::scenario("attach-global");
  auto a = run(in);
  RunOptions o;
  o.seed = 77;
  auto b = run(in, o);
  CHECK(b.trace.find("seed=77") != std::string::npos);
  CHECK(run(in, o).trace == b.trace);
  o.fabric = FabricModelKind::Relay;
  auto relay = run(in, o);
  CHECK(relay.digests == b.digests);
  CHECK(relay.metrics.number("hops.total") > b.metrics.number("hops.total"));
}

TEST_CASE("replay reproduces traces") {
  for (const auto& name : {"handover-bbm", "context-reselect"}) {
    auto res = run(corpus::scenario(name));
    auto again = replay(res.trace);
    CHECK(again.trace == res.trace);
    CHECK(again.digests == res.digests);
  }
  CHECK_THROWS_AS(replay("garbage\n"), Error);
}

TEST_CASE("fabric comparison") {
  auto in = corpus::scenario("handover-mbb");
  auto cmp = compare_fabrics(in);
  REQUIRE(cmp.rows.size() == 4);
  CHECK(cmp.rows[0].model == FabricModelKind::FullMesh);
  for (const auto& r : cmp.rows) CHECK(r.digest == cmp.rows[0].digest);
  CHECK(cmp.rows[0].hops < cmp.rows[1].hops);
  CHECK(cmp.rows[2].hops == cmp.rows[3].hops);
  CHECK(cmp.str().find("Dispatcher") != std::string::npos);
}

TEST_CASE("a dispatcher that drops a needed field breaks equivalence") {
  auto table = default_projections();
  table[{ProcedureKind::SessionEstablish, Role::FM}].erase("anchor");
  CHECK_THROWS_AS(compare_fabrics(corpus::scenario("attach-redirect"), std::nullopt, table), EquivalenceViolation);
}
