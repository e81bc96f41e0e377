#include "doctest.h"
#include "ngcp/engine.hpp"
#include "ngcp/errors.hpp"
#include "ngcp/slices.hpp"
#include "support/corpus.hpp"

using namespace ngcp;

namespace {

DocResolver resolver() {
  return [](const std::string& from, const std::string& ref) {
    auto key = resolve_key(from, ref);
    return std::make_pair(key, corpus::read(key));
  };
}

SliceBlueprint blueprint(const std::string& name) {
  auto doc = "blueprints/" + name + ".bp";
  return load_blueprint(corpus::read(doc), doc, resolver());
}

const std::vector<BbDefinition>& reference_bbs() {
  static const auto bbs = grouping_for(corpus::read("catalog/reference.cat"), "reference.cat");
  return bbs;
}

Infrastructure metro() {
  Infrastructure infra;
  infra.topology = load_topology(corpus::read("topologies/metro.topo"));
  return infra;
}

}  // namespace

TEST_CASE("shipped blueprints parse and expand policies") {
  auto bp = blueprint("embb");
  CHECK(bp.slice_id == SliceId("embb"));
  CHECK(bp.capacity_share == 40);
  REQUIRE(bp.mobility_policy.has_value());
  CHECK(bp.mobility_policy->style == HandoverStyle::MakeBeforeBreak);
  CHECK(bp.mobility_policy->forbidden.count(AccessTech::Fixed) == 1);
  CHECK(bp.paging_timeout == 4);
  REQUIRE(bp.context_models.size() == 1);
  CHECK(bp.context_models[0].factor_num == 3);
  CHECK(bp.qos_policies.at("video").reserve == 2);
  CHECK(bp.session_qos == "video");
  CHECK(blueprint("embb-bbm").mobility_policy->style == HandoverStyle::BreakBeforeMake);
  CHECK_THROWS_AS(load_blueprint("slice id=x type=Nope\n", "x.bp"), SchemaError);
}

TEST_CASE("valid blueprints pass validation") {
  for (const auto& name : {"generic", "embb", "embb-bbm", "miot", "fixed", "hog"})
    CHECK_MESSAGE(validate_blueprint(blueprint(name), reference_bbs()).ok(), name);
}

TEST_CASE("invalid blueprints name their violation") {
  auto has = [](const BlueprintVerdict& v, const std::string& text) {
    for (const auto& s : v.violations)
      if (s.find(text) != std::string::npos) return true;
    return false;
  };
  auto missing = validate_blueprint(blueprint("missing-sam"), reference_bbs());
  CHECK_FALSE(missing.ok());
  CHECK(has(missing, "SAM"));
  CHECK(has(validate_blueprint(blueprint("mobility-no-mm"), reference_bbs()), "mobility policy without MM"));
  CHECK(has(validate_blueprint(blueprint("bad-sf"), reference_bbs()), "device-paging does not belong to BB CM"));
}

TEST_CASE("lifecycle order") {
  auto infra = metro();
  auto s = instantiate(blueprint("generic"), infra, 1, {}, "key");
  CHECK(s.state == LifecycleState::Instantiated);
  CHECK(s.fabric.has_value());
  CHECK_FALSE(s.mm.has_value());
  operate(s);
  CHECK(s.state == LifecycleState::Operating);
  CHECK_THROWS_AS(operate(s), LifecycleOrderError);
  teardown(s, 1);
  CHECK(s.state == LifecycleState::TornDown);
  CHECK_THROWS_AS(teardown(s, 2), LifecycleOrderError);
  CHECK_THROWS_AS(operate(s), LifecycleOrderError);
}

TEST_CASE("capacity shares are bounded by the infrastructure") {
  auto infra = metro();
  auto a = instantiate(blueprint("embb"), infra, 1, {}, "key");
  auto b = instantiate(blueprint("miot"), infra, 1, {}, "key");
  CHECK(a.ids.at(Role::CM) != b.ids.at(Role::CM));
  for (const auto& [k, pct] : infra.allocated_percent) CHECK(pct == 60);
  CHECK(a.dplane.graph.link("t1", "p1")->capacity == 16);
  CHECK_THROWS_AS(instantiate(blueprint("hog"), infra, 1, {}, "key"), InfraCapacityError);
}
