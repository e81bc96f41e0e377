#include <random>

#include "doctest.h"
#include "ngcp/catalog.hpp"
#include "ngcp/errors.hpp"
#include "support/corpus.hpp"
#include "support/oracles.hpp"

using namespace ngcp;

namespace {

const char* kTiny = R"(
sf id=a originator=3GPP domain=Access placement=Edge reusability=MultiService optionality=AllUseCases evolution=Slow
sf id=b originator=3GPP domain=Access placement=Edge reusability=MultiService optionality=AllUseCases evolution=Slow
sf id=c originator=3GPP domain=Access placement=Core reusability=MultiService optionality=AllUseCases evolution=Slow
sf id=d originator=3GPP domain=Security placement=Core reusability=MultiService optionality=AllUseCases evolution=Fast
procedure id=p
step procedure=p from=a to=b
step procedure=p from=b to=d
step procedure=p from=c to=d
)";

}  // namespace

TEST_CASE("catalog loading rejects duplicates and missing attributes") {
  std::string dup = std::string(kTiny) +
                    "sf id=a originator=3GPP domain=Access placement=Edge reusability=MultiService "
                    "optionality=AllUseCases evolution=Slow\n";
  CHECK_THROWS_AS(load_catalog(dup), DuplicateSfError);
  CHECK_THROWS_AS(load_catalog("sf id=x originator=3GPP domain=Access placement=Edge\n"), MissingAttributeError);
  CHECK_THROWS_AS(load_catalog("sf id=x originator=3GPP domain=Nowhere placement=Edge reusability=MultiService "
                               "optionality=AllUseCases evolution=Slow\n"),
                  SchemaError);
  CHECK_THROWS_AS(load_catalog(std::string(kTiny) + "step procedure=p from=a to=zz\n"), SchemaError);
}

TEST_CASE("separation constraints come from conflicting attributes") {
  auto cat = load_catalog(kTiny);
  auto cons = derive_separation_constraints(cat);
  CHECK(cons.count(SeparationConstraint("c", "a", SeparationCriterion::Placement)) == 1);
  CHECK(cons.count(SeparationConstraint("a", "b", SeparationCriterion::Placement)) == 0);
  for (const auto& c : cons) CHECK(c.sf_a < c.sf_b);
}

TEST_CASE("tiny catalog groups by domain and constraints") {
  auto cat = load_catalog(kTiny);
  auto bbs = group_into_bbs(cat, derive_separation_constraints(cat));
  REQUIRE(bbs.size() == 3);
  std::set<std::set<std::string>> parts;
  for (const auto& bb : bbs) parts.insert(bb.sf_set);
  CHECK(parts == std::set<std::set<std::string>>{{"a", "b"}, {"c"}, {"d"}});
  auto report = evaluate_grouping(bbs, cat.procedures());
  CHECK(report.total_inter_bb_interfaces == 2);
  CHECK(report.cross_bb.at("p") == 2);
  CHECK(report.intra_bb.at("p") == 1);
}

TEST_CASE("reference catalog yields six blocks and nine interfaces") {
  auto cat = load_catalog(corpus::read("catalog/reference.cat"));
  CHECK(cat.size() == 23);
  auto bbs = group_into_bbs(cat, derive_separation_constraints(cat));
  CHECK(bbs.size() == 6);
  auto report = evaluate_grouping(bbs, cat.procedures());
  CHECK(report.total_inter_bb_interfaces == 9);
  CHECK(refine(bbs, report).action == RefinementAction::Accept);
  std::set<std::string> seen;
  for (const auto& bb : bbs) {
    CHECK(bb.domains.size() == 1);
    for (const auto& sf : bb.sf_set) CHECK(seen.insert(sf).second);
  }
  CHECK(seen.size() == 23);
}

TEST_CASE("refine thresholds") {
  GroupingReport r;
  r.cross_bb = {{"p", 3}};
  CHECK(refine({}, r, 6).action == RefinementAction::Accept);
  r.cross_bb["q"] = 7;
  CHECK(refine({}, r, 6).action == RefinementAction::RevisitStep3);
  r.cross_bb["z"] = 13;
  auto d = refine({}, r, 6);
  CHECK(d.action == RefinementAction::RevisitStep1);
  CHECK(d.offending == std::vector<std::string>{"z"});
}

TEST_CASE("grouping is a partition that respects every constraint") {
  std::mt19937_64 rng(4242);
  for (int i = 0; i < 40; ++i) {
    auto cat = load_catalog(oracle::random_catalog(rng, 2 + static_cast<int>(rng() % 6), 3));
    auto cons = derive_separation_constraints(cat);
    auto bbs = group_into_bbs(cat, cons);
    std::map<std::string, int> owner;
    for (std::size_t b = 0; b < bbs.size(); ++b) {
      CHECK(bbs[b].domains.size() == 1);
      for (const auto& sf : bbs[b].sf_set) CHECK(owner.emplace(sf, static_cast<int>(b)).second);
    }
    CHECK(owner.size() == cat.size());
    for (const auto& c : cons) CHECK(owner[c.sf_a] != owner[c.sf_b]);
    CHECK(group_into_bbs(cat, cons) == bbs);
  }
}
