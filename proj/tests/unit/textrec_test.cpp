#include "doctest.h"
#include "ngcp/errors.hpp"
#include "ngcp/textrec.hpp"

using namespace ngcp;

TEST_CASE("records parse bare and quoted values") {
  auto recs = parse_records("# header\n\nsf id=a name=\"two words\" note=\"q\\\"x\"\nproc id=p\n", "doc");
  REQUIRE(recs.size() == 2);
  CHECK(recs[0].kind == "sf");
  CHECK(recs[0].get("name") == "two words");
  CHECK(recs[0].get("note") == "q\"x");
  CHECK(recs[0].line == 3);
  CHECK(recs[1].get("id") == "p");
  CHECK_THROWS_AS(recs[1].get("missing"), SchemaError);
}

TEST_CASE("format_record round-trips") {
  Record r;
  r.kind = "x";
  r.set("a", "plain").set("b", "with space").set("c", "quote\"and\\slash").set("d", "");
  auto back = parse_records(format_record(r));
  REQUIRE(back.size() == 1);
  CHECK(back[0].fields == r.fields);
}

TEST_CASE("malformed records are rejected") {
  CHECK_THROWS_AS(parse_records("sf id=\"open\n"), SchemaError);
  CHECK_THROWS_AS(parse_records("sf novalue\n"), SchemaError);
  auto recs = parse_records("sf id=a extra=1\n");
  CHECK_THROWS_AS(recs[0].expect_keys({"id"}), SchemaError);
  CHECK_NOTHROW(recs[0].expect_keys({"id", "extra"}));
}

TEST_CASE("integers and lists") {
  auto r = parse_records("t n=42 bad=4x l=a,b,c\n")[0];
  CHECK(r.get_int("n") == 42);
  CHECK(r.get_int_or("none", 7) == 7);
  CHECK_THROWS_AS(r.get_int("bad"), SchemaError);
  CHECK(r.get_list("l") == std::vector<std::string>{"a", "b", "c"});
  CHECK(join(split("x,,y", ','), "|") == "x||y");
}
