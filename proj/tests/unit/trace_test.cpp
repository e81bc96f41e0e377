#include "doctest.h"
#include "ngcp/engine.hpp"
#include "ngcp/errors.hpp"
#include "ngcp/trace.hpp"
#include "support/corpus.hpp"

using namespace ngcp;

namespace {

bool mentions(const TraceAudit& a, const std::string& text) {
  for (const auto& v : a.violations)
    if (v.find(text) != std::string::npos) return true;
  return false;
}

std::string replace_line(std::string trace, const std::string& prefix, const std::string& with) {
  auto at = trace.find(prefix);
  REQUIRE(at != std::string::npos);
  auto end = trace.find('\n', at);
  return trace.replace(at, end - at, with);
}

const std::string& handover_trace() {
  static const std::string t = run(corpus::scenario("handover-mbb")).trace;
  return t;
}

}  // namespace

TEST_CASE("field escaping round-trips") {
  for (std::string s : {"", "plain", "a\tb", "line\nbreak\r", "back\\slash\\t"}) {
    auto e = escape_field(s);
    CHECK(e.find('\t') == std::string::npos);
    CHECK(e.find('\n') == std::string::npos);
    CHECK(unescape_field(e) == s);
  }
}

TEST_CASE("MSG lines round-trip") {
  SignalMessage m;
  m.msg_id = 12;
  m.tick = 3;
  m.kind = ProcedureKind::SessionEstablish;
  m.source = Endpoint::of({Role::CM, 1});
  m.destination = Endpoint::of({Role::FM, 2});
  m.correlation_id = 4;
  m.payload = {{"dev", "d1"}, {"anchor", "p 1;x"}};
  DeliveryRecord rec;
  rec.hop_count = 2;
  rec.mediators = {{Role::CPD, 0}};
  rec.recipients = {m.destination};
  auto lines = parse_trace(format_trace_line(msg_line(m, &rec)));
  REQUIRE(lines.size() == 1);
  auto back = parse_msg_line(lines[0]);
  CHECK(back.msg.payload == m.payload);
  CHECK(back.msg.destination == m.destination);
  CHECK(back.hops == 2);
  CHECK(back.mediators == std::vector<std::string>{"CPD#0"});
  CHECK(parse_msg_line(parse_trace(format_trace_line(msg_line(m, nullptr)))[0]).hops == -1);
  CHECK_THROWS_AS(parse_msg_line(TraceLine{"MSG", {"1"}}), SchemaError);
}

TEST_CASE("metrics report round-trips and folds consistently") {
  auto res = run(corpus::scenario("paging"));
  CHECK(fold_metrics(res.trace) == res.metrics);
  CHECK(MetricsReport::parse(res.metrics.str()) == res.metrics);
  CHECK(res.metrics.number("msg.total") == static_cast<long long>(corpus::messages(res.trace).size()));
  CHECK(res.metrics.number("missing.key") == 0);
  CHECK_THROWS_AS(MetricsReport::parse("bogus key=a value=b\n"), SchemaError);
}

TEST_CASE("audit accepts every corpus trace") {
  for (const auto& name : corpus::names()) {
    auto audit = check_trace(run(corpus::scenario(name)).trace);
    CHECK_MESSAGE(audit.ok(), name << ": " << (audit.ok() ? "" : audit.violations.front()));
  }
}

TEST_CASE("audit catches tampering") {
  const auto& t = handover_trace();
  CHECK(mentions(check_trace(""), "no RUN line"));

  auto leak = t;
  for (const auto& m : corpus::messages(t)) {
    if (m.msg.iface != InterfacePoint::I3 || !m.msg.payload.count("dev") || m.msg.tick < 16) continue;
    auto msg = m.msg;
    msg.payload["supi"] = "imsi-001";
    DeliveryRecord rec;
    rec.hop_count = m.hops < 0 ? 1 : m.hops;
    std::string line = format_trace_line(msg_line(msg, m.hops < 0 ? nullptr : &rec));
    line.pop_back();
    leak = replace_line(leak, "MSG\t" + std::to_string(m.msg.msg_id) + "\t", line);
    break;
  }
  CHECK(leak != t);
  CHECK(mentions(check_trace(leak), "permanent identity"));

  auto flows = t;
  auto at = flows.find("\nFLW\t");
  REQUIRE(at != std::string::npos);
  auto sent = flows.find("sent=", at);
  flows.insert(sent + 5, "9");
  CHECK(mentions(check_trace(flows), "does not conserve units"));

  auto order = replace_line(t, "EVT\t", "EVT\t999\tbogus\tx\t-");
  CHECK(mentions(check_trace(order), "out of order"));
}
