// Acceptance gate: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails.

#include <chrono>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "ngcp/engine.hpp"
#include "support/corpus.hpp"
#include "support/oracles.hpp"

using namespace ngcp;
using K = ProcedureKind;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  bool ok = true;
  std::string note;
  void fail(const std::string& why) {
    if (ok) note = why;
    ok = false;
  }
};

// -------------------------------------------------------------- criteria

Outcome table_reproduction() {
  Outcome o;
  auto t0 = Clock::now();
  auto cat = load_catalog(corpus::read("catalog/reference.cat"), "reference.cat");
  auto bbs = group_into_bbs(cat, derive_separation_constraints(cat));
  double elapsed = seconds_since(t0);

  const std::map<std::string, std::set<std::string>> expected = {
      {"AF", {"d-plane-control", "an-management", "cn-access-control", "path-record"}},
      {"CM",
       {"network-access-control", "access-functions-control", "session-management", "slice-management",
        "roaming-management"}},
      {"MM", {"mobility-policy-enforcement", "device-location-tracking", "device-paging", "mobility-assistance"}},
      {"SAM", {"identity-database", "authentication-authorization", "single-sign-on", "security-monitoring"}},
      {"FM", {"forwarding-plane-monitoring", "forwarding-path-definition", "flow-management-decision"}},
      {"CGHF", {"pubsub-management", "context-generation", "context-management"}},
  };
  if (cat.procedures().size() != 6) o.fail("expected 6 reference procedures");
  std::map<std::string, std::set<std::string>> got;
  for (const auto& bb : bbs) got[bb.name] = bb.sf_set;
  if (got != expected) o.fail("BB memberships differ from the reference table");
  if (elapsed >= 5.0) o.fail("compose took " + std::to_string(elapsed) + " s");
  o.note = o.ok ? "6 BBs, sizes 4/5/4/4/3/3, " + std::to_string(elapsed) + " s" : o.note;
  return o;
}

Outcome grouping_optimality() {
  Outcome o;
  auto t0 = Clock::now();
  std::mt19937_64 rng(20240611);
  int checked = 0;
  for (int i = 0; i < 60; ++i) {
    int n = 2 + static_cast<int>(rng() % 5);  // 2..6 SFs
    int domains = 1 + static_cast<int>(rng() % 3);
    auto cat = load_catalog(oracle::random_catalog(rng, n, domains), "random");
    int best = oracle::exhaustive_min_interfaces(cat);
    auto bbs = group_into_bbs(cat, derive_separation_constraints(cat));
    int got = oracle::count_interfaces(cat, bbs);
    if (got != best || evaluate_grouping(bbs, cat.procedures()).total_inter_bb_interfaces != best)
      o.fail("catalog " + std::to_string(i) + ": score " + std::to_string(got) + ", optimum " + std::to_string(best));
    ++checked;
  }
  double elapsed = seconds_since(t0);
  if (elapsed >= 30.0) o.fail("took " + std::to_string(elapsed) + " s");
  if (o.ok) o.note = std::to_string(checked) + " random catalogs match exhaustive enumeration";
  return o;
}

Outcome fabric_equivalence() {
  Outcome o;
  const std::vector<std::string> names = {"attach-global", "attach-redirect", "handover-mbb", "paging",
                                          "context-reselect", "fixed-access", "two-slices"};
  for (const auto& n : names) {
    try {
      auto cmp = compare_fabrics(corpus::scenario(n));
      const auto& full = cmp.rows[0];
      if (full.unicast_interbb >= 1 && !(full.hops < cmp.rows[1].hops && full.hops < cmp.rows[2].hops))
        o.fail(n + ": FullMesh hops not strictly below Relay and Dispatcher");
    } catch (const EquivalenceViolation& e) {
      o.fail(n + ": " + e.what());
    }
  }
  if (o.ok) o.note = std::to_string(names.size()) + " scenarios, equal digests under 4 fabrics";
  return o;
}

std::map<std::string, std::string> final_bindings(const std::string& trace) {
  std::map<std::string, std::string> out;
  for (const auto& e : corpus::events(trace)) {
    if (e.name == "bound") out[e.subject] = e.detail.at("slice");
    if (e.name == "ue-released") out.erase(e.subject);
  }
  return out;
}

Outcome selection_methods() {
  Outcome o;
  auto m1 = run(corpus::scenario("selection-global")).trace;
  auto m2 = run(corpus::scenario("selection-default")).trace;
  auto b1 = final_bindings(m1), b2 = final_bindings(m2);
  if (b1.size() != 3 || b1 != b2) o.fail("final bindings differ between methods");
  if (corpus::count_messages(m1, K::SliceRedirect) != 0) o.fail("method 1 trace contains SliceRedirect");
  // d1 and d2 subscribe to slices other than the default one.
  std::set<std::string> redirected;
  for (const auto& m : corpus::messages(m2))
    if (m.msg.kind == K::SliceRedirect) redirected.insert(m.msg.payload.at("dev"));
  if (redirected != std::set<std::string>{"d1", "d2"}) o.fail("method 2 redirects the wrong devices");
  if (o.ok) o.note = "3 devices bound alike; redirects only under method 2";
  return o;
}

struct FlowTotals {
  long long sent = 0, delivered = 0, lost = 0;
};

FlowTotals flow_of(const MetricsReport& m, const std::string& slice, const std::string& flow) {
  std::string base = "flow." + slice + "." + flow + ".";
  return {m.number(base + "sent"), m.number(base + "delivered"), m.number(base + "lost")};
}

Outcome mobility_continuity() {
  Outcome o;
  auto mbb = run(corpus::scenario("handover-mbb"));
  auto bbm = run(corpus::scenario("handover-bbm"));
  auto fm = flow_of(mbb.metrics, "embb", "flow-embb-1");
  auto fb = flow_of(bbm.metrics, "embb", "flow-embb-1");
  if (fm.sent == 0 || fm.lost != 0) o.fail("MakeBeforeBreak lost " + std::to_string(fm.lost));
  if (fb.lost < 1) o.fail("BreakBeforeMake lost nothing");
  std::string bound, after;
  for (const auto& e : corpus::events(mbb.trace)) {
    if (e.name == "bound") bound = e.detail.at("session");
    if (e.name == "handover-complete") after = e.detail.at("session");
  }
  if (bound.empty() || bound != after) o.fail("session changed across the handover");
  if (o.ok)
    o.note = "MBB loss 0 of " + std::to_string(fm.sent) + ", BBM loss " + std::to_string(fb.lost) + ", session " +
             bound + " kept";
  return o;
}

Outcome no_mm_rule() {
  Outcome o;
  auto res = run(corpus::scenario("fixed-access"));
  int to_mm = 0, cm_af = 0;
  for (const auto& m : corpus::messages(res.trace)) {
    if (m.msg.destination.is_bb(Role::MM)) ++to_mm;
    if ((m.msg.source.is_bb(Role::CM) && m.msg.destination.is_bb(Role::AF)) ||
        (m.msg.source.is_bb(Role::AF) && m.msg.destination.is_bb(Role::CM)))
      ++cm_af;
  }
  bool attached = false;
  for (const auto& e : corpus::events(res.trace))
    if (e.name == "end" && e.detail.at("proc") == "attach" && e.detail.at("result") == "ok") attached = true;
  int unsupported = corpus::count_events(res.trace, "MobilityUnsupported");
  if (!attached) o.fail("attachment did not complete");
  if (to_mm != 0) o.fail(std::to_string(to_mm) + " messages addressed to MM");
  if (cm_af == 0) o.fail("no direct CM-AF signalling");
  if (unsupported != 1) o.fail(std::to_string(unsupported) + " MobilityUnsupported events");
  if (o.ok) o.note = "attached, 0 MM messages, " + std::to_string(cm_af) + " CM-AF messages, 1 MobilityUnsupported";
  return o;
}

Outcome path_oracles() {
  Outcome o;
  auto t0 = Clock::now();
  std::mt19937_64 rng(777);
  int graphs = 0;
  for (int i = 0; i < 30; ++i) {
    int n = 3 + static_cast<int>(rng() % 6);  // 3..8 nodes
    auto g = oracle::random_graph(rng, n, n, 6);
    std::string src = "n0", dst = "n" + std::to_string(n - 1);
    int demand = static_cast<int>(rng() % 2);

    FmState s;
    s.topology = g;
    s.stretch_percent = 50;
    for (const auto& [k, spec] : g.links) {
      if (rng() % 3 == 0) s.reserved[k] = static_cast<int>(rng() % (spec.capacity + 1));
      if (rng() % 2 == 0) s.observed[k] = static_cast<int>(rng() % 4);
    }
    auto eligible = [&](const std::vector<std::string>& p) {
      for (std::size_t j = 0; j + 1 < p.size(); ++j) {
        LinkKey k(p[j], p[j + 1]);
        int reserved = s.reserved.count(k) ? s.reserved.at(k) : 0;
        if (g.links.at(k).capacity - reserved < demand) return false;
      }
      return true;
    };
    std::vector<std::vector<std::string>> cands;
    for (auto& p : oracle::simple_paths(g, src, dst))
      if (eligible(p)) cands.push_back(p);
    if (cands.empty()) continue;
    ++graphs;

    // Shortest: minimum latency, then the smallest node sequence.
    auto best_sp = *std::min_element(cands.begin(), cands.end(), [&](const auto& a, const auto& b) {
      auto la = oracle::latency_of(g, a), lb = oracle::latency_of(g, b);
      return la != lb ? la < lb : a < b;
    });
    FmState sp = s;
    sp.qos_policies["q"] = {demand, PathStrategy::ShortestPath};
    auto got_sp = fm_define_path(sp, FlowId("f"), src, dst, "q").nodes;
    if (got_sp != best_sp) o.fail("graph " + std::to_string(i) + ": ShortestPath differs from brute force");

    // Load distribution: minimum bottleneck utilization within the stretch bound.
    long long shortest = oracle::latency_of(g, best_sp);
    using Util = std::pair<long long, long long>;  // num, den
    auto util = [&](const std::vector<std::string>& p) {
      Util worst{0, 1};
      for (std::size_t j = 0; j + 1 < p.size(); ++j) {
        LinkKey k(p[j], p[j + 1]);
        long long num = (s.reserved.count(k) ? s.reserved.at(k) : 0) + (s.observed.count(k) ? s.observed.at(k) : 0) +
                        demand;
        long long den = g.links.at(k).capacity;
        if (num * worst.second > worst.first * den) worst = {num, den};
      }
      return worst;
    };
    std::optional<Util> best_u;
    for (const auto& p : cands) {
      if (oracle::latency_of(g, p) * 100 > shortest * 150) continue;
      auto u = util(p);
      if (!best_u || u.first * best_u->second < best_u->first * u.second) best_u = u;
    }
    FmState ld = s;
    ld.qos_policies["q"] = {demand, PathStrategy::LoadDistribution};
    auto got_ld = fm_define_path(ld, FlowId("f"), src, dst, "q").nodes;
    auto u = util(got_ld);
    if (oracle::latency_of(g, got_ld) * 100 > shortest * 150)
      o.fail("graph " + std::to_string(i) + ": LoadDistribution exceeds the stretch bound");
    if (u.first * best_u->second != best_u->first * u.second)
      o.fail("graph " + std::to_string(i) + ": LoadDistribution utilization not minimal");
  }
  double elapsed = seconds_since(t0);
  if (graphs < 20) o.fail("only " + std::to_string(graphs) + " usable topologies");
  if (elapsed >= 60.0) o.fail("took " + std::to_string(elapsed) + " s");
  if (o.ok) o.note = std::to_string(graphs) + " random topologies match brute force";
  return o;
}

int supi_leaks(const std::string& trace) {
  std::map<std::string, std::string> supi_of;
  for (const auto& l : parse_trace(trace))
    if (l.tag == "DEV") supi_of[l.fields[0]] = l.fields[1];
  std::set<std::string> authenticated;
  int leaks = 0;
  for (const auto& l : parse_trace(trace)) {
    if (l.tag == "EVT") {
      auto d = decode_payload(l.fields[3]);
      if ((l.fields[1] == "auth" && d["ok"] == "1") || l.fields[1] == "context-import")
        authenticated.insert(l.fields[2]);
    } else if (l.tag == "MSG") {
      auto m = parse_msg_line(l);
      if (!is_wbi(m.msg.iface)) continue;
      for (const auto& dev : authenticated)
        for (const auto& [k, v] : m.msg.payload)
          if (v == supi_of[dev]) ++leaks;
    }
  }
  return leaks;
}

Outcome sam_properties() {
  Outcome o;
  // Audit completeness over a random mix of good and bad attempts.
  std::mt19937_64 rng(99), auth_rng(5);
  SamState sam;
  sam.operator_key = "k";
  sam.identity_db[PermanentSubscriberId("imsi-1")] = {"secret"};
  int attempts = 0;
  for (int i = 0; i < 200; ++i) {
    bool known = rng() % 4 != 0;
    bool good = rng() % 3 != 0;
    Credentials c{good ? "secret" : "wrong", ""};
    sam_authenticate(sam, DeviceId("d"), PermanentSubscriberId(known ? "imsi-1" : "imsi-x"), c,
                     AuthScheme::LowSecure, i, auth_rng);
    ++attempts;
  }
  int audited = 0;
  for (const auto& a : sam.audit_log) audited += a.kind == AuditKind::Auth;
  if (audited != attempts) o.fail("audit has " + std::to_string(audited) + " of " + std::to_string(attempts));

  int leaks = 0;
  for (const auto& n : corpus::names()) leaks += supi_leaks(run(corpus::scenario(n)).trace);
  if (leaks != 0) o.fail(std::to_string(leaks) + " permanent identities on the WBI after authentication");

  auto trace = run(corpus::scenario("attach-global")).trace;
  Tick first_sso = -1;
  int sso_ok = 0;
  for (const auto& e : corpus::events(trace))
    if (e.name == "sso") {
      if (first_sso < 0) first_sso = e.tick;
      sso_ok += e.detail.at("ok") == "1";
    }
  int challenges = 0;
  for (const auto& m : corpus::messages(trace))
    if (m.msg.kind == K::AuthChallenge && m.msg.tick >= first_sso) ++challenges;
  if (first_sso < 0 || sso_ok != 2) o.fail("single sign-on to two services did not succeed");
  if (challenges != 0) o.fail("single sign-on emitted " + std::to_string(challenges) + " AuthChallenge");
  if (o.ok) o.note = "audit " + std::to_string(audited) + "/" + std::to_string(attempts) + ", 0 leaks, SSO without challenge";
  return o;
}

Outcome cghf_loop() {
  Outcome o;
  auto trace = run(corpus::scenario("context-reselect")).trace;
  auto msgs = corpus::messages(trace);

  // The degradation must double the reported latency of the flow.
  std::vector<long long> lat;
  for (const auto& m : msgs)
    if (m.msg.kind == K::FlowNotify)
      for (const auto& item : split(m.msg.payload.count("lat") ? m.msg.payload.at("lat") : "", ','))
        if (item.rfind("flow-embb-1:", 0) == 0) lat.push_back(std::stoll(item.substr(12)));
  if (lat.empty() || std::find(lat.begin(), lat.end(), 2 * lat.front()) == lat.end())
    o.fail("no samples at twice the baseline latency");

  std::size_t notify = msgs.size(), reselect = msgs.size(), install = msgs.size();
  int notifies = 0;
  for (std::size_t i = 0; i < msgs.size(); ++i) {
    const auto& m = msgs[i].msg;
    if (m.kind == K::ContextNotify && m.payload.count("statement") &&
        m.payload.at("statement") == "LatencyAboveNormal") {
      ++notifies;
      notify = std::min(notify, i);
    }
    if (i > notify && reselect == msgs.size() && m.kind == K::SessionEstablish && m.source.is_bb(Role::CM) &&
        m.destination.is_bb(Role::FM) && m.payload.count("op") && m.payload.at("op") == "reselect")
      reselect = i;
    if (i > reselect && install == msgs.size() && m.kind == K::FlowConfigure && m.iface == InterfacePoint::I4_SBI &&
        m.payload.count("op") && m.payload.at("op") == "install")
      install = i;
  }
  if (notifies != 1) o.fail(std::to_string(notifies) + " LatencyAboveNormal notifications");
  if (reselect == msgs.size()) o.fail("no CM reselection after the notification");
  if (install == msgs.size()) o.fail("no FM rule installation for the new path");
  if (o.ok) o.note = "1 notification, then reselection, then FlowConfigure install";
  return o;
}

Outcome determinism() {
  Outcome o;
  int n = 0;
  for (const auto& name : corpus::names()) {
    auto in = corpus::scenario(name);
    auto a = run(in), b = run(in);
    if (a.trace != b.trace) o.fail(name + ": traces differ between equal-seed runs");
    if (fold_metrics(a.trace) != a.metrics) o.fail(name + ": metrics not reproduced from the trace");
    if (MetricsReport::parse(a.metrics.str()) != a.metrics) o.fail(name + ": metrics file does not round-trip");
    if (replay(a.trace).trace != a.trace) o.fail(name + ": replay differs");
    ++n;
  }
  if (o.ok) o.note = std::to_string(n) + " scenarios byte-identical, metrics and replay reproduced";
  return o;
}

Outcome isolation() {
  Outcome o;
  auto base = run(corpus::scenario("isolation"));
  auto injected = run(corpus::scenario("isolation-injected"));
  if (base.digests.at("miot") != injected.digests.at("miot")) o.fail("slice miot digest changed");
  if (base.digests.at("embb") == injected.digests.at("embb")) o.fail("injection did not change slice embb");
  if (o.ok) o.note = "miot digest " + base.digests.at("miot") + " unchanged";
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"reference grouping", table_reproduction},
      {"grouping optimality", grouping_optimality},
      {"fabric equivalence", fabric_equivalence},
      {"slice selection methods", selection_methods},
      {"mobility continuity", mobility_continuity},
      {"slice without MM", no_mm_rule},
      {"FM path oracles", path_oracles},
      {"SAM properties", sam_properties},
      {"context loop", cghf_loop},
      {"determinism and replay", determinism},
      {"slice isolation", isolation},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o.fail(std::string("exception: ") + e.what());
    }
    failed += !o.ok;
    std::cout << "criterion " << i + 1 << " " << (o.ok ? "PASS" : "FAIL") << " " << criteria[i].first << ": "
              << o.note << "\n";
  }
  return failed == 0 ? 0 : 1;
}
