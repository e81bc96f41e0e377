#include "ngcp/trace.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "ngcp/blocks/common.hpp"
#include "ngcp/errors.hpp"
#include "ngcp/textrec.hpp"

namespace ngcp {

namespace {

long long to_ll(const std::string& s, const std::string& what) {
  try {
    std::size_t pos = 0;
    long long v = std::stoll(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw SchemaError("trace: bad " + what + " '" + s + "'");
  }
}

void bump(std::map<std::string, long long>& m, const std::string& key, long long by = 1) { m[key] += by; }

std::map<std::string, std::string> kv_fields(const std::vector<std::string>& fields, std::size_t from) {
  std::map<std::string, std::string> out;
  for (std::size_t i = from; i < fields.size(); ++i) {
    auto eq = fields[i].find('=');
    if (eq == std::string::npos) continue;
    out[fields[i].substr(0, eq)] = fields[i].substr(eq + 1);
  }
  return out;
}

}  // namespace

std::string escape_field(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '\t': out += "\\t"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\\': out += "\\\\"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

std::string unescape_field(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] != '\\' || i + 1 == s.size()) {
      out.push_back(s[i]);
      continue;
    }
    switch (s[++i]) {
      case 't': out.push_back('\t'); break;
      case 'n': out.push_back('\n'); break;
      case 'r': out.push_back('\r'); break;
      default: out.push_back(s[i]);
    }
  }
  return out;
}

std::string format_trace_line(const TraceLine& line) {
  std::string out = line.tag;
  for (const auto& f : line.fields) {
    out.push_back('\t');
    out += escape_field(f);
  }
  out.push_back('\n');
  return out;
}

std::vector<TraceLine> parse_trace(std::string_view text) {
  std::vector<TraceLine> out;
  std::size_t start = 0;
  int lineno = 0;
  while (start < text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    auto raw = text.substr(start, end - start);
    start = end + 1;
    ++lineno;
    if (raw.empty()) continue;
    auto parts = split(raw, '\t');
    if (parts.empty() || parts[0].empty()) throw SchemaError("trace:" + std::to_string(lineno) + ": empty tag");
    TraceLine line;
    line.tag = parts[0];
    for (std::size_t i = 1; i < parts.size(); ++i) line.fields.push_back(unescape_field(parts[i]));
    out.push_back(std::move(line));
  }
  return out;
}

TraceLine msg_line(const SignalMessage& msg, const DeliveryRecord* record) {
  TraceLine line{"MSG", {}};
  auto& f = line.fields;
  f.push_back(std::to_string(msg.msg_id));
  f.push_back(std::to_string(msg.tick));
  f.emplace_back(to_string(msg.kind));
  f.push_back(msg.source.str());
  f.push_back(msg.destination.str());
  f.emplace_back(to_string(msg.iface));
  f.push_back(std::to_string(msg.correlation_id));
  if (record) {
    std::vector<std::string> med, rec;
    for (const auto& m : record->mediators) med.push_back(m.str());
    for (const auto& r : record->recipients) rec.push_back(r.str());
    f.push_back(std::to_string(record->hop_count));
    f.push_back(med.empty() ? "-" : join(med, ","));
    f.push_back(rec.empty() ? "-" : join(rec, ","));
  } else {
    f.insert(f.end(), {"-", "-", "-"});
  }
  f.push_back(encode_payload(msg.payload));
  return line;
}

TracedMessage parse_msg_line(const TraceLine& line) {
  if (line.tag != "MSG" || line.fields.size() != 11) throw SchemaError("trace: malformed MSG line");
  const auto& f = line.fields;
  TracedMessage t;
  t.msg.msg_id = static_cast<MsgId>(to_ll(f[0], "msg id"));
  t.msg.tick = to_ll(f[1], "tick");
  if (!parse_kind(f[2], t.msg.kind)) throw SchemaError("trace: unknown kind " + f[2]);
  auto src = Endpoint::parse(f[3]);
  auto dst = Endpoint::parse(f[4]);
  if (!src || !dst) throw SchemaError("trace: bad endpoint in message " + f[0]);
  t.msg.source = *src;
  t.msg.destination = *dst;
  if (!parse_interface(f[5], t.msg.iface)) throw SchemaError("trace: unknown interface " + f[5]);
  t.msg.correlation_id = static_cast<CorrelationId>(to_ll(f[6], "correlation id"));
  if (f[7] != "-") t.hops = static_cast<int>(to_ll(f[7], "hop count"));
  if (f[8] != "-") t.mediators = split(f[8], ',');
  if (f[9] != "-") t.recipients = split(f[9], ',');
  t.msg.payload = decode_payload(f[10]);
  return t;
}

long long MetricsReport::number(const std::string& key) const {
  auto it = values.find(key);
  if (it == values.end()) return 0;
  try {
    return std::stoll(it->second);
  } catch (const std::exception&) {
    return 0;
  }
}

std::string MetricsReport::str() const {
  std::string out;
  for (const auto& [k, v] : values) {
    Record r;
    r.kind = "metric";
    r.set("key", k).set("value", v);
    out += format_record(r) + "\n";
  }
  return out;
}

MetricsReport MetricsReport::parse(std::string_view text) {
  MetricsReport m;
  for (const auto& rec : parse_records(text, "metrics")) {
    if (rec.kind != "metric") throw SchemaError(rec.where() + ": expected a metric record");
    m.values[rec.get("key")] = rec.get("value");
  }
  return m;
}

MetricsReport fold_metrics(std::string_view trace_text) {
  std::map<std::string, long long> n;
  MetricsReport out;
  for (const auto& line : parse_trace(trace_text)) {
    if (line.tag == "MSG") {
      auto t = parse_msg_line(line);
      bump(n, "msg.total");
      bump(n, "msg." + std::string(to_string(t.msg.kind)) + "." + std::string(to_string(t.msg.iface)));
      if (t.hops >= 0) {
        bump(n, "msg.fabric");
        bump(n, "hops.total", t.hops);
        if (t.msg.destination.kind == EndpointKind::BB && t.msg.source.kind == EndpointKind::BB)
          bump(n, "msg.unicast-interbb");
      }
    } else if (line.tag == "EVT" && line.fields.size() >= 4) {
      const auto& name = line.fields[1];
      bump(n, "event." + name);
      if (name == "end") {
        auto d = decode_payload(line.fields[3]);
        std::string proc = "proc." + d["proc"];
        long long ticks = to_ll(d["ticks"], "procedure ticks");
        bump(n, proc + ".count");
        bump(n, proc + ".sum", ticks);
        n[proc + ".max"] = std::max(n[proc + ".max"], ticks);
      }
    } else if (line.tag == "FLW" && line.fields.size() >= 2) {
      std::string base = "flow." + line.fields[0] + "." + line.fields[1] + ".";
      for (const auto& [k, v] : kv_fields(line.fields, 2)) n[base + k] = to_ll(v, "flow " + k);
    } else if (line.tag == "DIG" && line.fields.size() == 2) {
      out.values["digest." + line.fields[0]] = line.fields[1];
    }
  }
  for (const auto& [k, v] : n) out.values[k] = std::to_string(v);
  return out;
}

TraceAudit check_trace(std::string_view trace_text) {
  TraceAudit audit;
  auto bad = [&](std::string v) { audit.violations.push_back(std::move(v)); };
  std::vector<TraceLine> lines;
  try {
    lines = parse_trace(trace_text);
  } catch (const Error& e) {
    bad(e.what());
    return audit;
  }

  std::map<std::string, std::string> supi_of;  // device -> supi
  std::set<std::string> authenticated;
  Tick last_tick = 0;
  MsgId last_id = 0;
  bool saw_run = false, saw_digest = false;

  for (const auto& line : lines) {
    if (line.tag == "RUN") {
      saw_run = true;
    } else if (line.tag == "DEV" && line.fields.size() == 2) {
      supi_of[line.fields[0]] = line.fields[1];
    } else if (line.tag == "MSG") {
      TracedMessage t;
      try {
        t = parse_msg_line(line);
      } catch (const Error& e) {
        bad(e.what());
        continue;
      }
      const auto& m = t.msg;
      std::string id = "message " + std::to_string(m.msg_id);
      if (m.tick < last_tick || m.msg_id <= last_id) bad(id + " breaks the (tick, msg_id) order");
      last_tick = std::max(last_tick, m.tick);
      last_id = std::max(last_id, m.msg_id);
      if (auto v = validate_message(m); !v) bad(id + ": " + v.rule + " " + v.detail);
      if (t.hops >= 0 && t.hops != 1 + static_cast<int>(t.mediators.size()))
        bad(id + ": hop count " + std::to_string(t.hops) + " with " + std::to_string(t.mediators.size()) +
            " mediators");
      if (is_wbi(m.iface)) {
        auto dev = m.payload.find("dev");
        auto supi = m.payload.find("supi");
        if (dev != m.payload.end() && supi != m.payload.end() && authenticated.count(dev->second))
          bad(id + ": permanent identity of " + dev->second + " on " + std::string(to_string(m.iface)) +
              " after authentication");
        for (const auto& [k, v] : m.payload)
          for (const auto& [d, s] : supi_of)
            if (k != "supi" && v == s && authenticated.count(d))
              bad(id + ": permanent identity of " + d + " in field " + k);
      }
    } else if (line.tag == "EVT" && line.fields.size() >= 4) {
      Tick tick = std::stoll(line.fields[0]);
      if (tick < last_tick) bad("event " + line.fields[1] + " at tick " + line.fields[0] + " out of order");
      last_tick = std::max(last_tick, tick);
      auto d = decode_payload(line.fields[3]);
      const auto& name = line.fields[1];
      if ((name == "auth" && d["ok"] == "1") || name == "context-import") authenticated.insert(line.fields[2]);
      if (name == "transition") {
        ConvergentState from, to;
        if (!parse_state(d["from"], from) || !parse_state(d["to"], to))
          bad("transition of " + line.fields[2] + " names an unknown state");
        else if (!is_legal_transition(from, to))
          bad("illegal transition " + d["from"] + " -> " + d["to"] + " for " + line.fields[2]);
      }
    } else if (line.tag == "FLW" && line.fields.size() >= 2) {
      auto kv = kv_fields(line.fields, 2);
      auto num = [&](const char* k) { return kv.count(k) ? std::stoll(kv[k]) : 0LL; };
      std::string f = line.fields[0] + "/" + line.fields[1];
      if (num("sent") != num("delivered") + num("lost") + num("inflight"))
        bad("flow " + f + " does not conserve units");
      if (num("latmismatch") != 0) bad("flow " + f + " delivered units off their path latency");
    } else if (line.tag == "DIG") {
      saw_digest = true;
    }
  }
  if (!saw_run) bad("trace has no RUN line");
  if (!saw_digest) bad("trace has no DIG line");
  return audit;
}

}  // namespace ngcp
