#include "ngcp/blocks/cghf.hpp"

#include <algorithm>
#include <sstream>

#include "ngcp/textrec.hpp"

namespace ngcp {

namespace {

std::string key_str(const CghfState::Key& k) {
  return std::get<0>(k) + "/" + std::get<1>(k) + "/" + std::get<2>(k);
}

}  // namespace

bool is_internal_source(std::string_view source) {
  static const std::set<std::string_view> internal = {"UE", "AN", "AF", "CM", "MM", "SAM", "FM", "CGHF"};
  return internal.count(source) > 0;
}

void cghf_ingest(CghfState& s, Sample sample) {
  sample.external = !is_internal_source(sample.source);
  sample.seq = ++s.sample_seq;
  CghfState::Key key{sample.source, sample.metric, sample.subject};
  auto& base = s.baselines[key];
  if (base.n < s.window) {
    base.sum += sample.value;
    ++base.n;
  }
  auto& buf = s.input_buffer[key];
  buf.push_back(std::move(sample));
  while (static_cast<int>(buf.size()) > s.window) buf.pop_front();
}

std::vector<ContextAssertion> cghf_generate(CghfState& s, Tick tick) {
  std::vector<ContextAssertion> out;
  auto models = s.context_models;
  std::sort(models.begin(), models.end(), [](const ContextModel& a, const ContextModel& b) {
    return std::tie(a.topic, a.name) < std::tie(b.topic, b.name);
  });
  for (const auto& m : models) {
    for (const auto& [key, buf] : s.input_buffer) {
      if (std::get<1>(key) != m.metric || buf.empty()) continue;
      const auto& base = s.baselines.at(key);
      std::string latch = m.name + "|" + key_str(key);
      bool holds = false;
      if (base.n >= s.window && base.sum > 0) {
        long long sum = 0;
        for (const auto& smp : buf) sum += smp.value;
        long long n = static_cast<long long>(buf.size());
        // mean(buf) > factor * baseline, cross-multiplied.
        holds = sum * base.n * m.factor_den > m.factor_num * base.sum * n;
      }
      if (!holds) {
        s.latched.erase(latch);
        continue;
      }
      if (!s.latched.insert(latch).second) continue;
      ContextAssertion a;
      a.topic = m.topic;
      a.subject = std::get<2>(key);
      a.statement = m.statement;
      a.model = m.name;
      a.tick = tick;
      for (const auto& smp : buf) a.evidence.push_back(smp.seq);
      out.push_back(a);
      s.published.push_back(std::move(a));
    }
  }
  return out;
}

Effects cghf_notify(const CghfState& s, const std::vector<ContextAssertion>& assertions, CorrelationId corr,
                    bool publish_to_topic) {
  Effects fx;
  Endpoint self = Endpoint::of(s.self);
  for (const auto& a : assertions) {
    std::string evidence = a.evidence.empty() ? "-"
                                              : "seq" + std::to_string(a.evidence.front()) + ".." +
                                                    std::to_string(a.evidence.back());
    Payload p{{"topic", a.topic.str()},
              {"subject", a.subject},
              {"statement", a.statement},
              {"evidence", evidence},
              {"at", std::to_string(a.tick)}};
    fx.event("context", a.subject, {{"statement", a.statement}, {"topic", a.topic.str()}});
    if (publish_to_topic) {
      fx.send(ProcedureKind::ContextNotify, self, Endpoint::topic(a.topic.str()), corr, p);
      continue;
    }
    auto subs = s.subscriptions.find(a.topic.str());
    if (subs == s.subscriptions.end()) continue;
    for (const auto& bb : subs->second) fx.send(ProcedureKind::ContextNotify, self, Endpoint::of(bb), corr, p);
  }
  return fx;
}

Effects cghf_handle(CghfState& s, const SignalMessage& msg, Tick tick, bool publish_to_topic) {
  Effects fx;
  if (msg.kind != ProcedureKind::ContextPublish) {
    fx.event("Dropped", "-", {{"kind", std::string(to_string(msg.kind))}, {"at", "CGHF"}});
    return fx;
  }
  std::string source = msg.field_or("source", "unknown");
  std::string metric = msg.field_or("metric");
  std::string samples = msg.field_or("samples");
  if (!samples.empty() && samples != "-") {
    for (const auto& item : split(samples, ',')) {
      auto colon = item.rfind(':');
      if (colon == std::string::npos) continue;
      Sample smp;
      smp.source = source;
      smp.metric = metric;
      smp.subject = item.substr(0, colon);
      smp.value = std::stoll(item.substr(colon + 1));
      smp.tick = tick;
      cghf_ingest(s, std::move(smp));
    }
  }
  fx.append(cghf_notify(s, cghf_generate(s, tick), msg.correlation_id, publish_to_topic));
  return fx;
}

std::string CghfState::canonical() const {
  std::ostringstream os;
  os << "CGHF " << self.str() << " seq=" << sample_seq << "\n";
  for (const auto& [key, buf] : input_buffer) {
    os << "buf " << key_str(key);
    for (const auto& smp : buf) os << " " << smp.seq << ":" << smp.value << ":" << smp.tick << ":" << smp.external;
    os << "\n";
  }
  for (const auto& [key, b] : baselines) os << "base " << key_str(key) << " " << b.sum << "/" << b.n << "\n";
  for (const auto& l : latched) os << "latch " << l << "\n";
  for (const auto& a : published)
    os << "pub " << a.topic.str() << " " << a.subject << " " << a.statement << " " << a.tick << "\n";
  return os.str();
}

}  // namespace ngcp
