#include "ngcp/blocks/sam.hpp"

#include <sstream>

#include "ngcp/hash.hpp"
#include "ngcp/textrec.hpp"

namespace ngcp {

namespace {

constexpr EnumTable<AuthScheme, 2> kSchemes{{
    {AuthScheme::Full, "Full"},
    {AuthScheme::LowSecure, "LowSecure"},
}};

constexpr EnumTable<AuditKind, 4> kAudit{{
    {AuditKind::Auth, "Auth"},
    {AuditKind::ContextImport, "ContextImport"},
    {AuditKind::SingleSignOn, "SingleSignOn"},
    {AuditKind::Release, "Release"},
}};

unsigned keystream(std::string_view key, std::size_t i) {
  std::uint64_t block = fnv1a(std::string(key) + "#" + std::to_string(i / 8));
  return static_cast<unsigned>((block >> (8 * (i % 8))) & 0xff);
}

Pseudonym fresh_pseudonym(std::mt19937_64& rng) { return Pseudonym("pn-" + hex64(rng())); }

void issue_pseudonym(SamState& s, SecurityContext& ctx, std::mt19937_64& rng) {
  auto old = s.pseudonym_of.find(ctx.supi);
  if (old != s.pseudonym_of.end()) s.pseudonym_map.erase(old->second);
  Pseudonym p = fresh_pseudonym(rng);
  while (s.pseudonym_map.count(p)) p = fresh_pseudonym(rng);
  s.pseudonym_map[p] = ctx.supi;
  s.pseudonym_of[ctx.supi] = p;
  ctx.pseudonym = p;
}

std::optional<PermanentSubscriberId> resolve_identity(const SamState& s, const SignalMessage& msg) {
  if (auto v = msg.field("supi")) return PermanentSubscriberId(*v);
  if (auto v = msg.field("suci")) return reveal(*v, s.operator_key);
  if (auto v = msg.field("pseud")) {
    auto it = s.pseudonym_map.find(Pseudonym(*v));
    if (it != s.pseudonym_map.end()) return it->second;
  }
  return std::nullopt;
}

Payload verdict_payload(const SamState& s, const DeviceId& dev, const AuthOutcome& out) {
  Payload p{{"dev", dev.str()}, {"verdict", out.ok ? "ok" : "fail"}};
  if (!out.ok) {
    p["reason"] = out.reason;
    return p;
  }
  const auto& ctx = *out.context;
  p["pseud"] = ctx.pseudonym.str();
  p["ticket"] = issue_ticket(ctx.supi, ctx.ordinal, s.operator_key);
  p["suci"] = conceal(ctx.supi, s.operator_key);
  p["ctx"] = std::to_string(ctx.ordinal);
  p["low"] = ctx.low_secure ? "1" : "0";
  return p;
}

}  // namespace

std::string_view to_string(AuthScheme s) { return enum_name(kSchemes, s); }
bool parse_scheme(std::string_view s, AuthScheme& out) { return enum_parse(kSchemes, s, out); }
std::string_view to_string(AuditKind k) { return enum_name(kAudit, k); }

std::string derive(std::string_view credential, std::string_view nonce) {
  return fnv_hex(std::string(credential) + "|" + std::string(nonce));
}

std::string conceal(const PermanentSubscriberId& supi, std::string_view key) {
  static const char* digits = "0123456789abcdef";
  std::string out = "suci-";
  const std::string& v = supi.str();
  for (std::size_t i = 0; i < v.size(); ++i) {
    unsigned b = (static_cast<unsigned char>(v[i]) ^ keystream(key, i)) & 0xff;
    out += digits[b >> 4];
    out += digits[b & 0xf];
  }
  return out;
}

std::optional<PermanentSubscriberId> reveal(std::string_view suci, std::string_view key) {
  constexpr std::string_view prefix = "suci-";
  if (suci.substr(0, prefix.size()) != prefix) return std::nullopt;
  std::string_view hex = suci.substr(prefix.size());
  if (hex.size() % 2 != 0) return std::nullopt;
  auto nibble = [](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    return -1;
  };
  std::string out;
  for (std::size_t i = 0; i < hex.size() / 2; ++i) {
    int hi = nibble(hex[2 * i]), lo = nibble(hex[2 * i + 1]);
    if (hi < 0 || lo < 0) return std::nullopt;
    out += static_cast<char>(((hi << 4) | lo) ^ keystream(key, i));
  }
  return PermanentSubscriberId(out);
}

std::string issue_ticket(const PermanentSubscriberId& supi, int ordinal, std::string_view key) {
  std::string n = std::to_string(ordinal);
  return n + "." + fnv_hex(std::string(key) + "|" + supi.str() + "|" + n);
}

bool check_ticket(const PermanentSubscriberId& supi, std::string_view ticket, std::string_view key) {
  auto dot = ticket.find('.');
  if (dot == std::string_view::npos) return false;
  std::string n(ticket.substr(0, dot));
  return ticket.substr(dot + 1) == fnv_hex(std::string(key) + "|" + supi.str() + "|" + n);
}

AuthOutcome sam_authenticate(SamState& s, const DeviceId& dev, const PermanentSubscriberId& supi,
                             const Credentials& presented, AuthScheme scheme, Tick tick, std::mt19937_64& rng) {
  ++s.auth_invocations;
  AuthOutcome out;
  auto it = s.identity_db.find(supi);
  if (it == s.identity_db.end()) {
    out.reason = "unknown subscriber";
  } else {
    std::string expected = derive(it->second.credential, presented.nonce.empty() ? "-" : presented.nonce);
    if (presented.token != expected) out.reason = "credential mismatch";
    else out.ok = true;
  }
  if (out.ok) {
    SecurityContext ctx;
    ctx.supi = supi;
    ctx.ordinal = ++s.ordinals[dev];
    ctx.low_secure = scheme == AuthScheme::LowSecure;
    ctx.key = derive(presented.token, std::to_string(ctx.ordinal));
    issue_pseudonym(s, ctx, rng);
    s.security_contexts[dev] = ctx;
    out.context = ctx;
  } else {
    s.security_contexts.erase(dev);
  }
  s.audit_log.push_back({tick, AuditKind::Auth, dev.str(), out.ok, std::string(to_string(scheme))});
  return out;
}

Verdict sam_single_sign_on(SamState& s, const DeviceId& dev, const std::string& service, Tick tick) {
  if (!s.security_contexts.count(dev)) throw NoContextError(dev.str() + " holds no security context");
  s.audit_log.push_back({tick, AuditKind::SingleSignOn, dev.str(), true, service});
  return Verdict::accept();
}

Effects sam_handle(SamState& s, const SignalMessage& msg, Tick tick, std::mt19937_64& rng) {
  using K = ProcedureKind;
  Effects fx;
  DeviceId dev(msg.field_or("dev"));
  Endpoint self = Endpoint::of(s.self);

  switch (msg.kind) {
    case K::AttachRequest: {
      AuthScheme scheme = AuthScheme::Full;
      parse_scheme(msg.field_or("scheme", "Full"), scheme);
      Mediation via = Mediation::ViaAF;
      parse_mediation(msg.field_or("via", "ViaAF"), via);
      auto supi = resolve_identity(s, msg);
      if (!supi) {
        auto out = sam_authenticate(s, dev, PermanentSubscriberId(), {}, scheme, tick, rng);
        out.reason = "unresolvable identity";
        fx.event("auth", dev.str(), {{"ok", "0"}, {"reason", out.reason}});
        fx.send(K::AuthResponse, self, s.peers.at(Role::CM), msg.correlation_id, verdict_payload(s, dev, out));
        return fx;
      }
      if (auto t = msg.field("ticket"); t && check_ticket(*supi, *t, s.operator_key) &&
                                        s.identity_db.count(*supi)) {
        SecurityContext ctx;
        ctx.supi = *supi;
        ctx.ordinal = ++s.ordinals[dev];
        ctx.low_secure = scheme == AuthScheme::LowSecure;
        ctx.key = derive(*t, std::to_string(ctx.ordinal));
        issue_pseudonym(s, ctx, rng);
        s.security_contexts[dev] = ctx;
        s.audit_log.push_back({tick, AuditKind::ContextImport, dev.str(), true, "ticket"});
        fx.event("context-import", dev.str());
        AuthOutcome out{true, "", ctx};
        fx.send(K::AuthResponse, self, s.peers.at(Role::CM), msg.correlation_id, verdict_payload(s, dev, out));
        return fx;
      }
      if (scheme == AuthScheme::LowSecure) {
        auto out = sam_authenticate(s, dev, *supi, {msg.field_or("token"), ""}, scheme, tick, rng);
        fx.event("auth", dev.str(), {{"ok", out.ok ? "1" : "0"}});
        fx.send(K::AuthResponse, self, s.peers.at(Role::CM), msg.correlation_id, verdict_payload(s, dev, out));
        return fx;
      }
      std::string nonce = hex64(rng());
      s.pending[dev] = {*supi, nonce, via};
      fx.send(K::AuthChallenge, self, ue_hop(s.peers, dev, via), msg.correlation_id,
              {{"dev", dev.str()}, {"nonce", nonce}});
      return fx;
    }
    case K::AuthResponse: {
      auto it = s.pending.find(dev);
      if (it == s.pending.end()) {
        fx.event("Dropped", dev.str(), {{"kind", "AuthResponse"}, {"at", "SAM"}});
        return fx;
      }
      auto pending = it->second;
      s.pending.erase(it);
      auto out = sam_authenticate(s, dev, pending.supi, {msg.field_or("res"), pending.nonce}, AuthScheme::Full,
                                  tick, rng);
      fx.event("auth", dev.str(), {{"ok", out.ok ? "1" : "0"}});
      fx.send(K::AuthResponse, self, s.peers.at(Role::CM), msg.correlation_id, verdict_payload(s, dev, out));
      return fx;
    }
    case K::SessionRelease:
      if (s.security_contexts.erase(dev))
        s.audit_log.push_back({tick, AuditKind::Release, dev.str(), true, msg.field_or("op")});
      return fx;
    default:
      fx.event("Dropped", dev.str(), {{"kind", std::string(to_string(msg.kind))}, {"at", "SAM"}});
      return fx;
  }
}

std::string SamState::canonical() const {
  std::ostringstream os;
  os << "SAM " << self.str() << " auths=" << auth_invocations << "\n";
  for (const auto& [dev, c] : security_contexts)
    os << "ctx " << dev.str() << " " << c.ordinal << " " << c.low_secure << " " << c.key << " "
       << c.pseudonym.str() << "\n";
  for (const auto& [dev, n] : ordinals) os << "ord " << dev.str() << " " << n << "\n";
  for (const auto& [p, supi] : pseudonym_map) os << "pn " << p.str() << " " << supi.str() << "\n";
  for (const auto& a : audit_log)
    os << "audit " << a.tick << " " << to_string(a.kind) << " " << a.subject << " " << a.ok << " " << a.detail
       << "\n";
  for (const auto& [dev, p] : pending) os << "pending " << dev.str() << " " << p.nonce << "\n";
  return os.str();
}

}  // namespace ngcp
