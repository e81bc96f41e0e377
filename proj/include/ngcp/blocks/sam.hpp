#pragma once

// Security and AAA Management: credential checks, security contexts,
// pseudonyms and an append-only audit log.
//
// Key derivation is an opaque token function (derive) rather than real
// cryptography. A concealed identity ("suci") is the permanent id masked
// with an operator-key keystream, reversible by any SAM of the operator.
// Tickets let a SAM in another slice import an existing context without a
// second challenge round trip.

#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "ngcp/blocks/common.hpp"

namespace ngcp {

enum class AuthScheme { Full, LowSecure };
std::string_view to_string(AuthScheme s);
bool parse_scheme(std::string_view s, AuthScheme& out);

struct SubscriberRecord {
  std::string credential;
};

struct SecurityContext {
  PermanentSubscriberId supi;
  std::string key;
  int ordinal = 0;
  bool low_secure = false;
  Pseudonym pseudonym;
};

enum class AuditKind { Auth, ContextImport, SingleSignOn, Release };
std::string_view to_string(AuditKind k);

struct AuditEntry {
  Tick tick = 0;
  AuditKind kind = AuditKind::Auth;
  std::string subject;  // device id
  bool ok = false;
  std::string detail;
};

struct Credentials {
  std::string token;
  std::string nonce;  // empty: plain credential match (LowSecure)
};

struct AuthOutcome {
  bool ok = false;
  std::string reason;
  std::optional<SecurityContext> context;
};

struct SamState {
  struct Pending {
    PermanentSubscriberId supi;
    std::string nonce;
    Mediation via = Mediation::ViaAF;
  };

  BbInstanceId self;
  Peers peers;
  std::string operator_key;
  std::map<PermanentSubscriberId, SubscriberRecord> identity_db;  // provisioning
  std::map<DeviceId, SecurityContext> security_contexts;
  std::map<DeviceId, int> ordinals;
  std::map<Pseudonym, PermanentSubscriberId> pseudonym_map;
  std::map<PermanentSubscriberId, Pseudonym> pseudonym_of;
  std::vector<AuditEntry> audit_log;
  std::map<DeviceId, Pending> pending;
  int auth_invocations = 0;

  std::string canonical() const;
};

std::string derive(std::string_view credential, std::string_view nonce);
std::string conceal(const PermanentSubscriberId& supi, std::string_view key);
std::optional<PermanentSubscriberId> reveal(std::string_view suci, std::string_view key);
std::string issue_ticket(const PermanentSubscriberId& supi, int ordinal, std::string_view key);
bool check_ticket(const PermanentSubscriberId& supi, std::string_view ticket, std::string_view key);

/// Never throws: an unknown subscriber or mismatching credential is a
/// failure outcome. Exactly one Auth audit entry per call. On success the
/// context ordinal increments and a fresh pseudonym replaces the old one.
AuthOutcome sam_authenticate(SamState& s, const DeviceId& dev, const PermanentSubscriberId& supi,
                             const Credentials& presented, AuthScheme scheme, Tick tick, std::mt19937_64& rng);

/// Grants access to `service` off the existing context. Throws NoContextError.
Verdict sam_single_sign_on(SamState& s, const DeviceId& dev, const std::string& service, Tick tick);

/// Payload read:
///   AttachRequest  dev, supi|suci|pseud, ticket, token, scheme, via
///   AuthResponse   dev, res
///   SessionRelease dev, op
/// Replies to CM with AuthResponse: dev, verdict, reason, pseud, ticket, suci, ctx, low.
Effects sam_handle(SamState& s, const SignalMessage& msg, Tick tick, std::mt19937_64& rng);

}  // namespace ngcp
