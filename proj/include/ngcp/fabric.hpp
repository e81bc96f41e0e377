#pragma once

// Inter-BB interconnection models behind one delivery contract. The same
// SignalMessage can be sent over a full mesh, through a relay BB, through a
// C-plane dispatcher (CPD) acting as a projecting proxy, or over a
// publish-subscribe broker; only the delivery record differs.

#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "ngcp/messages.hpp"

namespace ngcp {

enum class FabricModelKind { FullMesh, Relay, Dispatcher, PubSub };
std::string_view to_string(FabricModelKind k);
bool parse_fabric_kind(std::string_view s, FabricModelKind& out);

struct FabricModel {
  FabricModelKind kind = FabricModelKind::FullMesh;
  std::optional<BbInstanceId> relay_bb;  // Relay only

  static FabricModel full_mesh() { return {FabricModelKind::FullMesh, std::nullopt}; }
  static FabricModel relay(BbInstanceId bb) { return {FabricModelKind::Relay, bb}; }
  static FabricModel dispatcher() { return {FabricModelKind::Dispatcher, std::nullopt}; }
  static FabricModel pub_sub() { return {FabricModelKind::PubSub, std::nullopt}; }
};

struct DeliveryRecord {
  MsgId msg_id = 0;
  int hop_count = 1;
  std::vector<BbInstanceId> mediators;
  std::vector<Endpoint> recipients;  // sorted
  bool no_subscriber = false;        // PubSub topic had nobody listening
};

/// Payload keys the dispatcher forwards to a destination role for a kind.
using ProjectionTable = std::map<std::pair<ProcedureKind, Role>, std::set<std::string>>;
const ProjectionTable& default_projections();

class Fabric {
 public:
  struct Delivery {
    Endpoint recipient;
    SignalMessage message;  // projected for Dispatcher destinations
  };
  struct SendResult {
    DeliveryRecord record;
    std::vector<Delivery> deliveries;
  };

  /// Throws BadRelayError if the relay BB is not a member, SchemaError if
  /// `members` is empty. `mediator_ordinal` numbers the CPD / broker.
  static Fabric connect(std::set<BbInstanceId> members, FabricModel model, int mediator_ordinal = 0);

  const FabricModel& model() const { return model_; }
  const std::set<BbInstanceId>& members() const { return members_; }
  const std::map<std::string, std::set<BbInstanceId>>& subscriptions() const { return subscriptions_; }
  const std::vector<DeliveryRecord>& log() const { return log_; }
  std::optional<BbInstanceId> mediator() const;

  /// Implied point-to-point links of the model's topology.
  int link_count() const;

  /// Idempotent. Throws ModelMismatchError unless the model is PubSub and
  /// UnknownDestinationError if `bb` is not a member.
  void subscribe(BbInstanceId bb, const ContextTopicId& topic);

  /// Members may additionally exchange I2/I3 traffic with UEs at the edge.
  /// Throws UnknownDestinationError for endpoints outside the fabric.
  SendResult send(const SignalMessage& msg);

  void set_projections(ProjectionTable table) { projections_ = std::move(table); }
  const ProjectionTable& projections() const { return projections_; }

 private:
  Fabric(std::set<BbInstanceId> members, FabricModel model, int mediator_ordinal);

  bool reachable(const Endpoint& e) const;
  SignalMessage project(const SignalMessage& msg, const Endpoint& recipient) const;

  FabricModel model_;
  std::set<BbInstanceId> members_;
  int mediator_ordinal_ = 0;
  std::map<std::string, std::set<BbInstanceId>> subscriptions_;
  std::vector<DeliveryRecord> log_;
  ProjectionTable projections_;
};

}  // namespace ngcp
