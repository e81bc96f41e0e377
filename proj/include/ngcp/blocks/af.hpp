#pragma once

// Access Function: terminates access-specific UE signalling (I1), forwards it
// access-agnostically to the CN (I3), keeps per-device path records and
// guards AN configuration by CN entities.

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "ngcp/blocks/common.hpp"

namespace ngcp {

struct AccessNodeInfo {
  AccessTech tech = AccessTech::Cellular;
  std::string area;
  std::string ingress;  // D-plane node the access node attaches to
};

struct AfState {
  BbInstanceId self;
  Peers peers;
  std::map<std::string, AccessNodeInfo> access_nodes;
  std::map<DeviceId, std::vector<std::string>> path_records;
  std::map<Role, std::set<ProcedureKind>> cn_access_permissions;
  std::map<std::string, std::set<std::string>> an_config;  // access node -> configured flows

  std::string canonical() const;
};

/// FM may configure AN flow handling, MM may steer handovers and paging.
std::map<Role, std::set<ProcedureKind>> default_an_permissions();

/// Payload read: every kind forwarded verbatim; `node` on AttachRequest,
/// LocationUpdate, Page and SessionEstablish; `target` on HandoverExecute;
/// `node`, `flow`, `op` on FlowConfigure.
///
/// Throws PermissionDenied when a CN block without the right sends an AN
/// configuration request, UnknownDevice for transitions of unrecorded devices.
Effects af_handle(AfState& s, const SignalMessage& msg);

std::optional<std::string> af_latest_endpoint(const AfState& s, const DeviceId& dev);

}  // namespace ngcp
