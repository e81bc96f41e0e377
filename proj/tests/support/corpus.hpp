#pragma once

// Access to the shipped scenario corpus and small trace queries.

#include <string>
#include <vector>

#include "ngcp/engine.hpp"

namespace corpus {

std::string data_path(const std::string& rel);
std::string read(const std::string& rel);

/// Inputs of data/scenarios/<name>.scn.
ngcp::InputBundle scenario(const std::string& name);

/// Scenarios every corpus-wide property runs over.
const std::vector<std::string>& names();

/// Replaces the scenario document's text.
ngcp::InputBundle with_scenario(ngcp::InputBundle in, const std::string& text);

struct Event {
  ngcp::Tick tick = 0;
  std::string name;
  std::string subject;
  ngcp::Payload detail;
};

std::vector<ngcp::TracedMessage> messages(const std::string& trace);
std::vector<Event> events(const std::string& trace);
int count_events(const std::string& trace, const std::string& name);
int count_messages(const std::string& trace, ngcp::ProcedureKind kind);

}  // namespace corpus
