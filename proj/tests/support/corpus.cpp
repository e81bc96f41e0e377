#include "corpus.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace corpus {

std::string data_path(const std::string& rel) { return std::string(NGCP_DATA_DIR) + "/" + rel; }

std::string read(const std::string& rel) {
  std::ifstream in(data_path(rel), std::ios::binary);
  if (!in) throw std::runtime_error("missing test data " + rel);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

ngcp::InputBundle scenario(const std::string& name) {
  return ngcp::load_inputs(data_path("scenarios/" + name + ".scn"));
}

const std::vector<std::string>& names() {
  static const std::vector<std::string> all = {
      "attach-global", "attach-redirect", "handover-mbb", "handover-bbm",      "paging",
      "context-reselect", "fixed-access", "isolation",  "isolation-injected", "two-slices",
  };
  return all;
}

ngcp::InputBundle with_scenario(ngcp::InputBundle in, const std::string& text) {
  in.docs[in.scenario_key] = text;
  return in;
}

std::vector<ngcp::TracedMessage> messages(const std::string& trace) {
  std::vector<ngcp::TracedMessage> out;
  for (const auto& l : ngcp::parse_trace(trace))
    if (l.tag == "MSG") out.push_back(ngcp::parse_msg_line(l));
  return out;
}

std::vector<Event> events(const std::string& trace) {
  std::vector<Event> out;
  for (const auto& l : ngcp::parse_trace(trace))
    if (l.tag == "EVT" && l.fields.size() == 4)
      out.push_back({std::stoll(l.fields[0]), l.fields[1], l.fields[2], ngcp::decode_payload(l.fields[3])});
  return out;
}

int count_events(const std::string& trace, const std::string& name) {
  int n = 0;
  for (const auto& e : events(trace)) n += e.name == name;
  return n;
}

int count_messages(const std::string& trace, ngcp::ProcedureKind kind) {
  int n = 0;
  for (const auto& m : messages(trace)) n += m.msg.kind == kind;
  return n;
}

}  // namespace corpus
