#pragma once

// Context Generation and Handling Function: buffers samples from any
// source, evaluates context models over the buffer and publishes the
// resulting assertions. Reactions happen in the subscribing blocks.

#include <deque>
#include <map>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "ngcp/blocks/common.hpp"

namespace ngcp {

struct Sample {
  std::string source;
  std::string metric;
  std::string subject;  // e.g. a flow id
  long long value = 0;
  Tick tick = 0;
  bool external = false;  // not from a UE, AN or CN block
  long long seq = 0;
};

inline constexpr int kDefaultContextWindow = 16;

/// Fires when the mean of the windowed samples of one (source, metric,
/// subject) key exceeds factor x its baseline, the mean of that key's first
/// `window` samples. Latched per key until the condition clears.
struct ContextModel {
  std::string name;
  std::string statement = "LatencyAboveNormal";
  ContextTopicId topic;
  std::string metric = "flow-latency";
  long long factor_num = 3;
  long long factor_den = 2;
};

struct ContextAssertion {
  ContextTopicId topic;
  std::string subject;
  std::string statement;
  std::string model;
  std::vector<long long> evidence;  // sample seqs in the window
  Tick tick = 0;
};

struct CghfState {
  using Key = std::tuple<std::string, std::string, std::string>;  // source, metric, subject
  struct Baseline {
    long long sum = 0;
    int n = 0;
  };

  BbInstanceId self;
  Peers peers;
  SliceId slice;
  int window = kDefaultContextWindow;
  std::map<std::string, std::set<BbInstanceId>> subscriptions;  // topic -> subscribers
  std::map<Key, std::deque<Sample>> input_buffer;
  std::map<Key, Baseline> baselines;
  std::vector<ContextModel> context_models;
  std::set<std::string> latched;
  std::vector<ContextAssertion> published;
  long long sample_seq = 0;

  std::string canonical() const;
};

bool is_internal_source(std::string_view source);

void cghf_ingest(CghfState& s, Sample sample);

/// Assertions of every model whose predicate holds, ordered by topic, model
/// name and key. Appended to `published`.
std::vector<ContextAssertion> cghf_generate(CghfState& s, Tick tick);

/// ContextNotify messages for `assertions`: one per topic over PubSub,
/// otherwise one per subscriber in id order.
Effects cghf_notify(const CghfState& s, const std::vector<ContextAssertion>& assertions, CorrelationId corr,
                    bool publish_to_topic);

/// Payload read: ContextPublish source, metric, samples ("subject:value,...").
Effects cghf_handle(CghfState& s, const SignalMessage& msg, Tick tick, bool publish_to_topic);

}  // namespace ngcp
