#pragma once

// Undirected D-plane graph with integer capacities and latencies.

#include <compare>
#include <functional>
#include <map>
#include <queue>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace ngcp {

/// Unordered node pair, normalized so that a < b.
struct LinkKey {
  std::string a;
  std::string b;

  LinkKey() = default;
  LinkKey(std::string x, std::string y) {
    if (y < x) std::swap(x, y);
    a = std::move(x);
    b = std::move(y);
  }
  std::string str() const { return a + "~" + b; }
  auto operator<=>(const LinkKey&) const = default;
};

struct LinkSpec {
  int capacity = 0;  // units in flight at once
  int latency = 1;   // ticks
};

struct Graph {
  std::set<std::string> nodes;
  std::map<LinkKey, LinkSpec> links;

  /// Neighbours in ascending id order.
  std::vector<std::string> neighbors(const std::string& n) const;
  const LinkSpec* link(const std::string& x, const std::string& y) const;
  void add_link(const std::string& x, const std::string& y, LinkSpec spec);
};

/// Minimum total latency from `src` to every reachable node (Dijkstra) over
/// links accepted by `usable`.
template <class Usable>
std::map<std::string, long long> shortest_latencies(const Graph& g, const std::string& src, Usable usable);

/// Sum of link latencies along `path`; -1 if a hop has no link.
long long path_latency(const Graph& g, const std::vector<std::string>& path);

template <class Usable>
std::map<std::string, long long> shortest_latencies(const Graph& g, const std::string& src, Usable usable) {
  std::map<std::string, long long> dist;
  if (!g.nodes.count(src)) return dist;
  using Item = std::pair<long long, std::string>;
  std::priority_queue<Item, std::vector<Item>, std::greater<Item>> pq;
  dist[src] = 0;
  pq.push({0, src});
  while (!pq.empty()) {
    auto [d, u] = pq.top();
    pq.pop();
    if (d != dist[u]) continue;
    for (const auto& v : g.neighbors(u)) {
      LinkKey key(u, v);
      const auto& spec = g.links.at(key);
      if (!usable(key, spec)) continue;
      long long nd = d + spec.latency;
      auto it = dist.find(v);
      if (it == dist.end() || nd < it->second) {
        dist[v] = nd;
        pq.push({nd, v});
      }
    }
  }
  return dist;
}

}  // namespace ngcp
