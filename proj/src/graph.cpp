#include "ngcp/graph.hpp"

#include <algorithm>

namespace ngcp {

std::vector<std::string> Graph::neighbors(const std::string& n) const {
  std::vector<std::string> out;
  for (const auto& [key, spec] : links) {
    if (key.a == n) out.push_back(key.b);
    else if (key.b == n) out.push_back(key.a);
  }
  std::sort(out.begin(), out.end());
  return out;
}

const LinkSpec* Graph::link(const std::string& x, const std::string& y) const {
  auto it = links.find(LinkKey(x, y));
  return it == links.end() ? nullptr : &it->second;
}

void Graph::add_link(const std::string& x, const std::string& y, LinkSpec spec) {
  nodes.insert(x);
  nodes.insert(y);
  links[LinkKey(x, y)] = spec;
}

long long path_latency(const Graph& g, const std::vector<std::string>& path) {
  long long total = 0;
  for (std::size_t i = 0; i + 1 < path.size(); ++i) {
    const auto* l = g.link(path[i], path[i + 1]);
    if (!l) return -1;
    total += l->latency;
  }
  return total;
}

}  // namespace ngcp
