#pragma once

// Independent reference computations the tests compare the library against.
// Nothing here calls the code under test except for parsing inputs.

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "ngcp/catalog.hpp"
#include "ngcp/graph.hpp"

namespace oracle {

/// Catalog document with `n` SFs over at most `domains` functional domains
/// and a handful of random procedures.
std::string random_catalog(std::mt19937_64& rng, int n, int domains);

/// Minimum number of distinct communicating BB pairs over every partition
/// that is domain-pure and keeps conflicting SFs apart. Conflicts are
/// recomputed from the attributes. -1 when no partition is feasible.
int exhaustive_min_interfaces(const ngcp::SfCatalog& catalog);

/// Same score for a given grouping, counted step by step.
int count_interfaces(const ngcp::SfCatalog& catalog, const std::vector<ngcp::BbDefinition>& bbs);

/// Connected random graph over nodes n0..n{n-1}.
ngcp::Graph random_graph(std::mt19937_64& rng, int n, int extra_links, int max_capacity);

/// Every simple path from `src` to `dst`.
std::vector<std::vector<std::string>> simple_paths(const ngcp::Graph& g, const std::string& src,
                                                   const std::string& dst);

long long latency_of(const ngcp::Graph& g, const std::vector<std::string>& path);

}  // namespace oracle
