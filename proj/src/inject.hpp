#pragma once

#include <cstdint>
#include <vector>

#include "graph.hpp"
#include "rng.hpp"

namespace randgad {

struct InjectionConfig {
    std::size_t clique_size = 15;      // p
    std::size_t clique_count = 5;      // q
    std::size_t attr_count = 75;       // attribute-swap anomalies
    std::size_t candidate_pool = 50;   // k candidates per swap
    std::uint64_t seed = 1;

    void validate(std::size_t nodes) const;
};

struct InjectionResult {
    Graph graph;  // labeled output graph
    std::vector<NodeId> structural;            // all clique members, sorted
    std::vector<std::vector<NodeId>> cliques;  // per-clique member lists
    std::vector<NodeId> attribute;
};

// Adds q node-disjoint cliques of size p; the selected nodes become labeled
// anomalies. `exclude` marks nodes that must not be selected.
InjectionResult inject_structural(const Graph& g, std::size_t clique_size,
                                  std::size_t clique_count, Rng& rng,
                                  const std::vector<std::uint8_t>* exclude = nullptr);

// Replaces each target's attribute row with the farthest (Euclidean) row
// among `candidate_pool` sampled candidates; targets become labeled
// anomalies. Ties break toward the lower node index.
InjectionResult inject_attribute(const Graph& g, std::size_t count,
                                 std::size_t candidate_pool, Rng& rng,
                                 const std::vector<std::uint8_t>* exclude = nullptr);

// Full protocol: structural cliques first, then attribute swaps on the
// remaining nodes, all driven by the config seed.
InjectionResult inject_anomalies(const Graph& g, const InjectionConfig& cfg);

}  // namespace randgad
