#include "inject.hpp"

#include <algorithm>
#include <cmath>

#include "errors.hpp"

namespace randgad {

void InjectionConfig::validate(std::size_t nodes) const {
    if (clique_count > 0 && clique_size < 2)
        throw ArgumentError("inject: clique size must be at least 2");
    if (candidate_pool < 1)
        throw ArgumentError("inject: candidate pool must be at least 1");
    if (clique_size * clique_count + attr_count > nodes)
        throw CapacityError("inject: p*q + attr_count exceeds node count");
}

namespace {

std::vector<std::uint8_t> merged_labels(const Graph& g,
                                        const std::vector<std::uint8_t>* exclude) {
    std::vector<std::uint8_t> labels(g.node_count(), 0);
    if (g.has_labels())
        labels.assign(g.labels().begin(), g.labels().end());
    if (exclude)
        for (std::size_t i = 0; i < labels.size(); ++i)
            if ((*exclude)[i]) labels[i] = 1;
    return labels;
}

// Uniform draw of `count` nodes among those not marked in `taken`.
std::vector<NodeId> draw_free_nodes(const std::vector<std::uint8_t>& taken,
                                    std::size_t count, Rng& rng) {
    std::vector<NodeId> free_nodes;
    for (std::size_t i = 0; i < taken.size(); ++i)
        if (!taken[i]) free_nodes.push_back(NodeId(i));
    if (free_nodes.size() < count)
        throw CapacityError("inject: not enough unlabeled nodes");
    auto picks = rng.sample_without_replacement(
        static_cast<std::uint32_t>(free_nodes.size()),
        static_cast<std::uint32_t>(count));
    std::vector<NodeId> out;
    out.reserve(count);
    for (auto p : picks) out.push_back(free_nodes[p]);
    return out;
}

}  // namespace

InjectionResult inject_structural(const Graph& g, std::size_t clique_size,
                                  std::size_t clique_count, Rng& rng,
                                  const std::vector<std::uint8_t>* exclude) {
    if (clique_count > 0 && clique_size < 2)
        throw ArgumentError("inject_structural: clique size must be at least 2");

    InjectionResult result;
    std::vector<std::uint8_t> taken = merged_labels(g, exclude);
    std::vector<std::uint8_t> labels(g.node_count(), 0);
    if (g.has_labels()) labels.assign(g.labels().begin(), g.labels().end());

    std::vector<std::pair<NodeId, NodeId>> extra_edges;
    for (std::size_t c = 0; c < clique_count; ++c) {
        auto members = draw_free_nodes(taken, clique_size, rng);
        for (NodeId v : members) {
            taken[std::size_t(v)] = 1;
            labels[std::size_t(v)] = 1;
            result.structural.push_back(v);
        }
        for (std::size_t a = 0; a < members.size(); ++a)
            for (std::size_t b = a + 1; b < members.size(); ++b)
                extra_edges.emplace_back(members[a], members[b]);
        std::sort(members.begin(), members.end());
        result.cliques.push_back(std::move(members));
    }
    std::sort(result.structural.begin(), result.structural.end());

    // Merge the clique edges with the existing adjacency.
    std::vector<std::pair<NodeId, NodeId>> all_edges;
    const auto& adj = g.adjacency();
    for (std::size_t i = 0; i < adj.nodes; ++i)
        for (NodeId j : adj.row(i))
            if (NodeId(i) < j) all_edges.emplace_back(NodeId(i), j);
    all_edges.insert(all_edges.end(), extra_edges.begin(), extra_edges.end());

    result.graph = g.with_adjacency(build_adjacency(g.node_count(), all_edges))
                       .with_labels(std::move(labels));
    return result;
}

InjectionResult inject_attribute(const Graph& g, std::size_t count,
                                 std::size_t candidate_pool, Rng& rng,
                                 const std::vector<std::uint8_t>* exclude) {
    const std::size_t n = g.node_count();
    if (candidate_pool >= n)
        throw ArgumentError("inject_attribute: candidate pool must be below node count");

    InjectionResult result;
    std::vector<std::uint8_t> taken = merged_labels(g, exclude);
    std::vector<std::uint8_t> labels(n, 0);
    if (g.has_labels()) labels.assign(g.labels().begin(), g.labels().end());

    auto targets = draw_free_nodes(taken, count, rng);
    DenseMatrix attrs = g.attributes();  // owned copy to mutate

    const std::size_t d = g.attr_dim();
    for (NodeId target : targets) {
        // k distinct candidates from all nodes except the target.
        auto raw = rng.sample_without_replacement(static_cast<std::uint32_t>(n - 1),
                                                  static_cast<std::uint32_t>(candidate_pool));
        NodeId best = -1;
        double best_dist = -1.0;
        for (auto r : raw) {
            NodeId cand = NodeId(r);
            if (cand >= target) cand = NodeId(r + 1);  // skip the target slot
            double dist = 0.0;
            const double* x = g.attributes().data.data() + std::size_t(target) * d;
            const double* y = g.attributes().data.data() + std::size_t(cand) * d;
            for (std::size_t j = 0; j < d; ++j) {
                const double diff = x[j] - y[j];
                dist += diff * diff;
            }
            if (dist > best_dist || (dist == best_dist && cand < best)) {
                best_dist = dist;
                best = cand;
            }
        }
        std::copy_n(g.attributes().data.data() + std::size_t(best) * d, d,
                    attrs.data.data() + std::size_t(target) * d);
        labels[std::size_t(target)] = 1;
        result.attribute.push_back(target);
    }
    std::sort(result.attribute.begin(), result.attribute.end());

    result.graph = g.with_attributes(std::move(attrs)).with_labels(std::move(labels));
    return result;
}

InjectionResult inject_anomalies(const Graph& g, const InjectionConfig& cfg) {
    cfg.validate(g.node_count());
    Rng rng = Rng::substream(cfg.seed, "inject");

    InjectionResult structural =
        inject_structural(g, cfg.clique_size, cfg.clique_count, rng);
    InjectionResult attribute =
        inject_attribute(structural.graph, cfg.attr_count, cfg.candidate_pool, rng);

    InjectionResult out;
    out.graph = std::move(attribute.graph);
    out.structural = std::move(structural.structural);
    out.cliques = std::move(structural.cliques);
    out.attribute = std::move(attribute.attribute);
    return out;
}

}  // namespace randgad
