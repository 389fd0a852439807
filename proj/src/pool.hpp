#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "graph.hpp"
#include "rng.hpp"

namespace randgad {

struct PoolConfig {
    std::size_t knn_k = 10;
    double teleport = 0.15;
    std::size_t ppr_top = 10;
    double ppr_tol = 1e-5;
    std::size_t two_hop_cap = 256;   // largest-weight entries kept per center
    std::size_t sample_size = 20;    // M, neighborhood draw budget
    std::uint64_t seed = 1;          // drives the KNN zero-norm fallback
    std::size_t threads = 0;         // 0 = hardware concurrency
};

// Per-center candidate lists with weights normalized to sum 1 per non-empty
// row. Candidates are sorted ascending and never include the center.
struct StrategyTable {
    std::vector<std::int64_t> offsets;  // n + 1
    std::vector<NodeId> cand;
    std::vector<double> weight;

    std::size_t centers() const { return offsets.empty() ? 0 : offsets.size() - 1; }
    std::span<const NodeId> row_cand(std::size_t i) const {
        return {cand.data() + offsets[i],
                std::size_t(offsets[i + 1] - offsets[i])};
    }
    std::span<const double> row_weight(std::size_t i) const {
        return {weight.data() + offsets[i],
                std::size_t(offsets[i + 1] - offsets[i])};
    }
    bool row_empty(std::size_t i) const { return offsets[i] == offsets[i + 1]; }
    // 0 when j is not a candidate of i.
    double lookup(NodeId i, NodeId j) const;
    void validate(std::size_t n) const;
};

StrategyTable build_onehop(const Graph& g);
StrategyTable build_twohop(const Graph& g, std::size_t cap);
StrategyTable build_knn(const Graph& g, std::size_t knn_k, std::uint64_t seed,
                        std::size_t threads);
StrategyTable build_ppr(const Graph& g, double teleport, std::size_t top,
                        double tol, std::size_t threads);

// Truncation-free approximate PPR vector for one seed; L1 error <= tol.
std::vector<double> ppr_vector(const Graph& g, NodeId seed, double teleport,
                               double tol);

// The candidate-neighborhood pool: K strategy tables plus the per-epoch
// cache of realized neighborhoods and their sampling probabilities.
class NeighborPool {
public:
    struct Mixture {
        std::vector<NodeId> cand;
        std::vector<double> prob;   // sums to 1 when non-empty
        bool fallback = false;      // true when outside strategy support
    };

    NeighborPool(std::vector<StrategyTable> tables, std::size_t nodes);

    static NeighborPool build(const Graph& g, const PoolConfig& cfg);

    std::size_t strategy_count() const { return tables_.size(); }
    std::size_t node_count() const { return nodes_; }
    const StrategyTable& table(std::size_t k) const { return tables_[k]; }

    // Sum over strategies with non-empty rows of p_k (the mixture mass
    // before renormalization).
    double mixture_mass(std::span<const double> strategy_probs, NodeId i) const;

    Mixture mixture(std::span<const double> strategy_probs, NodeId i) const;

    // Up to M draws without replacement from the mixture.
    static std::vector<NodeId> sample_neighborhood(const Mixture& mix,
                                                   std::size_t max_draws, Rng& rng);

    // Samples every center and caches selections with their probabilities.
    void sample_all(std::span<const double> strategy_probs, std::size_t max_draws,
                    Rng& rng);

    // Pins one center's realized neighborhood (deterministic setups, tests).
    void set_selection(NodeId i, std::vector<NodeId> nodes,
                       std::vector<double> probs, bool fallback = false);

    std::span<const NodeId> selection(NodeId i) const {
        return selections_[std::size_t(i)];
    }
    std::span<const double> selection_prob(NodeId i) const {
        return selection_probs_[std::size_t(i)];
    }
    bool selection_fallback(NodeId i) const {
        return selection_fallback_[std::size_t(i)] != 0;
    }

    std::size_t total_candidate_entries() const;
    void dump_tsv(std::ostream& out) const;
    void dump_tsv(const std::string& path) const;

private:
    std::size_t nodes_ = 0;
    std::vector<StrategyTable> tables_;
    std::vector<std::vector<NodeId>> selections_;
    std::vector<std::vector<double>> selection_probs_;
    std::vector<std::uint8_t> selection_fallback_;
};

}  // namespace randgad
