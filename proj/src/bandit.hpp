#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "pool.hpp"

namespace randgad {

struct BanditConfig {
    std::size_t strategies = 4;       // K
    double p_min = 0.05;
    double delta1 = 1.0;
    double delta2 = 0.1;
    std::size_t update_interval = 5;  // T, epochs between updates
    std::size_t warmup = 3;           // U, epochs before the first reward
    double score_epsilon = 1e-6;      // consistency softmax smoothing
    // Coefficient on the 1/p_k exploration term of the weight update. The
    // raw update gives that term the same scale as the reward, which pins
    // every arm near the stationary point of the floor term instead of
    // letting the best arm's probability grow toward 1-(K-1)p_min; with the
    // probability floor already guaranteeing exploration, the term defaults
    // to off.
    double exploration_bonus = 0.0;

    void validate() const;
};

// Exponential-weights strategy selector state.
class BanditState {
public:
    BanditState() = default;
    static BanditState init(const BanditConfig& cfg);

    std::span<const double> probs() const { return probs_; }
    std::span<const double> weights() const { return weights_; }
    const BanditConfig& config() const { return cfg_; }
    std::size_t epoch() const { return epoch_; }
    void tick() { ++epoch_; }

    // Multiplies each weight by
    //   exp((p_min/2) (r_k + bonus/p_k) delta1 sqrt(ln(n/delta2)/(K T)))
    // then rescales so max w = 1; probabilities are ratio-invariant.
    void update_weights(std::span<const double> reward, std::size_t node_count);

    // p_k = (1 - K p_min) w_k / sum(w) + p_min.
    void update_probs();

private:
    BanditConfig cfg_;
    std::vector<double> weights_;
    std::vector<double> probs_;
    std::size_t epoch_ = 0;
};

// Softmax over 1/(|score_i - score_j| + eps) for j in the neighborhood;
// sums to 1. Empty neighborhoods are the caller's business.
std::vector<double> consistency(std::span<const double> scores, NodeId center,
                                std::span<const NodeId> neighborhood, double eps);

// Per-strategy reward: mean over centers with non-empty selections of
// C_i . (p_k Q_k(i -> N_i) / Phi_i(N_i)). Selections that came from a
// mixture fallback carry no strategy mass and are skipped.
std::vector<double> strategy_rewards(const NeighborPool& pool,
                                     std::span<const double> strategy_probs,
                                     std::span<const double> scores, double eps);

}  // namespace randgad
