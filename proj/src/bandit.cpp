#include "bandit.hpp"

#include <algorithm>
#include <cmath>

#include "errors.hpp"

namespace randgad {

void BanditConfig::validate() const {
    if (strategies < 1) throw ArgumentError("bandit: need at least one strategy");
    if (p_min < 0.0) throw ArgumentError("bandit: p_min must be non-negative");
    if (double(strategies) * p_min >= 1.0)
        throw ArgumentError("bandit: K * p_min must be below 1");
    if (delta1 < 0.0 || delta2 <= 0.0)
        throw ArgumentError("bandit: delta parameters out of range");
    if (update_interval < 1)
        throw ArgumentError("bandit: update interval must be positive");
    if (score_epsilon <= 0.0)
        throw ArgumentError("bandit: score epsilon must be positive");
}

BanditState BanditState::init(const BanditConfig& cfg) {
    cfg.validate();
    BanditState s;
    s.cfg_ = cfg;
    s.weights_.assign(cfg.strategies, 1.0);
    s.probs_.assign(cfg.strategies, 1.0 / double(cfg.strategies));
    return s;
}

void BanditState::update_weights(std::span<const double> reward,
                                 std::size_t node_count) {
    if (reward.size() != weights_.size())
        throw ArgumentError("update_weights: reward length mismatch");
    if (node_count < 1)
        throw ArgumentError("update_weights: node count must be positive");
    const double k = double(weights_.size());
    const double scale =
        0.5 * cfg_.p_min * cfg_.delta1 *
        std::sqrt(std::log(double(node_count) / cfg_.delta2) /
                  (k * double(cfg_.update_interval)));
    double max_w = 0.0;
    for (std::size_t i = 0; i < weights_.size(); ++i) {
        const double exponent =
            scale * (reward[i] + cfg_.exploration_bonus / probs_[i]);
        if (!std::isfinite(exponent))
            throw NumericError("update_weights: non-finite exponent at arm " +
                               std::to_string(i) + " (reward " +
                               std::to_string(reward[i]) + ", p " +
                               std::to_string(probs_[i]) + ")");
        weights_[i] *= std::exp(exponent);
        if (!std::isfinite(weights_[i]))
            throw NumericError("update_weights: weight overflow at arm " +
                               std::to_string(i));
        max_w = std::max(max_w, weights_[i]);
    }
    // Probabilities depend only on weight ratios; cap max weight at 1.
    for (auto& w : weights_) w /= max_w;
}

void BanditState::update_probs() {
    double sum = 0.0;
    for (double w : weights_) {
        if (!(w > 0.0)) throw NumericError("update_probs: non-positive weight");
        sum += w;
    }
    const double k = double(weights_.size());
    for (std::size_t i = 0; i < weights_.size(); ++i)
        probs_[i] = (1.0 - k * cfg_.p_min) * weights_[i] / sum + cfg_.p_min;
}

std::vector<double> consistency(std::span<const double> scores, NodeId center,
                                std::span<const NodeId> neighborhood,
                                double eps) {
    if (neighborhood.empty())
        throw ArgumentError("consistency: empty neighborhood");
    if (eps <= 0.0) throw ArgumentError("consistency: eps must be positive");
    const double yc = scores[std::size_t(center)];
    std::vector<double> logits(neighborhood.size());
    double max_logit = -HUGE_VAL;
    for (std::size_t k = 0; k < neighborhood.size(); ++k) {
        logits[k] = 1.0 / (std::abs(yc - scores[std::size_t(neighborhood[k])]) + eps);
        max_logit = std::max(max_logit, logits[k]);
    }
    double sum = 0.0;
    for (auto& l : logits) {
        l = std::exp(l - max_logit);
        sum += l;
    }
    for (auto& l : logits) l /= sum;
    return logits;
}

std::vector<double> strategy_rewards(const NeighborPool& pool,
                                     std::span<const double> strategy_probs,
                                     std::span<const double> scores, double eps) {
    const std::size_t k = pool.strategy_count();
    if (strategy_probs.size() != k)
        throw ArgumentError("strategy_rewards: probability length mismatch");
    std::vector<double> reward(k, 0.0);
    std::size_t included = 0;
    for (std::size_t i = 0; i < pool.node_count(); ++i) {
        auto sel = pool.selection(NodeId(i));
        if (sel.empty() || pool.selection_fallback(NodeId(i))) continue;
        auto phi = pool.selection_prob(NodeId(i));
        auto c = consistency(scores, NodeId(i), sel, eps);
        ++included;
        for (std::size_t j = 0; j < sel.size(); ++j) {
            if (!(phi[j] > 0.0))
                throw InternalError(
                    "strategy_rewards: selected node outside mixture support");
            const double base = c[j] / phi[j];
            for (std::size_t s = 0; s < k; ++s) {
                const double q = pool.table(s).lookup(NodeId(i), sel[j]);
                if (q != 0.0) reward[s] += base * strategy_probs[s] * q;
            }
        }
    }
    if (included > 0)
        for (auto& r : reward) r /= double(included);
    return reward;
}

}  // namespace randgad
