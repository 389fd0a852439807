#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "bandit.hpp"
#include "errors.hpp"
#include "graph.hpp"
#include "model.hpp"
#include "pool.hpp"
#include "tensor.hpp"

namespace randgad {

struct TrainConfig {
    std::size_t epochs = 300;
    double learning_rate = 5e-3;
    std::uint64_t seed = 1;
    ModelConfig model;
    BanditConfig bandit;
    PoolConfig pool;
    bool freeze_bandit = false;  // ablation: keep p uniform, skip updates

    void validate() const;
};

struct EpochStats {
    std::size_t epoch = 0;
    double loss = 0.0;
    double topo_term = 0.0;
    double attr_term = 0.0;
    std::vector<double> probs;    // strategy probabilities used this epoch
    std::vector<double> rewards;  // zeros on epochs without a bandit update
    double wall_ms = 0.0;
};

struct ScoreReport {
    std::vector<double> scores;          // final-epoch anomaly scores
    bool has_metrics = false;
    double auc = 0.0;
    double ap = 0.0;
    std::vector<EpochStats> history;
    std::vector<NodeId> final_mask;      // masked set of the final epoch
    std::size_t best_auc_epoch = 0;      // diagnostics only
    double best_auc = 0.0;
};

struct TrainResult {
    ModelParams params;
    ScoreReport report;
};

// NaN abort carrying the last epoch that completed and its parameters.
struct TrainAbortError : NumericError {
    TrainAbortError(const std::string& msg, std::size_t failed_epoch,
                    std::shared_ptr<ModelParams> last_good_params)
        : NumericError(msg), epoch(failed_epoch),
          last_good(std::move(last_good_params)) {}
    std::size_t epoch;
    std::shared_ptr<ModelParams> last_good;
};

// Full pipeline: pool build, warm-up, per-epoch sampling/forward/backward,
// bandit reward and updates. Labels are stripped before training and used
// only for the report's metrics.
TrainResult train(const Graph& g, const TrainConfig& cfg);

// Forward pass with the stored parameters (same mask rate as training) and
// metric computation; labels are required.
ScoreReport evaluate(const Graph& g, ModelParams& params, const TrainConfig& cfg,
                     std::span<const double> strategy_probs = {});

// Reference baseline: plain MLP autoencoder on attributes, scored by
// per-node reconstruction error.
struct BaselineResult {
    std::vector<Parameter> params;
    ScoreReport report;
};
BaselineResult train_mlp_autoencoder(const Graph& g, const TrainConfig& cfg);

}  // namespace randgad
