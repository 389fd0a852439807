#include "trainer.hpp"

#include <chrono>
#include <cmath>

#include "errors.hpp"
#include "metrics.hpp"

namespace randgad {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

void maybe_track_metrics(ScoreReport& report, const Graph& labeled,
                         std::span<const double> scores, std::size_t epoch) {
    if (!labeled.has_labels()) return;
    const auto labels = labeled.labels();
    std::size_t pos = 0;
    for (auto l : labels) pos += l;
    if (pos == 0 || pos == labels.size()) return;
    const double a = auc(scores, labels);
    if (a > report.best_auc) {
        report.best_auc = a;
        report.best_auc_epoch = epoch;
    }
}

}  // namespace

void TrainConfig::validate() const {
    if (epochs < 1) throw ArgumentError("train: epochs must be positive");
    if (epochs < bandit.warmup)
        throw ArgumentError("train: epochs must cover the warm-up phase");
    if (!(learning_rate > 0.0))
        throw ArgumentError("train: learning rate must be positive");
    model.validate();
    bandit.validate();
    if (pool.sample_size < 1)
        throw ArgumentError("train: neighborhood sample size must be positive");
}

TrainResult train(const Graph& g, const TrainConfig& cfg) {
    cfg.validate();
    // Unsupervised contract: the training path never sees labels.
    const Graph view = g.without_labels();
    const std::size_t n = view.node_count();
    if (n == 0) throw ArgumentError("train: empty graph");

    PoolConfig pool_cfg = cfg.pool;
    pool_cfg.seed = cfg.seed;
    NeighborPool pool = NeighborPool::build(view, pool_cfg);

    BanditState bandit = BanditState::init(cfg.bandit);
    Rng init_rng = Rng::substream(cfg.seed, "init");
    ModelParams params = ModelParams::init(view.attr_dim(), cfg.model, init_rng);
    AdamConfig adam_cfg;
    adam_cfg.learning_rate = cfg.learning_rate;
    Adam adam(params.all(), adam_cfg);
    Rng sample_rng = Rng::substream(cfg.seed, "sampling");

    auto attrs = attribute_tensor(view);
    auto dense_adj = dense_adjacency_tensor(view);
    auto a_norm = std::make_shared<const SparseMatrix>(
        normalized_adjacency(view, NormMode::Symmetric, true));

    TrainResult result;
    ScoreReport& report = result.report;
    report.history.reserve(cfg.epochs);

    std::shared_ptr<ModelParams> last_good;
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        const auto t0 = Clock::now();
        EpochStats stats;
        stats.epoch = epoch;
        stats.probs.assign(bandit.probs().begin(), bandit.probs().end());
        stats.rewards.assign(bandit.config().strategies, 0.0);

        try {
            pool.sample_all(bandit.probs(), pool_cfg.sample_size, sample_rng);
            ForwardPass fp =
                model_forward(attrs, dense_adj, a_norm, pool, params, cfg.model);
            fp.tape.backward(fp.loss);
            adam.step();

            const bool update_due =
                !cfg.freeze_bandit && epoch >= cfg.bandit.warmup &&
                (epoch - cfg.bandit.warmup) % cfg.bandit.update_interval == 0;
            if (update_due) {
                auto rewards = strategy_rewards(pool, bandit.probs(), fp.scores,
                                                cfg.bandit.score_epsilon);
                bandit.update_weights(rewards, n);
                bandit.update_probs();
                stats.rewards = std::move(rewards);
            }

            stats.loss = fp.loss_value;
            stats.topo_term = fp.topo_term;
            stats.attr_term = fp.attr_term;
            report.scores = std::move(fp.scores);
            report.final_mask = std::move(fp.masked);
        } catch (const NumericError& e) {
            throw TrainAbortError(std::string("training aborted at epoch ") +
                                      std::to_string(epoch) + ": " + e.what(),
                                  epoch, last_good);
        }

        maybe_track_metrics(report, g, report.scores, epoch);
        stats.wall_ms = ms_since(t0);
        report.history.push_back(std::move(stats));
        bandit.tick();
        last_good = std::make_shared<ModelParams>(params);
    }

    if (g.has_labels()) {
        report.has_metrics = true;
        report.auc = auc(report.scores, g.labels());
        report.ap = average_precision(report.scores, g.labels());
    }
    result.params = std::move(params);
    return result;
}

ScoreReport evaluate(const Graph& g, ModelParams& params, const TrainConfig& cfg,
                     std::span<const double> strategy_probs) {
    cfg.validate();
    if (!g.has_labels())
        throw ArgumentError("evaluate: labels are required for metrics");

    const Graph view = g.without_labels();
    PoolConfig pool_cfg = cfg.pool;
    pool_cfg.seed = cfg.seed;
    NeighborPool pool = NeighborPool::build(view, pool_cfg);

    std::vector<double> probs(strategy_probs.begin(), strategy_probs.end());
    if (probs.empty())
        probs.assign(cfg.bandit.strategies, 1.0 / double(cfg.bandit.strategies));

    Rng sample_rng = Rng::substream(cfg.seed, "eval-sampling");
    pool.sample_all(probs, pool_cfg.sample_size, sample_rng);

    auto attrs = attribute_tensor(view);
    auto dense_adj = dense_adjacency_tensor(view);
    auto a_norm = std::make_shared<const SparseMatrix>(
        normalized_adjacency(view, NormMode::Symmetric, true));
    ForwardPass fp =
        model_forward(attrs, dense_adj, a_norm, pool, params, cfg.model);

    ScoreReport report;
    report.scores = std::move(fp.scores);
    report.final_mask = std::move(fp.masked);
    report.has_metrics = true;
    report.auc = auc(report.scores, g.labels());
    report.ap = average_precision(report.scores, g.labels());

    EpochStats stats;
    stats.loss = fp.loss_value;
    stats.topo_term = fp.topo_term;
    stats.attr_term = fp.attr_term;
    stats.probs = probs;
    stats.rewards.assign(probs.size(), 0.0);
    report.history.push_back(std::move(stats));
    return report;
}

BaselineResult train_mlp_autoencoder(const Graph& g, const TrainConfig& cfg) {
    cfg.validate();
    const Graph view = g.without_labels();
    const std::size_t n = view.node_count();
    const std::size_t d = view.attr_dim();
    const std::size_t h = cfg.model.embedding;

    Rng init_rng = Rng::substream(cfg.seed, "init");
    std::vector<Parameter> params;
    params.emplace_back("encoder1", xavier_init(d, h, init_rng));
    params.emplace_back("encoder2", xavier_init(h, h, init_rng));
    params.emplace_back("decoder1", xavier_init(h, h, init_rng));
    params.emplace_back("decoder2", xavier_init(h, d, init_rng));
    std::vector<Parameter*> handles;
    for (auto& p : params) handles.push_back(&p);

    AdamConfig adam_cfg;
    adam_cfg.learning_rate = cfg.learning_rate;
    Adam adam(handles, adam_cfg);

    auto attrs = attribute_tensor(view);
    BaselineResult result;
    result.report.history.reserve(cfg.epochs);
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        const auto t0 = Clock::now();
        Tape tape;
        auto x = tape.constant(attrs);
        auto e = tape.tanh(tape.matmul(
            tape.tanh(tape.matmul(x, tape.param(params[0]))),
            tape.param(params[1])));
        auto recon = tape.matmul(
            tape.tanh(tape.matmul(e, tape.param(params[2]))),
            tape.param(params[3]));
        auto d_attr = tape.rows_sqdist(recon, x);
        auto loss = tape.scale(tape.sum(d_attr), 1.0 / double(n));
        tape.backward(loss);
        adam.step();

        EpochStats stats;
        stats.epoch = epoch;
        stats.loss = tape.value(loss).v[0];
        stats.attr_term = stats.loss;
        stats.wall_ms = ms_since(t0);
        result.report.history.push_back(std::move(stats));

        const Tensor& errs = tape.value(d_attr);
        result.report.scores.assign(errs.v.begin(), errs.v.end());
    }
    if (g.has_labels()) {
        result.report.has_metrics = true;
        result.report.auc = auc(result.report.scores, g.labels());
        result.report.ap = average_precision(result.report.scores, g.labels());
    }
    result.params = std::move(params);
    return result;
}

}  // namespace randgad
