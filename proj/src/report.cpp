#include "report.hpp"

#include <cstdio>
#include <fstream>

#include "errors.hpp"

namespace randgad {

namespace {

std::string fmt(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

}  // namespace

std::string version_string() { return "randgad 0.1.0"; }

void write_scores_csv(const ScoreReport& report, const Graph* labeled,
                      const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write scores csv: " + path);
    const bool with_labels = labeled != nullptr && labeled->has_labels();
    out << "node,score" << (with_labels ? ",label" : "") << '\n';
    for (std::size_t i = 0; i < report.scores.size(); ++i) {
        out << i << ',' << fmt(report.scores[i]);
        if (with_labels) out << ',' << int(labeled->labels()[i]);
        out << '\n';
    }
}

void write_history_csv(const ScoreReport& report, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write history csv: " + path);
    const std::size_t k =
        report.history.empty() ? 0 : report.history.front().probs.size();
    out << "epoch,loss,loss_topo,loss_attr";
    for (std::size_t i = 0; i < k; ++i) out << ",p_" << i;
    for (std::size_t i = 0; i < k; ++i) out << ",r_" << i;
    out << ",wall_ms\n";
    for (const auto& row : report.history) {
        out << row.epoch << ',' << fmt(row.loss) << ',' << fmt(row.topo_term)
            << ',' << fmt(row.attr_term);
        for (std::size_t i = 0; i < k; ++i)
            out << ',' << fmt(i < row.probs.size() ? row.probs[i] : 0.0);
        for (std::size_t i = 0; i < k; ++i)
            out << ',' << fmt(i < row.rewards.size() ? row.rewards[i] : 0.0);
        out << ',' << fmt(row.wall_ms) << '\n';
    }
}

nlohmann::json train_config_json(const TrainConfig& cfg) {
    nlohmann::json j;
    j["epochs"] = cfg.epochs;
    j["learning_rate"] = cfg.learning_rate;
    j["seed"] = cfg.seed;
    j["freeze_bandit"] = cfg.freeze_bandit;
    j["model"] = {
        {"embedding", cfg.model.embedding},
        {"mask_rate", cfg.model.mask_rate},
        {"alpha", cfg.model.alpha},
        {"lambda", cfg.model.lambda},
        {"attr_decoder", cfg.model.decoder == ModelConfig::Decoder::GraphConv
                             ? "graph-conv"
                             : "mlp2"},
    };
    j["bandit"] = {
        {"strategies", cfg.bandit.strategies},
        {"p_min", cfg.bandit.p_min},
        {"delta1", cfg.bandit.delta1},
        {"delta2", cfg.bandit.delta2},
        {"update_interval", cfg.bandit.update_interval},
        {"warmup", cfg.bandit.warmup},
        {"score_epsilon", cfg.bandit.score_epsilon},
        {"exploration_bonus", cfg.bandit.exploration_bonus},
    };
    j["pool"] = {
        {"knn_k", cfg.pool.knn_k},
        {"teleport", cfg.pool.teleport},
        {"ppr_top", cfg.pool.ppr_top},
        {"ppr_tol", cfg.pool.ppr_tol},
        {"two_hop_cap", cfg.pool.two_hop_cap},
        {"sample_size", cfg.pool.sample_size},
        {"threads", cfg.pool.threads},
    };
    return j;
}

nlohmann::json summary_json(const ScoreReport& report, const TrainConfig& cfg) {
    nlohmann::json j;
    j["version"] = version_string();
    j["seed"] = cfg.seed;
    j["config"] = train_config_json(cfg);
    j["epochs_run"] = report.history.size();
    if (!report.history.empty()) {
        j["final_loss"] = report.history.back().loss;
        j["final_probs"] = report.history.back().probs;
    }
    j["masked_nodes"] = report.final_mask.size();
    if (report.has_metrics) {
        j["auc"] = report.auc;
        j["ap"] = report.ap;
        j["best_auc"] = report.best_auc;
        j["best_auc_epoch"] = report.best_auc_epoch;
    }
    return j;
}

std::string file_digest(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot digest file: " + path);
    std::uint64_t h = 0xcbf29ce484222325ULL;
    char buf[65536];
    while (in.read(buf, sizeof buf) || in.gcount() > 0) {
        const auto got = in.gcount();
        for (std::streamsize i = 0; i < got; ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 0x100000001b3ULL;
        }
        if (got < static_cast<std::streamsize>(sizeof buf)) break;
    }
    char hex[17];
    std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(h));
    return hex;
}

}  // namespace randgad
