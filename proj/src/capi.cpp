#include "randgad.h"

#include <exception>
#include <fstream>
#include <memory>
#include <optional>
#include <string>

#include "errors.hpp"
#include "graph.hpp"
#include "inject.hpp"
#include "metrics.hpp"
#include "model.hpp"
#include "pool.hpp"
#include "report.hpp"
#include "trainer.hpp"

struct rgd_graph {
    randgad::Graph g;
};

struct rgd_report {
    randgad::ScoreReport report;
    randgad::TrainConfig cfg;
    std::optional<randgad::ModelParams> params;
    std::vector<randgad::Parameter> baseline_params;
};

namespace {

thread_local std::string g_last_error;

template <typename Fn>
rgd_status guarded(Fn&& fn) {
    try {
        fn();
        return RGD_OK;
    } catch (const randgad::ArgumentError& e) {
        g_last_error = e.what();
        return RGD_ERR_ARGUMENT;
    } catch (const randgad::DataError& e) {
        g_last_error = e.what();
        return RGD_ERR_DATA;
    } catch (const randgad::NumericError& e) {
        g_last_error = e.what();
        return RGD_ERR_NUMERIC;
    } catch (const randgad::CapacityError& e) {
        g_last_error = e.what();
        return RGD_ERR_CAPACITY;
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return RGD_ERR_INTERNAL;
    }
}

rgd_status require(bool ok, const char* msg) {
    if (ok) return RGD_OK;
    g_last_error = msg;
    return RGD_ERR_ARGUMENT;
}

randgad::PoolConfig to_pool_config(const rgd_pool_config& c) {
    randgad::PoolConfig p;
    p.knn_k = c.knn_k;
    p.teleport = c.teleport;
    p.ppr_top = c.ppr_top;
    p.ppr_tol = c.ppr_tol;
    p.two_hop_cap = c.two_hop_cap;
    p.sample_size = c.sample_size;
    p.threads = c.threads;
    return p;
}

randgad::TrainConfig to_train_config(const rgd_train_config& c) {
    randgad::TrainConfig t;
    t.epochs = c.epochs;
    t.learning_rate = c.learning_rate;
    t.seed = c.seed;
    t.model.embedding = c.embedding;
    t.model.mask_rate = c.mask_rate;
    t.model.alpha = c.alpha;
    t.model.lambda = c.lambda;
    t.model.decoder = c.attr_decoder == 0
                          ? randgad::ModelConfig::Decoder::GraphConv
                          : randgad::ModelConfig::Decoder::Mlp2;
    t.bandit.p_min = c.p_min;
    t.bandit.delta1 = c.delta1;
    t.bandit.delta2 = c.delta2;
    t.bandit.update_interval = c.update_interval;
    t.bandit.warmup = c.warmup;
    t.bandit.score_epsilon = c.score_epsilon;
    t.bandit.exploration_bonus = c.exploration_bonus;
    t.freeze_bandit = c.freeze_bandit != 0;
    t.pool = to_pool_config(c.pool);
    return t;
}

}  // namespace

extern "C" {

const char* rgd_version(void) {
    static const std::string v = randgad::version_string();
    return v.c_str();
}

const char* rgd_last_error(void) { return g_last_error.c_str(); }

rgd_status rgd_graph_load(const char* edge_path, const char* attr_path,
                          const char* label_path, rgd_graph** out) {
    if (auto s = require(edge_path && attr_path && out,
                         "rgd_graph_load: null argument"))
        return s;
    *out = nullptr;
    return guarded([&] {
        std::optional<std::string> labels;
        if (label_path) labels = label_path;
        auto g = std::make_unique<rgd_graph>();
        g->g = randgad::load_graph(edge_path, attr_path, labels);
        *out = g.release();
    });
}

rgd_status rgd_graph_save(const rgd_graph* g, const char* edge_path,
                          const char* attr_path, const char* label_path,
                          int binary_attrs) {
    if (auto s = require(g && edge_path && attr_path,
                         "rgd_graph_save: null argument"))
        return s;
    return guarded([&] {
        std::optional<std::string> labels;
        if (label_path) labels = label_path;
        randgad::save_graph(g->g, edge_path, attr_path, labels,
                            binary_attrs ? randgad::AttrFormat::Binary
                                         : randgad::AttrFormat::Csv);
    });
}

rgd_status rgd_graph_info(const rgd_graph* g, uint64_t* nodes,
                          uint64_t* attr_dim, uint64_t* undirected_edges,
                          uint64_t* anomalies) {
    if (auto s = require(g != nullptr, "rgd_graph_info: null graph")) return s;
    if (nodes) *nodes = g->g.node_count();
    if (attr_dim) *attr_dim = g->g.attr_dim();
    if (undirected_edges) *undirected_edges = g->g.edge_count();
    if (anomalies) *anomalies = g->g.anomaly_count();
    return RGD_OK;
}

void rgd_graph_free(rgd_graph* g) { delete g; }

void rgd_inject_config_defaults(rgd_inject_config* cfg) {
    if (!cfg) return;
    randgad::InjectionConfig d;
    cfg->clique_size = d.clique_size;
    cfg->clique_count = d.clique_count;
    cfg->attr_count = d.attr_count;
    cfg->candidate_pool = d.candidate_pool;
    cfg->seed = d.seed;
}

rgd_status rgd_inject(const rgd_graph* g, const rgd_inject_config* cfg,
                      rgd_graph** out) {
    if (auto s = require(g && cfg && out, "rgd_inject: null argument")) return s;
    *out = nullptr;
    return guarded([&] {
        randgad::InjectionConfig ic;
        ic.clique_size = cfg->clique_size;
        ic.clique_count = cfg->clique_count;
        ic.attr_count = cfg->attr_count;
        ic.candidate_pool = cfg->candidate_pool;
        ic.seed = cfg->seed;
        auto res = randgad::inject_anomalies(g->g, ic);
        auto wrapped = std::make_unique<rgd_graph>();
        wrapped->g = std::move(res.graph);
        *out = wrapped.release();
    });
}

void rgd_pool_config_defaults(rgd_pool_config* cfg) {
    if (!cfg) return;
    randgad::PoolConfig d;
    cfg->knn_k = d.knn_k;
    cfg->teleport = d.teleport;
    cfg->ppr_top = d.ppr_top;
    cfg->ppr_tol = d.ppr_tol;
    cfg->two_hop_cap = d.two_hop_cap;
    cfg->sample_size = d.sample_size;
    cfg->threads = d.threads;
}

rgd_status rgd_pool_dump(const rgd_graph* g, const rgd_pool_config* cfg,
                         uint64_t seed, const char* tsv_path) {
    if (auto s = require(g && cfg && tsv_path, "rgd_pool_dump: null argument"))
        return s;
    return guarded([&] {
        auto pc = to_pool_config(*cfg);
        pc.seed = seed;
        auto pool = randgad::NeighborPool::build(g->g, pc);
        pool.dump_tsv(std::string(tsv_path));
    });
}

void rgd_train_config_defaults(rgd_train_config* cfg) {
    if (!cfg) return;
    randgad::TrainConfig d;
    cfg->epochs = d.epochs;
    cfg->learning_rate = d.learning_rate;
    cfg->seed = d.seed;
    cfg->embedding = d.model.embedding;
    cfg->mask_rate = d.model.mask_rate;
    cfg->alpha = d.model.alpha;
    cfg->lambda = d.model.lambda;
    cfg->attr_decoder = 0;
    cfg->p_min = d.bandit.p_min;
    cfg->delta1 = d.bandit.delta1;
    cfg->delta2 = d.bandit.delta2;
    cfg->update_interval = d.bandit.update_interval;
    cfg->warmup = d.bandit.warmup;
    cfg->score_epsilon = d.bandit.score_epsilon;
    cfg->exploration_bonus = d.bandit.exploration_bonus;
    cfg->freeze_bandit = 0;
    cfg->arch = 0;
    rgd_pool_config_defaults(&cfg->pool);
}

rgd_status rgd_train(const rgd_graph* g, const rgd_train_config* cfg,
                     rgd_report** out) {
    if (auto s = require(g && cfg && out, "rgd_train: null argument")) return s;
    *out = nullptr;
    return guarded([&] {
        auto tc = to_train_config(*cfg);
        auto rep = std::make_unique<rgd_report>();
        rep->cfg = tc;
        if (cfg->arch == 1) {
            auto res = randgad::train_mlp_autoencoder(g->g, tc);
            rep->report = std::move(res.report);
            rep->baseline_params = std::move(res.params);
        } else {
            auto res = randgad::train(g->g, tc);
            rep->report = std::move(res.report);
            rep->params = std::move(res.params);
        }
        *out = rep.release();
    });
}

rgd_status rgd_report_scores(const rgd_report* r, const double** data,
                             size_t* count) {
    if (auto s = require(r && data && count, "rgd_report_scores: null argument"))
        return s;
    *data = r->report.scores.data();
    *count = r->report.scores.size();
    return RGD_OK;
}

rgd_status rgd_report_metrics(const rgd_report* r, double* auc, double* ap) {
    if (auto s = require(r != nullptr, "rgd_report_metrics: null report"))
        return s;
    if (!r->report.has_metrics) {
        g_last_error = "report carries no metrics (graph had no labels)";
        return RGD_ERR_DATA;
    }
    if (auc) *auc = r->report.auc;
    if (ap) *ap = r->report.ap;
    return RGD_OK;
}

rgd_status rgd_report_mask_stats(const rgd_report* r, const rgd_graph* labeled,
                                 double* masked_fraction,
                                 double* global_fraction) {
    if (auto s = require(r && labeled, "rgd_report_mask_stats: null argument"))
        return s;
    return guarded([&] {
        if (!labeled->g.has_labels())
            throw randgad::DataError("mask stats require a labeled graph");
        const auto labels = labeled->g.labels();
        if (r->report.scores.size() != labels.size())
            throw randgad::DataError("mask stats: report/graph size mismatch");
        std::size_t mask_anom = 0;
        for (auto id : r->report.final_mask)
            mask_anom += labels[std::size_t(id)];
        std::size_t total_anom = 0;
        for (auto l : labels) total_anom += l;
        if (masked_fraction)
            *masked_fraction = r->report.final_mask.empty()
                                   ? 0.0
                                   : double(mask_anom) /
                                         double(r->report.final_mask.size());
        if (global_fraction)
            *global_fraction = double(total_anom) / double(labels.size());
    });
}

rgd_status rgd_report_write_scores_csv(const rgd_report* r,
                                       const rgd_graph* labeled_or_null,
                                       const char* path) {
    if (auto s = require(r && path, "rgd_report_write_scores_csv: null argument"))
        return s;
    return guarded([&] {
        randgad::write_scores_csv(
            r->report, labeled_or_null ? &labeled_or_null->g : nullptr, path);
    });
}

rgd_status rgd_report_write_history_csv(const rgd_report* r, const char* path) {
    if (auto s = require(r && path, "rgd_report_write_history_csv: null argument"))
        return s;
    return guarded([&] { randgad::write_history_csv(r->report, path); });
}

rgd_status rgd_report_write_summary_json(const rgd_report* r, const char* path) {
    if (auto s = require(r && path, "rgd_report_write_summary_json: null argument"))
        return s;
    return guarded([&] {
        std::ofstream out(path);
        if (!out)
            throw randgad::DataError(std::string("cannot write summary json: ") +
                                     path);
        out << randgad::summary_json(r->report, r->cfg).dump(2) << '\n';
    });
}

rgd_status rgd_report_write_checkpoint(const rgd_report* r,
                                       const char* json_path,
                                       const char* blob_path) {
    if (auto s = require(r && json_path && blob_path,
                         "rgd_report_write_checkpoint: null argument"))
        return s;
    return guarded([&] {
        std::vector<const randgad::Parameter*> handles;
        if (r->params)
            for (const auto* p : r->params->all()) handles.push_back(p);
        else
            for (const auto& p : r->baseline_params) handles.push_back(&p);
        randgad::save_checkpoint(handles, json_path, blob_path);
    });
}

void rgd_report_free(rgd_report* r) { delete r; }

rgd_status rgd_auc(const double* scores, const uint8_t* labels, size_t n,
                   double* out) {
    if (auto s = require(scores && labels && out && n > 0,
                         "rgd_auc: null or empty input"))
        return s;
    return guarded([&] {
        *out = randgad::auc({scores, n}, {labels, n});
    });
}

rgd_status rgd_ap(const double* scores, const uint8_t* labels, size_t n,
                  double* out) {
    if (auto s = require(scores && labels && out && n > 0,
                         "rgd_ap: null or empty input"))
        return s;
    return guarded([&] {
        *out = randgad::average_precision({scores, n}, {labels, n});
    });
}

}  // extern "C"
