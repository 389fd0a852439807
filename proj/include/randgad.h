/* randgad: unsupervised graph anomaly detection with bandit-selected
 * neighborhoods and dual-reconstruction scoring.
 *
 * C API over the shared library. All objects are opaque handles created and
 * destroyed through these functions; every fallible call returns an
 * rgd_status and leaves a human-readable message in rgd_last_error() on
 * failure. Handles are not thread-safe for concurrent mutation; distinct
 * handles may be used from distinct threads.
 */
#ifndef RANDGAD_H
#define RANDGAD_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum rgd_status {
    RGD_OK = 0,
    RGD_ERR_ARGUMENT = 2,  /* bad parameter or unsupported range */
    RGD_ERR_DATA = 3,      /* malformed or inconsistent input data */
    RGD_ERR_NUMERIC = 4,   /* NaN/Inf or undefined metric */
    RGD_ERR_CAPACITY = 5,  /* request exceeds what the graph can satisfy */
    RGD_ERR_INTERNAL = 6   /* invariant violation (library bug) */
} rgd_status;

typedef struct rgd_graph rgd_graph;
typedef struct rgd_report rgd_report;

const char* rgd_version(void);

/* Message for the most recent failure on this thread. */
const char* rgd_last_error(void);

/* ---- graphs ------------------------------------------------------- */

/* Edge file: whitespace "src dst" pairs, 0-indexed. Attribute file:
 * headerless CSV or the RANDATTR binary format. label_path may be NULL. */
rgd_status rgd_graph_load(const char* edge_path, const char* attr_path,
                          const char* label_path, rgd_graph** out);

/* binary_attrs != 0 writes the RANDATTR format. label_path may be NULL. */
rgd_status rgd_graph_save(const rgd_graph* g, const char* edge_path,
                          const char* attr_path, const char* label_path,
                          int binary_attrs);

rgd_status rgd_graph_info(const rgd_graph* g, uint64_t* nodes,
                          uint64_t* attr_dim, uint64_t* undirected_edges,
                          uint64_t* anomalies);

void rgd_graph_free(rgd_graph* g);

/* ---- anomaly injection -------------------------------------------- */

typedef struct rgd_inject_config {
    uint64_t clique_size;     /* p */
    uint64_t clique_count;    /* q */
    uint64_t attr_count;      /* attribute-swap anomalies */
    uint64_t candidate_pool;  /* k candidates per swap */
    uint64_t seed;
} rgd_inject_config;

void rgd_inject_config_defaults(rgd_inject_config* cfg);

rgd_status rgd_inject(const rgd_graph* g, const rgd_inject_config* cfg,
                      rgd_graph** out);

/* ---- candidate pool ------------------------------------------------ */

typedef struct rgd_pool_config {
    uint64_t knn_k;
    double teleport;
    uint64_t ppr_top;
    double ppr_tol;
    uint64_t two_hop_cap;
    uint64_t sample_size;  /* M */
    uint64_t threads;      /* 0 = auto */
} rgd_pool_config;

void rgd_pool_config_defaults(rgd_pool_config* cfg);

/* Writes one "strategy<TAB>center<TAB>candidate<TAB>weight" line per entry. */
rgd_status rgd_pool_dump(const rgd_graph* g, const rgd_pool_config* cfg,
                         uint64_t seed, const char* tsv_path);

/* ---- training and evaluation --------------------------------------- */

typedef struct rgd_train_config {
    uint64_t epochs;
    double learning_rate;
    uint64_t seed;
    /* model */
    uint64_t embedding;
    double mask_rate;
    double alpha;
    double lambda;
    int attr_decoder;  /* 0 = one-layer graph conv, 1 = two-layer MLP */
    /* bandit */
    double p_min;
    double delta1;
    double delta2;
    uint64_t update_interval;  /* T */
    uint64_t warmup;           /* U */
    double score_epsilon;
    double exploration_bonus;
    int freeze_bandit;  /* ablation: uniform strategy probabilities */
    int arch;           /* 0 = full model, 1 = MLP autoencoder baseline */
    rgd_pool_config pool;
} rgd_train_config;

void rgd_train_config_defaults(rgd_train_config* cfg);

rgd_status rgd_train(const rgd_graph* g, const rgd_train_config* cfg,
                     rgd_report** out);

/* ---- reports -------------------------------------------------------- */

rgd_status rgd_report_scores(const rgd_report* r, const double** data,
                             size_t* count);

/* RGD_ERR_DATA when the training graph had no labels. */
rgd_status rgd_report_metrics(const rgd_report* r, double* auc, double* ap);

/* Anomaly fraction inside the final masked set vs. over the whole graph. */
rgd_status rgd_report_mask_stats(const rgd_report* r, const rgd_graph* labeled,
                                 double* masked_fraction,
                                 double* global_fraction);

rgd_status rgd_report_write_scores_csv(const rgd_report* r,
                                       const rgd_graph* labeled_or_null,
                                       const char* path);

rgd_status rgd_report_write_history_csv(const rgd_report* r, const char* path);

rgd_status rgd_report_write_summary_json(const rgd_report* r, const char* path);

/* JSON manifest plus raw little-endian float64 blob. Unavailable for the
 * MLP baseline report only if training never ran. */
rgd_status rgd_report_write_checkpoint(const rgd_report* r,
                                       const char* json_path,
                                       const char* blob_path);

void rgd_report_free(rgd_report* r);

/* ---- metrics on raw arrays ------------------------------------------ */

rgd_status rgd_auc(const double* scores, const uint8_t* labels, size_t n,
                   double* out);

rgd_status rgd_ap(const double* scores, const uint8_t* labels, size_t n,
                  double* out);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* RANDGAD_H */
