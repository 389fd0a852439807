// Command-line front end for the randgad shared library. Only the public C
// API is used here; all heavy lifting happens behind the library boundary.

#include <CLI11.hpp>
#include <json.hpp>

#include <atomic>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "randgad.h"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitArgument = 2;
constexpr int kExitData = 3;
constexpr int kExitNumeric = 4;
constexpr int kExitInternal = 1;

int exit_code_for(rgd_status s) {
    switch (s) {
        case RGD_OK: return kExitOk;
        case RGD_ERR_ARGUMENT: return kExitArgument;
        case RGD_ERR_CAPACITY: return kExitArgument;
        case RGD_ERR_DATA: return kExitData;
        case RGD_ERR_NUMERIC: return kExitNumeric;
        default: return kExitInternal;
    }
}

[[noreturn]] void fail(rgd_status s, const std::string& context) {
    std::cerr << "error: " << context << ": " << rgd_last_error() << "\n";
    std::exit(exit_code_for(s));
}

void check(rgd_status s, const std::string& context) {
    if (s != RGD_OK) fail(s, context);
}

std::size_t env_thread_cap() {
    if (const char* v = std::getenv("RAND_GAD_THREADS")) {
        char* end = nullptr;
        const auto n = std::strtoull(v, &end, 10);
        if (end && *end == '\0' && n > 0) return std::size_t(n);
    }
    return 0;  // no cap
}

std::size_t apply_thread_cap(std::size_t requested) {
    const std::size_t cap = env_thread_cap();
    if (cap == 0) return requested;
    if (requested == 0) return cap;
    return std::min(requested, cap);
}

std::string file_digest(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        std::cerr << "error: cannot read " << path << " for digest\n";
        std::exit(kExitData);
    }
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

struct InputFiles {
    std::string edges;
    std::string attrs;
    std::string labels;  // empty = none
};

json inputs_json(const InputFiles& in) {
    json j;
    j["edges"] = {{"path", in.edges}, {"digest", file_digest(in.edges)}};
    j["attrs"] = {{"path", in.attrs}, {"digest", file_digest(in.attrs)}};
    if (!in.labels.empty())
        j["labels"] = {{"path", in.labels}, {"digest", file_digest(in.labels)}};
    return j;
}

void write_manifest(const fs::path& out_dir, const std::string& subcommand,
                    const InputFiles& inputs, const json& config,
                    std::uint64_t seed) {
    json j;
    j["version"] = rgd_version();
    j["subcommand"] = subcommand;
    j["inputs"] = inputs_json(inputs);
    j["output_dir"] = out_dir.string();
    j["config"] = config;
    j["seed"] = seed;
    std::ofstream out(out_dir / "manifest.json");
    if (!out) {
        std::cerr << "error: cannot write manifest in " << out_dir << "\n";
        std::exit(kExitData);
    }
    out << j.dump(2) << '\n';
}

rgd_graph* load_graph_or_die(const InputFiles& in) {
    rgd_graph* g = nullptr;
    check(rgd_graph_load(in.edges.c_str(), in.attrs.c_str(),
                         in.labels.empty() ? nullptr : in.labels.c_str(), &g),
          "loading graph");
    return g;
}

json pool_config_json(const rgd_pool_config& p) {
    return json{{"knn_k", p.knn_k},        {"teleport", p.teleport},
                {"ppr_top", p.ppr_top},    {"ppr_tol", p.ppr_tol},
                {"two_hop_cap", p.two_hop_cap},
                {"sample_size", p.sample_size},
                {"threads", p.threads}};
}

json train_config_json(const rgd_train_config& c) {
    json j;
    j["epochs"] = c.epochs;
    j["learning_rate"] = c.learning_rate;
    j["seed"] = c.seed;
    j["embedding"] = c.embedding;
    j["mask_rate"] = c.mask_rate;
    j["alpha"] = c.alpha;
    j["lambda"] = c.lambda;
    j["attr_decoder"] = c.attr_decoder == 0 ? "graph-conv" : "mlp2";
    j["p_min"] = c.p_min;
    j["delta1"] = c.delta1;
    j["delta2"] = c.delta2;
    j["update_interval"] = c.update_interval;
    j["warmup"] = c.warmup;
    j["score_epsilon"] = c.score_epsilon;
    j["exploration_bonus"] = c.exploration_bonus;
    j["freeze_bandit"] = c.freeze_bandit != 0;
    j["arch"] = c.arch == 0 ? "rand" : "mlpae";
    j["pool"] = pool_config_json(c.pool);
    return j;
}

// Shared flag wiring for train-like subcommands.
void add_train_options(CLI::App* cmd, rgd_train_config& cfg) {
    cmd->add_option("--epochs", cfg.epochs, "training epochs");
    cmd->add_option("--lr", cfg.learning_rate, "Adam learning rate");
    cmd->add_option("--seed", cfg.seed, "run seed");
    cmd->add_option("--embedding", cfg.embedding, "embedding size");
    cmd->add_option("--mask-rate", cfg.mask_rate, "center-node mask rate");
    cmd->add_option("--alpha", cfg.alpha,
                    "attribute-vs-topology score blend in [0,1]");
    cmd->add_option("--lambda", cfg.lambda, "L2 regularizer coefficient");
    cmd->add_option("--decoder", cfg.attr_decoder,
                    "attribute decoder: 0 graph-conv, 1 two-layer MLP");
    cmd->add_option("--p-min", cfg.p_min, "strategy probability floor");
    cmd->add_option("--delta1", cfg.delta1, "bandit update scale");
    cmd->add_option("--delta2", cfg.delta2, "bandit confidence parameter");
    cmd->add_option("--update-interval", cfg.update_interval,
                    "epochs between bandit updates (T)");
    cmd->add_option("--warmup", cfg.warmup, "warm-up epochs before rewards (U)");
    cmd->add_option("--score-epsilon", cfg.score_epsilon,
                    "consistency softmax smoothing");
    cmd->add_option("--exploration-bonus", cfg.exploration_bonus,
                    "coefficient on the 1/p weight-update term");
    cmd->add_flag("--freeze-bandit", cfg.freeze_bandit,
                  "keep strategy probabilities uniform (ablation)");
    cmd->add_option("--arch", cfg.arch, "0 full model, 1 MLP autoencoder baseline");
    cmd->add_option("--sample-size", cfg.pool.sample_size,
                    "neighborhood sample budget M");
    cmd->add_option("--knn-k", cfg.pool.knn_k, "KNN strategy list length");
    cmd->add_option("--teleport", cfg.pool.teleport, "PPR teleport probability");
    cmd->add_option("--ppr-top", cfg.pool.ppr_top, "PPR strategy list length");
    cmd->add_option("--ppr-tol", cfg.pool.ppr_tol, "PPR L1 tolerance");
    cmd->add_option("--two-hop-cap", cfg.pool.two_hop_cap,
                    "two-hop strategy list cap");
    cmd->add_option("--threads", cfg.pool.threads,
                    "pool build workers (0 = auto)");
}

struct TrainOutputs {
    double auc = -1.0;
    double ap = -1.0;
    bool has_metrics = false;
};

TrainOutputs run_train_to_dir(const rgd_graph* g, rgd_train_config cfg,
                              const fs::path& out_dir, bool graph_has_labels) {
    fs::create_directories(out_dir);
    rgd_report* report = nullptr;
    check(rgd_train(g, &cfg, &report), "training");

    check(rgd_report_write_scores_csv(report, graph_has_labels ? g : nullptr,
                                      (out_dir / "scores.csv").string().c_str()),
          "writing scores");
    check(rgd_report_write_history_csv(
              report, (out_dir / "history.csv").string().c_str()),
          "writing history");
    check(rgd_report_write_summary_json(
              report, (out_dir / "summary.json").string().c_str()),
          "writing summary");
    check(rgd_report_write_checkpoint(
              report, (out_dir / "checkpoint.json").string().c_str(),
              (out_dir / "checkpoint.bin").string().c_str()),
          "writing checkpoint");

    TrainOutputs out;
    double auc_v = 0.0, ap_v = 0.0;
    if (rgd_report_metrics(report, &auc_v, &ap_v) == RGD_OK) {
        out.has_metrics = true;
        out.auc = auc_v;
        out.ap = ap_v;
    }
    rgd_report_free(report);
    return out;
}

struct SweepSpec {
    std::string param;
    double start = 0.0;
    double stop = 0.0;
    double step = 0.0;
};

SweepSpec parse_sweep(const std::string& text) {
    const auto eq = text.find('=');
    const auto c1 = text.find(':', eq);
    const auto c2 = text.find(':', c1 + 1);
    if (eq == std::string::npos || c1 == std::string::npos ||
        c2 == std::string::npos) {
        std::cerr << "error: sweep spec must look like alpha=0:1:0.1\n";
        std::exit(kExitArgument);
    }
    SweepSpec s;
    s.param = text.substr(0, eq);
    try {
        s.start = std::stod(text.substr(eq + 1, c1 - eq - 1));
        s.stop = std::stod(text.substr(c1 + 1, c2 - c1 - 1));
        s.step = std::stod(text.substr(c2 + 1));
    } catch (const std::exception&) {
        std::cerr << "error: bad number in sweep spec\n";
        std::exit(kExitArgument);
    }
    if (s.step <= 0.0 || s.stop < s.start) {
        std::cerr << "error: sweep requires step > 0 and stop >= start\n";
        std::exit(kExitArgument);
    }
    return s;
}

void apply_sweep_value(rgd_train_config& cfg, const std::string& param,
                       double value) {
    if (param == "alpha")
        cfg.alpha = value;
    else if (param == "lr")
        cfg.learning_rate = value;
    else if (param == "mask-rate")
        cfg.mask_rate = value;
    else if (param == "lambda")
        cfg.lambda = value;
    else {
        std::cerr << "error: unsupported sweep parameter '" << param
                  << "' (alpha, lr, mask-rate, lambda)\n";
        std::exit(kExitArgument);
    }
}

std::vector<double> read_scores_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        std::cerr << "error: cannot open scores file " << path << "\n";
        std::exit(kExitData);
    }
    std::vector<double> scores;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (line.empty() || line.find_first_not_of(" \t\r") == std::string::npos)
            continue;
        std::string field = line;
        const auto comma = line.find(',');
        if (comma != std::string::npos) {
            const auto second = line.substr(comma + 1);
            const auto next = second.find(',');
            field = next == std::string::npos ? second : second.substr(0, next);
        }
        try {
            scores.push_back(std::stod(field));
        } catch (const std::exception&) {
            if (first) {  // header row
                first = false;
                continue;
            }
            std::cerr << "error: bad score line '" << line << "'\n";
            std::exit(kExitData);
        }
        first = false;
    }
    return scores;
}

std::vector<std::uint8_t> read_labels_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        std::cerr << "error: cannot open labels file " << path << "\n";
        std::exit(kExitData);
    }
    std::vector<std::uint8_t> labels;
    std::string line;
    while (std::getline(in, line)) {
        const auto pos = line.find_first_not_of(" \t\r");
        if (pos == std::string::npos) continue;
        if (line[pos] != '0' && line[pos] != '1') {
            std::cerr << "error: labels must be 0/1\n";
            std::exit(kExitData);
        }
        labels.push_back(std::uint8_t(line[pos] - '0'));
    }
    return labels;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"randgad: reinforcement-selected neighborhoods for "
                 "unsupervised graph anomaly detection"};
    app.require_subcommand(1);
    app.set_config("--config", "", "flat key=value config file; flags override");
    app.set_version_flag("--version", rgd_version());

    InputFiles inputs;
    std::string out_dir = "out";

    // ---- inject ----
    auto* inject = app.add_subcommand(
        "inject", "inject clique and attribute-swap anomalies");
    rgd_inject_config inject_cfg;
    rgd_inject_config_defaults(&inject_cfg);
    bool inject_binary = false;
    inject->add_option("--edges", inputs.edges, "edge list file")->required();
    inject->add_option("--attrs", inputs.attrs, "attribute file")->required();
    inject->add_option("--labels", inputs.labels,
                       "existing label file (optional)");
    inject->add_option("--out", out_dir, "output directory");
    inject->add_option("--p", inject_cfg.clique_size, "clique size");
    inject->add_option("--q", inject_cfg.clique_count, "clique count");
    inject->add_option("--attr-count", inject_cfg.attr_count,
                       "attribute anomaly count");
    inject->add_option("--k", inject_cfg.candidate_pool,
                       "candidate pool per swap");
    inject->add_option("--seed", inject_cfg.seed, "injection seed");
    inject->add_flag("--binary-attrs", inject_binary,
                     "write attributes in the RANDATTR binary format");

    // ---- pool ----
    auto* pool = app.add_subcommand("pool", "dump the strategy tables as TSV");
    rgd_pool_config pool_cfg;
    rgd_pool_config_defaults(&pool_cfg);
    std::uint64_t pool_seed = 1;
    std::string pool_out = "pool.tsv";
    pool->add_option("--edges", inputs.edges, "edge list file")->required();
    pool->add_option("--attrs", inputs.attrs, "attribute file")->required();
    pool->add_option("--out", pool_out, "output TSV path");
    pool->add_option("--seed", pool_seed, "seed (KNN zero-norm fallback)");
    pool->add_option("--knn-k", pool_cfg.knn_k, "KNN list length");
    pool->add_option("--teleport", pool_cfg.teleport, "PPR teleport");
    pool->add_option("--ppr-top", pool_cfg.ppr_top, "PPR list length");
    pool->add_option("--ppr-tol", pool_cfg.ppr_tol, "PPR L1 tolerance");
    pool->add_option("--two-hop-cap", pool_cfg.two_hop_cap, "two-hop list cap");
    pool->add_option("--threads", pool_cfg.threads, "build workers (0 = auto)");

    // ---- train ----
    auto* train = app.add_subcommand("train", "train and score a graph");
    rgd_train_config train_cfg;
    rgd_train_config_defaults(&train_cfg);
    train->add_option("--edges", inputs.edges, "edge list file")->required();
    train->add_option("--attrs", inputs.attrs, "attribute file")->required();
    train->add_option("--labels", inputs.labels,
                      "label file (metrics only, never used in training)");
    train->add_option("--out", out_dir, "output directory");
    add_train_options(train, train_cfg);

    // ---- eval ----
    auto* eval = app.add_subcommand("eval", "compute AUC/AP from score files");
    std::string eval_scores, eval_labels, eval_json_out;
    eval->add_option("--scores", eval_scores, "scores file (csv or one per line)")
        ->required();
    eval->add_option("--labels", eval_labels, "label file (0/1 lines)")
        ->required();
    eval->add_option("--out", eval_json_out, "optional metrics JSON path");

    // ---- sweep ----
    auto* sweep = app.add_subcommand(
        "sweep", "run train over a parameter range, one run per value");
    rgd_train_config sweep_cfg;
    rgd_train_config_defaults(&sweep_cfg);
    std::string sweep_spec_text;
    std::size_t sweep_workers = 1;
    sweep->add_option("--edges", inputs.edges, "edge list file")->required();
    sweep->add_option("--attrs", inputs.attrs, "attribute file")->required();
    sweep->add_option("--labels", inputs.labels, "label file (metrics only)");
    sweep->add_option("--out", out_dir, "output directory");
    sweep->add_option("--param", sweep_spec_text, "range, e.g. alpha=0:1:0.1")
        ->required();
    sweep->add_option("--workers", sweep_workers,
                      "parallel runs (capped by RAND_GAD_THREADS)");
    add_train_options(sweep, sweep_cfg);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help / --version
        app.exit(e);
        return kExitArgument;
    }

    if (inject->parsed()) {
        rgd_graph* g = load_graph_or_die(inputs);
        rgd_graph* injected = nullptr;
        check(rgd_inject(g, &inject_cfg, &injected), "injecting anomalies");

        fs::create_directories(out_dir);
        const fs::path dir(out_dir);
        const std::string attr_name = inject_binary ? "attrs.bin" : "attrs.csv";
        check(rgd_graph_save(injected, (dir / "edges.txt").string().c_str(),
                             (dir / attr_name).string().c_str(),
                             (dir / "labels.txt").string().c_str(),
                             inject_binary ? 1 : 0),
              "saving injected graph");

        uint64_t nodes = 0, dim = 0, edges = 0, anomalies = 0;
        rgd_graph_info(injected, &nodes, &dim, &edges, &anomalies);
        json cfg_json{{"p", inject_cfg.clique_size},
                      {"q", inject_cfg.clique_count},
                      {"attr_count", inject_cfg.attr_count},
                      {"k", inject_cfg.candidate_pool},
                      {"seed", inject_cfg.seed},
                      {"binary_attrs", inject_binary},
                      {"anomalies", anomalies}};
        write_manifest(dir, "inject", inputs, cfg_json, inject_cfg.seed);
        std::cout << "injected " << anomalies << " anomalies into " << nodes
                  << " nodes (" << edges << " edges)\n";
        rgd_graph_free(injected);
        rgd_graph_free(g);
        return kExitOk;
    }

    if (pool->parsed()) {
        pool_cfg.threads = apply_thread_cap(pool_cfg.threads);
        rgd_graph* g = load_graph_or_die(inputs);
        check(rgd_pool_dump(g, &pool_cfg, pool_seed, pool_out.c_str()),
              "dumping pool tables");
        std::cout << "wrote " << pool_out << "\n";
        rgd_graph_free(g);
        return kExitOk;
    }

    if (train->parsed()) {
        train_cfg.pool.threads = apply_thread_cap(train_cfg.pool.threads);
        rgd_graph* g = load_graph_or_die(inputs);
        const fs::path dir(out_dir);
        fs::create_directories(dir);
        write_manifest(dir, "train", inputs, train_config_json(train_cfg),
                       train_cfg.seed);
        auto outputs =
            run_train_to_dir(g, train_cfg, dir, !inputs.labels.empty());
        if (outputs.has_metrics)
            std::cout << "auc=" << outputs.auc << " ap=" << outputs.ap << "\n";
        std::cout << "wrote " << (dir / "scores.csv").string() << "\n";
        rgd_graph_free(g);
        return kExitOk;
    }

    if (eval->parsed()) {
        const auto scores = read_scores_file(eval_scores);
        const auto labels = read_labels_file(eval_labels);
        if (scores.size() != labels.size()) {
            std::cerr << "error: " << scores.size() << " scores vs "
                      << labels.size() << " labels\n";
            return kExitData;
        }
        double auc_v = 0.0, ap_v = 0.0;
        check(rgd_auc(scores.data(), labels.data(), scores.size(), &auc_v),
              "computing AUC");
        check(rgd_ap(scores.data(), labels.data(), scores.size(), &ap_v),
              "computing AP");
        std::cout << "auc=" << auc_v << " ap=" << ap_v << "\n";
        if (!eval_json_out.empty()) {
            std::ofstream out(eval_json_out);
            if (!out) {
                std::cerr << "error: cannot write " << eval_json_out << "\n";
                return kExitData;
            }
            out << json{{"auc", auc_v}, {"ap", ap_v}, {"n", scores.size()}}
                       .dump(2)
                << '\n';
        }
        return kExitOk;
    }

    if (sweep->parsed()) {
        const SweepSpec spec = parse_sweep(sweep_spec_text);
        sweep_cfg.pool.threads = apply_thread_cap(sweep_cfg.pool.threads);
        sweep_workers = std::max<std::size_t>(1, apply_thread_cap(sweep_workers));

        std::vector<double> values;
        for (double v = spec.start; v <= spec.stop + 1e-12; v += spec.step)
            values.push_back(v);

        rgd_graph* g = load_graph_or_die(inputs);
        const fs::path dir(out_dir);
        fs::create_directories(dir);
        json cfg_json = train_config_json(sweep_cfg);
        cfg_json["sweep"] = {{"param", spec.param},
                             {"start", spec.start},
                             {"stop", spec.stop},
                             {"step", spec.step}};
        write_manifest(dir, "sweep", inputs, cfg_json, sweep_cfg.seed);

        std::atomic<std::size_t> next{0};
        std::atomic<bool> failed{false};
        auto worker = [&] {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= values.size() || failed.load()) return;
                rgd_train_config cfg = sweep_cfg;
                apply_sweep_value(cfg, spec.param, values[i]);
                char tag[64];
                std::snprintf(tag, sizeof tag, "%s_%g", spec.param.c_str(),
                              values[i]);
                run_train_to_dir(g, cfg, dir / tag, !inputs.labels.empty());
            }
        };
        std::vector<std::thread> threads;
        const std::size_t w = std::min(sweep_workers, values.size());
        for (std::size_t i = 0; i + 1 < w; ++i) threads.emplace_back(worker);
        worker();
        for (auto& t : threads) t.join();
        std::cout << "wrote " << values.size() << " runs under " << out_dir
                  << "\n";
        rgd_graph_free(g);
        return kExitOk;
    }

    return kExitArgument;
}
