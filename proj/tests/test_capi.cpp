// Exercises the shared library strictly through the public C header.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <unistd.h>

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "randgad.h"

namespace fs = std::filesystem;

namespace {

struct Workdir {
    fs::path path;
    Workdir() {
        path = fs::temp_directory_path() /
               ("randgad_capi_" + std::to_string(::getpid()));
        fs::create_directories(path);
    }
    ~Workdir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
    std::string file(const std::string& name) const {
        return (path / name).string();
    }
};

// xorshift64 keeps the fixture deterministic without reaching into the
// library internals.
struct MiniRng {
    std::uint64_t s = 0x9e3779b97f4a7c15ULL;
    double unit() {
        s ^= s << 13;
        s ^= s >> 7;
        s ^= s << 17;
        return double(s >> 11) * 0x1.0p-53;
    }
};

// Two attribute clusters joined by a thin bridge.
void write_fixture(const Workdir& dir, std::size_t n = 60) {
    MiniRng rng;
    std::ofstream edges(dir.file("edges.txt"));
    for (std::size_t i = 0; i + 1 < n; ++i)
        if ((i + 1) % (n / 2) != 0) edges << i << ' ' << i + 1 << '\n';
    for (std::size_t i = 0; i + 4 < n; i += 3) edges << i << ' ' << i + 4 << '\n';
    edges << 0 << ' ' << n / 2 << '\n';

    std::ofstream attrs(dir.file("attrs.csv"));
    for (std::size_t i = 0; i < n; ++i) {
        const double base = i < n / 2 ? 1.0 : -1.0;
        for (std::size_t j = 0; j < 6; ++j)
            attrs << (j ? "," : "")
                  << base + 0.2 * (rng.unit() - 0.5);
        attrs << '\n';
    }
}

rgd_graph* load_fixture(const Workdir& dir, bool with_labels = false) {
    rgd_graph* g = nullptr;
    REQUIRE(rgd_graph_load(dir.file("edges.txt").c_str(),
                           dir.file("attrs.csv").c_str(),
                           with_labels ? dir.file("labels.txt").c_str() : nullptr,
                           &g) == RGD_OK);
    return g;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), {});
}

}  // namespace

TEST_CASE("version and error text are always available") {
    CHECK(std::string(rgd_version()).find("randgad") != std::string::npos);
    CHECK(rgd_last_error() != nullptr);
}

TEST_CASE("loading a missing file reports a data error with a message") {
    rgd_graph* g = nullptr;
    CHECK(rgd_graph_load("/nonexistent/e.txt", "/nonexistent/a.csv", nullptr,
                         &g) == RGD_ERR_DATA);
    CHECK(g == nullptr);
    CHECK(std::string(rgd_last_error()).size() > 0);
}

TEST_CASE("null arguments are argument errors") {
    CHECK(rgd_graph_load(nullptr, nullptr, nullptr, nullptr) ==
          RGD_ERR_ARGUMENT);
    CHECK(rgd_inject(nullptr, nullptr, nullptr) == RGD_ERR_ARGUMENT);
    CHECK(rgd_train(nullptr, nullptr, nullptr) == RGD_ERR_ARGUMENT);
}

TEST_CASE("graph load, info, save round-trip") {
    Workdir dir;
    write_fixture(dir);
    rgd_graph* g = load_fixture(dir);

    uint64_t nodes = 0, d = 0, edges = 0, anomalies = 0;
    REQUIRE(rgd_graph_info(g, &nodes, &d, &edges, &anomalies) == RGD_OK);
    CHECK(nodes == 60);
    CHECK(d == 6);
    CHECK(edges > 0);
    CHECK(anomalies == 0);

    REQUIRE(rgd_graph_save(g, dir.file("e2.txt").c_str(),
                           dir.file("a2.csv").c_str(), nullptr, 0) == RGD_OK);
    rgd_graph* g2 = nullptr;
    REQUIRE(rgd_graph_load(dir.file("e2.txt").c_str(), dir.file("a2.csv").c_str(),
                           nullptr, &g2) == RGD_OK);
    uint64_t nodes2 = 0, edges2 = 0;
    rgd_graph_info(g2, &nodes2, nullptr, &edges2, nullptr);
    CHECK(nodes2 == nodes);
    CHECK(edges2 == edges);
    rgd_graph_free(g2);
    rgd_graph_free(g);
}

TEST_CASE("injection through the API produces the requested anomalies") {
    Workdir dir;
    write_fixture(dir);
    rgd_graph* g = load_fixture(dir);

    rgd_inject_config cfg;
    rgd_inject_config_defaults(&cfg);
    CHECK(cfg.clique_size == 15);  // paper defaults
    CHECK(cfg.candidate_pool == 50);
    cfg.clique_size = 4;
    cfg.clique_count = 2;
    cfg.attr_count = 5;
    cfg.candidate_pool = 20;
    cfg.seed = 7;

    rgd_graph* injected = nullptr;
    REQUIRE(rgd_inject(g, &cfg, &injected) == RGD_OK);
    uint64_t anomalies = 0;
    rgd_graph_info(injected, nullptr, nullptr, nullptr, &anomalies);
    CHECK(anomalies == 13);

    SUBCASE("capacity errors map to their status") {
        rgd_inject_config big = cfg;
        big.clique_size = 30;
        big.clique_count = 3;
        rgd_graph* out = nullptr;
        CHECK(rgd_inject(g, &big, &out) == RGD_ERR_CAPACITY);
    }
    rgd_graph_free(injected);
    rgd_graph_free(g);
}

TEST_CASE("pool dump writes all four strategy tables") {
    Workdir dir;
    write_fixture(dir);
    rgd_graph* g = load_fixture(dir);
    rgd_pool_config cfg;
    rgd_pool_config_defaults(&cfg);
    cfg.knn_k = 3;
    cfg.ppr_top = 3;
    REQUIRE(rgd_pool_dump(g, &cfg, 1, dir.file("pool.tsv").c_str()) == RGD_OK);
    const auto text = slurp(dir.file("pool.tsv"));
    CHECK(text.find("0\t") == 0);
    CHECK(text.find("\n3\t") != std::string::npos);  // strategy ids 0..3
    rgd_graph_free(g);
}

TEST_CASE("training, reports and determinism through the API") {
    Workdir dir;
    write_fixture(dir);
    rgd_graph* base = load_fixture(dir);

    rgd_inject_config icfg;
    rgd_inject_config_defaults(&icfg);
    icfg.clique_size = 4;
    icfg.clique_count = 2;
    icfg.attr_count = 4;
    icfg.candidate_pool = 20;
    icfg.seed = 3;
    rgd_graph* g = nullptr;
    REQUIRE(rgd_inject(base, &icfg, &g) == RGD_OK);

    rgd_train_config cfg;
    rgd_train_config_defaults(&cfg);
    CHECK(cfg.p_min == 0.05);
    CHECK(cfg.warmup == 3);
    CHECK(cfg.pool.sample_size == 20);
    cfg.epochs = 12;
    cfg.embedding = 6;
    cfg.seed = 11;
    cfg.pool.knn_k = 4;
    cfg.pool.ppr_top = 4;
    cfg.pool.sample_size = 6;

    rgd_report* r1 = nullptr;
    REQUIRE(rgd_train(g, &cfg, &r1) == RGD_OK);

    const double* scores = nullptr;
    size_t count = 0;
    REQUIRE(rgd_report_scores(r1, &scores, &count) == RGD_OK);
    CHECK(count == 60);

    double auc_v = 0, ap_v = 0;
    REQUIRE(rgd_report_metrics(r1, &auc_v, &ap_v) == RGD_OK);
    CHECK(auc_v >= 0.0);
    CHECK(auc_v <= 1.0);
    CHECK(ap_v > 0.0);

    double masked_frac = 0, global_frac = 0;
    REQUIRE(rgd_report_mask_stats(r1, g, &masked_frac, &global_frac) == RGD_OK);
    CHECK(global_frac == doctest::Approx(12.0 / 60.0));

    REQUIRE(rgd_report_write_scores_csv(r1, g, dir.file("s1.csv").c_str()) ==
            RGD_OK);
    REQUIRE(rgd_report_write_history_csv(r1, dir.file("h1.csv").c_str()) ==
            RGD_OK);
    REQUIRE(rgd_report_write_summary_json(r1, dir.file("sum1.json").c_str()) ==
            RGD_OK);
    REQUIRE(rgd_report_write_checkpoint(r1, dir.file("ck.json").c_str(),
                                        dir.file("ck.bin").c_str()) == RGD_OK);
    CHECK(slurp(dir.file("ck.json")).find("encoder1") != std::string::npos);

    // Same config, fresh run: bit-identical score CSV.
    rgd_report* r2 = nullptr;
    REQUIRE(rgd_train(g, &cfg, &r2) == RGD_OK);
    REQUIRE(rgd_report_write_scores_csv(r2, g, dir.file("s2.csv").c_str()) ==
            RGD_OK);
    CHECK(slurp(dir.file("s1.csv")) == slurp(dir.file("s2.csv")));

    SUBCASE("metrics are unavailable without labels") {
        rgd_report* r3 = nullptr;
        REQUIRE(rgd_train(base, &cfg, &r3) == RGD_OK);
        double a = 0, p = 0;
        CHECK(rgd_report_metrics(r3, &a, &p) == RGD_ERR_DATA);
        rgd_report_free(r3);
    }
    SUBCASE("mlp autoencoder baseline arch") {
        rgd_train_config bl = cfg;
        bl.arch = 1;
        bl.epochs = 6;
        rgd_report* r3 = nullptr;
        REQUIRE(rgd_train(g, &bl, &r3) == RGD_OK);
        const double* s = nullptr;
        size_t c = 0;
        REQUIRE(rgd_report_scores(r3, &s, &c) == RGD_OK);
        CHECK(c == 60);
        REQUIRE(rgd_report_write_checkpoint(r3, dir.file("bl.json").c_str(),
                                            dir.file("bl.bin").c_str()) == RGD_OK);
        rgd_report_free(r3);
    }

    rgd_report_free(r1);
    rgd_report_free(r2);
    rgd_graph_free(g);
    rgd_graph_free(base);
}

TEST_CASE("array metrics: auc, ap, and error contracts") {
    std::vector<double> scores{0.9, 0.1, 0.8, 0.2};
    std::vector<std::uint8_t> labels{1, 0, 1, 0};
    double v = 0;
    REQUIRE(rgd_auc(scores.data(), labels.data(), 4, &v) == RGD_OK);
    CHECK(v == 1.0);
    REQUIRE(rgd_ap(scores.data(), labels.data(), 4, &v) == RGD_OK);
    CHECK(v == 1.0);

    std::vector<std::uint8_t> flat{0, 0, 0, 0};
    CHECK(rgd_auc(scores.data(), flat.data(), 4, &v) == RGD_ERR_NUMERIC);
    CHECK(rgd_auc(nullptr, labels.data(), 4, &v) == RGD_ERR_ARGUMENT);
}

TEST_CASE("train config validation propagates as argument errors") {
    Workdir dir;
    write_fixture(dir);
    rgd_graph* g = load_fixture(dir);
    rgd_train_config cfg;
    rgd_train_config_defaults(&cfg);
    cfg.epochs = 0;
    rgd_report* r = nullptr;
    CHECK(rgd_train(g, &cfg, &r) == RGD_ERR_ARGUMENT);
    rgd_graph_free(g);
}
