#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "errors.hpp"
#include "inject.hpp"
#include "metrics.hpp"
#include "report.hpp"
#include "support.hpp"
#include "trainer.hpp"

using namespace randgad;
using namespace testsupport;

namespace {

// O(n^2) pairwise oracle: P(anomaly outscores normal), ties at 0.5.
double auc_pairwise_oracle(std::span<const double> scores,
                           std::span<const std::uint8_t> labels) {
    double wins = 0.0;
    std::size_t pairs = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (!labels[i]) continue;
        for (std::size_t j = 0; j < scores.size(); ++j) {
            if (labels[j]) continue;
            ++pairs;
            if (scores[i] > scores[j])
                wins += 1.0;
            else if (scores[i] == scores[j])
                wins += 0.5;
        }
    }
    return wins / double(pairs);
}

TrainConfig small_config(std::uint64_t seed, std::size_t epochs = 30) {
    TrainConfig cfg;
    cfg.epochs = epochs;
    cfg.learning_rate = 5e-3;
    cfg.seed = seed;
    cfg.model.embedding = 8;
    cfg.model.mask_rate = 0.03;
    cfg.model.alpha = 0.5;
    cfg.pool.knn_k = 5;
    cfg.pool.ppr_top = 5;
    cfg.pool.sample_size = 8;
    cfg.bandit.update_interval = 2;
    return cfg;
}

Graph injected_cluster_graph(std::uint64_t seed, std::size_t n = 300,
                             std::size_t d = 16) {
    Rng rng(seed);
    Graph g = make_clustered_graph(rng, n, d, 5);
    InjectionConfig cfg;
    cfg.clique_size = 5;
    cfg.clique_count = 2;
    cfg.attr_count = 10;
    cfg.candidate_pool = 30;
    cfg.seed = seed ^ 0xabcdefULL;
    return inject_anomalies(g, cfg).graph;
}

}  // namespace

TEST_CASE("auc basics and oracle equality") {
    SUBCASE("labels as scores give a perfect ranking") {
        std::vector<double> scores{0, 1, 0, 1, 0};
        std::vector<std::uint8_t> labels{0, 1, 0, 1, 0};
        CHECK(auc(scores, labels) == 1.0);
    }
    SUBCASE("all-equal scores give exactly one half") {
        std::vector<double> scores(20, 3.5);
        std::vector<std::uint8_t> labels(20, 0);
        labels[3] = labels[7] = 1;
        CHECK(auc(scores, labels) == 0.5);
    }
    SUBCASE("matches the pairwise oracle exactly on random data with ties") {
        Rng rng(5);
        for (int rep = 0; rep < 20; ++rep) {
            const std::size_t n = 50 + rng.below(151);
            std::vector<double> scores(n);
            std::vector<std::uint8_t> labels(n, 0);
            for (auto& s : scores)
                s = double(rng.below(12));  // heavy ties on purpose
            std::size_t pos = 1 + rng.below(n / 3);
            for (std::size_t i = 0; i < pos; ++i) labels[rng.below(n)] = 1;
            std::size_t actual = 0;
            for (auto l : labels) actual += l;
            if (actual == 0 || actual == n) continue;
            CHECK(auc(scores, labels) == auc_pairwise_oracle(scores, labels));
        }
    }
    SUBCASE("single-class labels are rejected") {
        std::vector<double> scores{1, 2, 3};
        std::vector<std::uint8_t> zeros{0, 0, 0};
        std::vector<std::uint8_t> ones{1, 1, 1};
        CHECK_THROWS_AS(auc(scores, zeros), NumericError);
        CHECK_THROWS_AS(auc(scores, ones), NumericError);
    }
}

TEST_CASE("average precision") {
    SUBCASE("perfect ranking scores 1") {
        std::vector<double> scores(100);
        std::vector<std::uint8_t> labels(100, 0);
        for (std::size_t i = 0; i < 100; ++i) scores[i] = double(100 - i);
        for (std::size_t i = 0; i < 10; ++i) labels[i] = 1;
        CHECK(average_precision(scores, labels) == doctest::Approx(1.0));
    }
    SUBCASE("single anomaly ranked first scores 1") {
        std::vector<double> scores{9.0, 1.0, 2.0, 3.0};
        std::vector<std::uint8_t> labels{1, 0, 0, 0};
        CHECK(average_precision(scores, labels) == doctest::Approx(1.0));
    }
    SUBCASE("worst ranking gives rho-ish precision at the tail") {
        std::vector<double> scores{4, 3, 2, 1};
        std::vector<std::uint8_t> labels{0, 0, 0, 1};
        CHECK(average_precision(scores, labels) == doctest::Approx(0.25));
    }
    SUBCASE("random scores average to the anomaly rate (3 sigma)") {
        Rng rng(7);
        const std::size_t n = 400, positives = 40;
        const double rho = double(positives) / double(n);
        const int trials = 300;
        double sum = 0.0, sumsq = 0.0;
        for (int t = 0; t < trials; ++t) {
            std::vector<double> scores(n);
            for (auto& s : scores) s = rng.next_unit();
            std::vector<std::uint8_t> labels(n, 0);
            auto picks = rng.sample_without_replacement(n, positives);
            for (auto p : picks) labels[p] = 1;
            const double ap = average_precision(scores, labels);
            sum += ap;
            sumsq += ap * ap;
        }
        const double mean = sum / trials;
        const double var = sumsq / trials - mean * mean;
        const double sigma_mean = std::sqrt(var / trials);
        // Finite-sample E[AP] sits slightly above rho; allow that bias
        // inside the band.
        CHECK(std::abs(mean - rho) <= 3.0 * sigma_mean + 0.01);
    }
    SUBCASE("ties break deterministically by node index") {
        std::vector<double> scores{1.0, 1.0, 1.0};
        std::vector<std::uint8_t> labels{1, 0, 1};
        // order 0,1,2: hits at ranks 1 and 3 -> (1/1 + 2/3)/2
        CHECK(average_precision(scores, labels) ==
              doctest::Approx((1.0 + 2.0 / 3.0) / 2.0));
    }
}

TEST_CASE("warm-up-only training keeps the bandit uniform") {
    Graph g = injected_cluster_graph(11, 80, 8);
    TrainConfig cfg = small_config(1, 3);
    cfg.bandit.warmup = 3;
    auto res = train(g, cfg);
    REQUIRE(res.report.history.size() == 3);
    for (const auto& row : res.report.history) {
        for (double p : row.probs) CHECK(p == doctest::Approx(0.25));
        for (double r : row.rewards) CHECK(r == 0.0);
    }
}

TEST_CASE("training is deterministic given the seed") {
    Graph g = injected_cluster_graph(13, 100, 8);
    TrainConfig cfg = small_config(42, 10);
    auto a = train(g, cfg);
    auto b = train(g, cfg);
    CHECK(a.report.scores == b.report.scores);  // bit-identical
    CHECK(a.params.enc1.value.v == b.params.enc1.value.v);
    CHECK(a.report.final_mask == b.report.final_mask);

    cfg.seed = 43;
    auto c = train(g, cfg);
    CHECK(a.report.scores != c.report.scores);
}

TEST_CASE("history bookkeeping: length, simplex rows, wall clock") {
    Graph g = injected_cluster_graph(17, 90, 8);
    TrainConfig cfg = small_config(7, 12);
    auto res = train(g, cfg);
    REQUIRE(res.report.history.size() == cfg.epochs);
    for (const auto& row : res.report.history) {
        double sum = 0.0;
        for (double p : row.probs) {
            CHECK(p >= cfg.bandit.p_min - 1e-12);
            sum += p;
        }
        CHECK(std::abs(sum - 1.0) <= 1e-9);
        CHECK(row.wall_ms >= 0.0);
    }
    CHECK(res.report.has_metrics);
    CHECK(res.report.auc >= 0.0);
    CHECK(res.report.auc <= 1.0);
}

TEST_CASE("detection beats chance and the frozen-bandit ablation on average") {
    // Paired 5-seed comparison on injected attribute-clustered graphs.
    double full_sum = 0.0, frozen_sum = 0.0;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        Graph g = injected_cluster_graph(100 + seed);
        TrainConfig cfg = small_config(seed, 100);
        auto full = train(g, cfg);
        cfg.freeze_bandit = true;
        auto frozen = train(g, cfg);
        full_sum += full.report.auc;
        frozen_sum += frozen.report.auc;
    }
    const double full_mean = full_sum / 5.0;
    const double frozen_mean = frozen_sum / 5.0;
    MESSAGE("full=", full_mean, " frozen=", frozen_mean);
    CHECK(full_mean > 0.5);
    CHECK(full_mean > frozen_mean);
}

TEST_CASE("evaluate reports metrics and beats the untrained model") {
    Graph g = injected_cluster_graph(23, 150, 12);
    TrainConfig cfg = small_config(3, 60);

    auto trained = train(g, cfg);
    Rng prng = Rng::substream(999, "init");
    ModelParams fresh = ModelParams::init(g.attr_dim(), cfg.model, prng);
    auto fresh_report = evaluate(g, fresh, cfg);
    CHECK(trained.report.auc > fresh_report.auc);

    SUBCASE("evaluate requires labels") {
        Graph unlabeled = g.without_labels();
        CHECK_THROWS_AS(evaluate(unlabeled, fresh, cfg), ArgumentError);
    }
    SUBCASE("all-zero labels surface the undefined-metric error") {
        Graph zeros = g.with_labels(std::vector<std::uint8_t>(g.node_count(), 0));
        CHECK_THROWS_AS(evaluate(zeros, fresh, cfg), NumericError);
    }
}

TEST_CASE("NaN loss aborts with epoch context and last-good parameters") {
    Graph g = injected_cluster_graph(29, 60, 6);
    TrainConfig cfg = small_config(5, 20);
    cfg.learning_rate = 1e80;  // guaranteed overflow within a few steps
    try {
        train(g, cfg);
        FAIL("expected TrainAbortError");
    } catch (const TrainAbortError& e) {
        CHECK(e.epoch >= 1);
        CHECK(e.last_good != nullptr);
        CHECK(std::string(e.what()).find("epoch") != std::string::npos);
    }
}

TEST_CASE("mlp autoencoder baseline runs and scores") {
    Graph g = injected_cluster_graph(31, 120, 10);
    TrainConfig cfg = small_config(9, 40);
    auto res = train_mlp_autoencoder(g, cfg);
    CHECK(res.report.scores.size() == g.node_count());
    CHECK(res.report.has_metrics);
    CHECK(res.report.auc > 0.0);
    CHECK(res.params.size() == 4);
}

TEST_CASE("report files: scores csv, history csv, summary json") {
    Graph g = injected_cluster_graph(37, 70, 6);
    TrainConfig cfg = small_config(2, 8);
    auto res = train(g, cfg);

    TempDir dir("report");
    write_scores_csv(res.report, &g, dir.file("scores.csv"));
    write_history_csv(res.report, dir.file("history.csv"));

    const auto scores_text = read_file(dir.file("scores.csv"));
    std::size_t lines = std::count(scores_text.begin(), scores_text.end(), '\n');
    CHECK(lines == g.node_count() + 1);  // header + rows

    const auto hist_text = read_file(dir.file("history.csv"));
    lines = std::count(hist_text.begin(), hist_text.end(), '\n');
    CHECK(lines == cfg.epochs + 1);

    auto j = summary_json(res.report, cfg);
    CHECK(j.at("auc").get<double>() == doctest::Approx(res.report.auc));
    CHECK(j.at("seed").get<std::uint64_t>() == cfg.seed);
    CHECK(j.at("config").at("model").at("alpha").get<double>() ==
          doctest::Approx(cfg.model.alpha));
}

TEST_CASE("per-epoch wall clock scales like the quadratic decoder bound") {
    // Log-log slope of epoch time across doubling n must stay below 2.3.
    std::vector<std::size_t> sizes{500, 1000, 2000, 4000};
    std::vector<double> times;
    for (std::size_t n : sizes) {
        Rng rng(n);
        Graph g = make_clustered_graph(rng, n, 8, 6);
        TrainConfig cfg = small_config(1, 3);
        cfg.model.embedding = 8;
        cfg.pool.sample_size = 8;
        cfg.bandit.warmup = 1;
        cfg.bandit.update_interval = 1;
        auto res = train(g, cfg);
        double best = res.report.history.front().wall_ms;
        for (const auto& row : res.report.history)
            best = std::min(best, row.wall_ms);
        times.push_back(best);
    }
    // Least-squares slope in log-log space.
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < sizes.size(); ++i) {
        const double x = std::log(double(sizes[i]));
        const double y = std::log(std::max(times[i], 1e-3));
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double k = double(sizes.size());
    const double slope = (k * sxy - sx * sy) / (k * sxx - sx * sx);
    MESSAGE("epoch times ms: ", times[0], " ", times[1], " ", times[2], " ",
            times[3], " slope=", slope);
    CHECK(slope <= 2.3);
}
