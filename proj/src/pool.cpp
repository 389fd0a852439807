#include "pool.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <numeric>
#include <thread>

#include "errors.hpp"

namespace randgad {

namespace {

std::size_t worker_count(std::size_t requested, std::size_t jobs) {
    std::size_t hw = std::thread::hardware_concurrency();
    if (hw == 0) hw = 1;
    std::size_t t = requested == 0 ? hw : requested;
    return std::max<std::size_t>(1, std::min(t, jobs));
}

// Runs fn(begin, end) over [0, jobs) split into contiguous chunks.
void parallel_chunks(std::size_t jobs, std::size_t threads,
                     const std::function<void(std::size_t, std::size_t)>& fn) {
    const std::size_t t = worker_count(threads, jobs);
    if (t <= 1 || jobs < 2) {
        fn(0, jobs);
        return;
    }
    std::vector<std::thread> pool;
    const std::size_t chunk = (jobs + t - 1) / t;
    for (std::size_t w = 0; w < t; ++w) {
        const std::size_t lo = w * chunk;
        const std::size_t hi = std::min(jobs, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([&, lo, hi] { fn(lo, hi); });
    }
    for (auto& th : pool) th.join();
}

// Normalizes a candidate row in place to sum 1; rows are kept sorted by id.
void normalize_row(std::vector<std::pair<NodeId, double>>& row) {
    double s = 0.0;
    for (auto& [c, w] : row) s += w;
    if (s <= 0.0) return;
    for (auto& [c, w] : row) w /= s;
}

StrategyTable from_rows(std::vector<std::vector<std::pair<NodeId, double>>> rows) {
    StrategyTable t;
    t.offsets.assign(rows.size() + 1, 0);
    for (std::size_t i = 0; i < rows.size(); ++i)
        t.offsets[i + 1] = t.offsets[i] + std::int64_t(rows[i].size());
    t.cand.reserve(std::size_t(t.offsets.back()));
    t.weight.reserve(std::size_t(t.offsets.back()));
    for (auto& row : rows) {
        std::sort(row.begin(), row.end());
        for (auto& [c, w] : row) {
            t.cand.push_back(c);
            t.weight.push_back(w);
        }
    }
    return t;
}

}  // namespace

double StrategyTable::lookup(NodeId i, NodeId j) const {
    auto c = row_cand(std::size_t(i));
    auto it = std::lower_bound(c.begin(), c.end(), j);
    if (it == c.end() || *it != j) return 0.0;
    return row_weight(std::size_t(i))[std::size_t(it - c.begin())];
}

void StrategyTable::validate(std::size_t n) const {
    if (centers() != n) throw InternalError("StrategyTable: wrong center count");
    for (std::size_t i = 0; i < n; ++i) {
        auto c = row_cand(i);
        auto w = row_weight(i);
        double s = 0.0;
        for (std::size_t k = 0; k < c.size(); ++k) {
            if (c[k] == NodeId(i))
                throw InternalError("StrategyTable: center in own candidate list");
            if (k > 0 && c[k] <= c[k - 1])
                throw InternalError("StrategyTable: candidates not strictly sorted");
            if (w[k] < 0.0) throw InternalError("StrategyTable: negative weight");
            s += w[k];
        }
        if (!c.empty() && std::abs(s - 1.0) > 1e-9)
            throw InternalError("StrategyTable: row weights do not sum to 1");
    }
}

StrategyTable build_onehop(const Graph& g) {
    const auto& adj = g.adjacency();
    StrategyTable t;
    t.offsets = adj.offsets;
    t.cand = adj.neighbors;
    t.weight.resize(t.cand.size());
    for (std::size_t i = 0; i < adj.nodes; ++i) {
        const double deg = double(adj.degree(i));
        for (auto k = adj.offsets[i]; k < adj.offsets[i + 1]; ++k)
            t.weight[std::size_t(k)] = 1.0 / deg;
    }
    return t;
}

StrategyTable build_twohop(const Graph& g, std::size_t cap) {
    if (cap < 1) throw ArgumentError("build_twohop: cap must be positive");
    const auto p = normalized_adjacency(g, NormMode::RowStochastic, false);
    const auto p2 = spmm_power(p, 2);
    const auto& adj = g.adjacency();
    const std::size_t n = g.node_count();

    std::vector<std::vector<std::pair<NodeId, double>>> rows(n);
    for (std::size_t i = 0; i < n; ++i) {
        auto idx = p2.row_indices(i);
        auto val = p2.row_values(i);
        auto one_hop = adj.row(i);
        auto& row = rows[i];
        for (std::size_t k = 0; k < idx.size(); ++k) {
            const NodeId j = idx[k];
            if (j == NodeId(i)) continue;
            if (std::binary_search(one_hop.begin(), one_hop.end(), j)) continue;
            row.emplace_back(j, val[k]);
        }
        if (row.size() > cap) {
            // Keep the heaviest entries; ties resolve toward lower ids.
            std::nth_element(row.begin(), row.begin() + std::ptrdiff_t(cap) - 1,
                             row.end(), [](const auto& a, const auto& b) {
                                 return a.second != b.second
                                            ? a.second > b.second
                                            : a.first < b.first;
                             });
            row.resize(cap);
        }
        normalize_row(row);
    }
    return from_rows(std::move(rows));
}

StrategyTable build_knn(const Graph& g, std::size_t knn_k, std::uint64_t seed,
                        std::size_t threads) {
    const std::size_t n = g.node_count();
    if (knn_k < 1) throw ArgumentError("build_knn: knn_k must be positive");
    if (n > 0 && knn_k >= n)
        throw ArgumentError("build_knn: knn_k must be below node count");
    const std::size_t d = g.attr_dim();
    const auto& attrs = g.attributes();

    // Row-normalized attribute matrix; zero-norm rows stay zero and are
    // assigned random candidates afterwards.
    Eigen::MatrixXd xn(n, d);
    std::vector<std::uint8_t> zero_norm(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
        double sq = 0.0;
        for (std::size_t j = 0; j < d; ++j) sq += attrs.at(i, j) * attrs.at(i, j);
        if (sq == 0.0) {
            zero_norm[i] = 1;
            xn.row(Eigen::Index(i)).setZero();
            continue;
        }
        const double inv = 1.0 / std::sqrt(sq);
        for (std::size_t j = 0; j < d; ++j)
            xn(Eigen::Index(i), Eigen::Index(j)) = attrs.at(i, j) * inv;
    }

    std::vector<std::vector<std::pair<NodeId, double>>> rows(n);
    constexpr std::size_t kBlock = 256;
    const std::size_t blocks = (n + kBlock - 1) / kBlock;
    parallel_chunks(blocks, threads, [&](std::size_t b_lo, std::size_t b_hi) {
        Eigen::MatrixXd sims;
        for (std::size_t b = b_lo; b < b_hi; ++b) {
            const std::size_t lo = b * kBlock;
            const std::size_t hi = std::min(n, lo + kBlock);
            sims.noalias() =
                xn.middleRows(Eigen::Index(lo), Eigen::Index(hi - lo)) *
                xn.transpose();
            for (std::size_t i = lo; i < hi; ++i) {
                if (zero_norm[i]) continue;
                const auto& s = sims.row(Eigen::Index(i - lo));
                std::vector<NodeId> order(n);
                std::iota(order.begin(), order.end(), 0);
                order.erase(order.begin() + std::ptrdiff_t(i));
                const std::size_t k = std::min(knn_k, order.size());
                std::nth_element(order.begin(), order.begin() + std::ptrdiff_t(k) - 1,
                                 order.end(), [&](NodeId a, NodeId b2) {
                                     const double sa = s(Eigen::Index(a));
                                     const double sb = s(Eigen::Index(b2));
                                     return sa != sb ? sa > sb : a < b2;
                                 });
                auto& row = rows[i];
                row.reserve(k);
                double positive = 0.0;
                for (std::size_t r = 0; r < k; ++r) {
                    const double sim = s(Eigen::Index(order[r]));
                    const double w = std::max(sim, 0.0);
                    positive += w;
                    row.emplace_back(order[r], w);
                }
                if (positive <= 0.0)
                    for (auto& [c, w] : row) w = 1.0 / double(row.size());
                else
                    normalize_row(row);
            }
        }
    });

    // Deterministic fallback for zero-norm attribute rows.
    Rng rng = Rng::substream(seed, "knn-fallback");
    for (std::size_t i = 0; i < n; ++i) {
        if (!zero_norm[i] || n < 2) continue;
        const std::size_t k = std::min(knn_k, n - 1);
        auto picks = rng.sample_without_replacement(std::uint32_t(n - 1),
                                                    std::uint32_t(k));
        auto& row = rows[i];
        for (auto r : picks) {
            NodeId c = NodeId(r);
            if (c >= NodeId(i)) c = NodeId(r + 1);
            row.emplace_back(c, 1.0 / double(k));
        }
    }
    return from_rows(std::move(rows));
}

std::vector<double> ppr_vector(const Graph& g, NodeId seed, double teleport,
                               double tol) {
    if (teleport <= 0.0 || teleport >= 1.0)
        throw ArgumentError("ppr: teleport must lie in (0,1)");
    if (tol <= 0.0) throw ArgumentError("ppr: tol must be positive");
    const auto& adj = g.adjacency();
    const std::size_t n = adj.nodes;
    std::vector<double> estimate(n, 0.0);
    if (adj.degree(std::size_t(seed)) == 0) return estimate;

    // Sparse frontier sweeps: estimate += teleport * r, r <- (1-teleport) r P.
    // Every node reachable over an edge has degree >= 1, so the residual
    // mass contracts by exactly (1-teleport) per sweep.
    std::vector<double> residual(n, 0.0), next(n, 0.0);
    std::vector<NodeId> frontier{seed}, next_frontier;
    residual[std::size_t(seed)] = 1.0;
    double remaining = 1.0;
    while (remaining > tol) {
        next_frontier.clear();
        for (NodeId u : frontier) {
            const double ru = residual[std::size_t(u)];
            residual[std::size_t(u)] = 0.0;
            if (ru == 0.0) continue;
            estimate[std::size_t(u)] += teleport * ru;
            const double share =
                (1.0 - teleport) * ru / double(adj.degree(std::size_t(u)));
            for (NodeId v : adj.row(std::size_t(u))) {
                if (next[std::size_t(v)] == 0.0) next_frontier.push_back(v);
                next[std::size_t(v)] += share;
            }
        }
        for (NodeId v : next_frontier) {
            residual[std::size_t(v)] = next[std::size_t(v)];
            next[std::size_t(v)] = 0.0;
        }
        frontier.swap(next_frontier);
        remaining *= 1.0 - teleport;
        if (frontier.empty()) break;
    }
    return estimate;
}

StrategyTable build_ppr(const Graph& g, double teleport, std::size_t top,
                        double tol, std::size_t threads) {
    const std::size_t n = g.node_count();
    std::vector<std::vector<std::pair<NodeId, double>>> rows(n);
    parallel_chunks(n, threads, [&](std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i) {
            auto mass = ppr_vector(g, NodeId(i), teleport, tol);
            std::vector<std::pair<NodeId, double>> entries;
            for (std::size_t j = 0; j < n; ++j)
                if (j != i && mass[j] > 0.0)
                    entries.emplace_back(NodeId(j), mass[j]);
            const std::size_t k = std::min(top, entries.size());
            if (entries.size() > k) {
                std::nth_element(entries.begin(),
                                 entries.begin() + std::ptrdiff_t(k) - 1,
                                 entries.end(), [](const auto& a, const auto& b) {
                                     return a.second != b.second
                                                ? a.second > b.second
                                                : a.first < b.first;
                                 });
                entries.resize(k);
            }
            normalize_row(entries);
            rows[i] = std::move(entries);
        }
    });
    return from_rows(std::move(rows));
}

NeighborPool::NeighborPool(std::vector<StrategyTable> tables, std::size_t nodes)
    : nodes_(nodes), tables_(std::move(tables)) {
    for (auto& t : tables_) t.validate(nodes_);
    selections_.resize(nodes_);
    selection_probs_.resize(nodes_);
    selection_fallback_.assign(nodes_, 0);
}

NeighborPool NeighborPool::build(const Graph& g, const PoolConfig& cfg) {
    std::vector<StrategyTable> tables;
    tables.push_back(build_onehop(g));
    tables.push_back(build_twohop(g, cfg.two_hop_cap));
    tables.push_back(build_knn(g, cfg.knn_k, cfg.seed, cfg.threads));
    tables.push_back(build_ppr(g, cfg.teleport, cfg.ppr_top, cfg.ppr_tol,
                               cfg.threads));
    return NeighborPool(std::move(tables), g.node_count());
}

double NeighborPool::mixture_mass(std::span<const double> strategy_probs,
                                  NodeId i) const {
    if (strategy_probs.size() != tables_.size())
        throw ArgumentError("mixture: probability vector length mismatch");
    double z = 0.0;
    for (std::size_t k = 0; k < tables_.size(); ++k)
        if (!tables_[k].row_empty(std::size_t(i))) z += strategy_probs[k];
    return z;
}

NeighborPool::Mixture NeighborPool::mixture(std::span<const double> strategy_probs,
                                            NodeId i) const {
    if (strategy_probs.size() != tables_.size())
        throw ArgumentError("mixture: probability vector length mismatch");
    Mixture mix;
    // K-way merge over sorted candidate rows.
    struct Cursor {
        std::span<const NodeId> cand;
        std::span<const double> weight;
        std::size_t pos = 0;
    };
    std::vector<Cursor> cursors(tables_.size());
    for (std::size_t k = 0; k < tables_.size(); ++k)
        cursors[k] = {tables_[k].row_cand(std::size_t(i)),
                      tables_[k].row_weight(std::size_t(i)), 0};

    double total = 0.0;
    for (;;) {
        NodeId lowest = INT32_MAX;
        for (auto& c : cursors)
            if (c.pos < c.cand.size()) lowest = std::min(lowest, c.cand[c.pos]);
        if (lowest == INT32_MAX) break;
        double mass = 0.0;
        for (std::size_t k = 0; k < cursors.size(); ++k) {
            auto& c = cursors[k];
            if (c.pos < c.cand.size() && c.cand[c.pos] == lowest) {
                mass += strategy_probs[k] * c.weight[c.pos];
                ++c.pos;
            }
        }
        if (mass > 0.0) {
            mix.cand.push_back(lowest);
            mix.prob.push_back(mass);
            total += mass;
        }
    }

    if (!mix.cand.empty()) {
        for (auto& p : mix.prob) p /= total;
        return mix;
    }

    // Fallbacks: uniform over KNN candidates, then uniform over all nodes.
    mix.fallback = true;
    constexpr std::size_t kKnnIndex = 2;
    if (tables_.size() > kKnnIndex &&
        !tables_[kKnnIndex].row_empty(std::size_t(i))) {
        auto cand = tables_[kKnnIndex].row_cand(std::size_t(i));
        mix.cand.assign(cand.begin(), cand.end());
        mix.prob.assign(cand.size(), 1.0 / double(cand.size()));
        return mix;
    }
    if (nodes_ > 1) {
        mix.cand.reserve(nodes_ - 1);
        for (std::size_t j = 0; j < nodes_; ++j)
            if (j != std::size_t(i)) mix.cand.push_back(NodeId(j));
        mix.prob.assign(mix.cand.size(), 1.0 / double(mix.cand.size()));
    }
    return mix;
}

std::vector<NodeId> NeighborPool::sample_neighborhood(const Mixture& mix,
                                                      std::size_t max_draws,
                                                      Rng& rng) {
    if (max_draws < 1)
        throw ArgumentError("sample_neighborhood: draw budget must be positive");
    std::vector<NodeId> out;
    if (mix.cand.empty()) return out;

    std::vector<NodeId> cand(mix.cand);
    std::vector<double> prob(mix.prob);
    double total = 0.0;
    for (double p : prob) total += p;

    const std::size_t draws = std::min(max_draws, cand.size());
    out.reserve(draws);
    for (std::size_t d = 0; d < draws; ++d) {
        const double u = rng.next_unit() * total;
        double acc = 0.0;
        std::size_t pick = cand.size() - 1;
        for (std::size_t k = 0; k < cand.size(); ++k) {
            acc += prob[k];
            if (u < acc) {
                pick = k;
                break;
            }
        }
        out.push_back(cand[pick]);
        total -= prob[pick];
        cand.erase(cand.begin() + std::ptrdiff_t(pick));
        prob.erase(prob.begin() + std::ptrdiff_t(pick));
        if (total <= 0.0 && !cand.empty()) {
            // Numerical exhaustion: remaining mass is rounding noise.
            break;
        }
    }
    return out;
}

void NeighborPool::sample_all(std::span<const double> strategy_probs,
                              std::size_t max_draws, Rng& rng) {
    for (std::size_t i = 0; i < nodes_; ++i) {
        Mixture mix = mixture(strategy_probs, NodeId(i));
        auto picks = sample_neighborhood(mix, max_draws, rng);
        std::vector<double> probs;
        probs.reserve(picks.size());
        for (NodeId j : picks) {
            auto it = std::lower_bound(mix.cand.begin(), mix.cand.end(), j);
            probs.push_back(mix.prob[std::size_t(it - mix.cand.begin())]);
        }
        selections_[i] = std::move(picks);
        selection_probs_[i] = std::move(probs);
        selection_fallback_[i] = mix.fallback ? 1 : 0;
    }
}

void NeighborPool::set_selection(NodeId i, std::vector<NodeId> nodes,
                                 std::vector<double> probs, bool fallback) {
    if (nodes.size() != probs.size())
        throw ArgumentError("set_selection: node/probability length mismatch");
    selections_[std::size_t(i)] = std::move(nodes);
    selection_probs_[std::size_t(i)] = std::move(probs);
    selection_fallback_[std::size_t(i)] = fallback ? 1 : 0;
}

std::size_t NeighborPool::total_candidate_entries() const {
    std::size_t total = 0;
    for (const auto& t : tables_) total += t.cand.size();
    return total;
}

void NeighborPool::dump_tsv(std::ostream& out) const {
    char buf[40];
    for (std::size_t k = 0; k < tables_.size(); ++k) {
        const auto& t = tables_[k];
        for (std::size_t i = 0; i < t.centers(); ++i) {
            auto c = t.row_cand(i);
            auto w = t.row_weight(i);
            for (std::size_t r = 0; r < c.size(); ++r) {
                std::snprintf(buf, sizeof buf, "%.17g", w[r]);
                out << k << '\t' << i << '\t' << c[r] << '\t' << buf << '\n';
            }
        }
    }
}

void NeighborPool::dump_tsv(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write pool dump: " + path);
    dump_tsv(out);
}

}  // namespace randgad
