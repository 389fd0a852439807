#pragma once

// Shared helpers for the test suites: small graph builders, dense
// brute-force oracles kept independent of the library's sparse code paths,
// and temp-file plumbing.

#include <unistd.h>

#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "graph.hpp"
#include "rng.hpp"

namespace testsupport {

using randgad::Adjacency;
using randgad::DenseMatrix;
using randgad::Graph;
using randgad::NodeId;
using randgad::SparseMatrix;

using Dense = std::vector<std::vector<double>>;

inline Graph make_graph(std::size_t n,
                        const std::vector<std::pair<NodeId, NodeId>>& edges,
                        DenseMatrix attrs = {}) {
    if (attrs.rows == 0) {
        attrs = DenseMatrix(n, 1);
        for (std::size_t i = 0; i < n; ++i) attrs.at(i, 0) = double(i);
    }
    auto adj = randgad::build_adjacency(n, edges);
    return Graph(std::move(adj), std::move(attrs));
}

inline Graph random_graph(randgad::Rng& rng, std::size_t n, double edge_prob,
                          std::size_t attr_dim = 4) {
    std::vector<std::pair<NodeId, NodeId>> edges;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (rng.next_unit() < edge_prob)
                edges.emplace_back(NodeId(i), NodeId(j));
    DenseMatrix attrs(n, attr_dim);
    for (auto& x : attrs.data) x = rng.next_real(-1.0, 1.0);
    return make_graph(n, edges, std::move(attrs));
}

// Homophilous attribute-clustered graph: dense intra-cluster wiring plus a
// sprinkle of cross links; attributes are noisy copies of cluster centers.
inline Graph make_clustered_graph(randgad::Rng& rng, std::size_t n,
                                  std::size_t attr_dim, std::size_t clusters,
                                  std::size_t intra_links = 6,
                                  double inter_prob = 0.01) {
    std::vector<std::size_t> cluster_of(n);
    for (std::size_t i = 0; i < n; ++i) cluster_of[i] = rng.below(clusters);

    DenseMatrix centers(clusters, attr_dim);
    for (auto& x : centers.data) x = rng.next_unit() < 0.5 ? -1.0 : 1.0;
    DenseMatrix attrs(n, attr_dim);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < attr_dim; ++j)
            attrs.at(i, j) =
                centers.at(cluster_of[i], j) + rng.next_real(-0.3, 0.3);

    std::vector<std::vector<NodeId>> members(clusters);
    for (std::size_t i = 0; i < n; ++i) members[cluster_of[i]].push_back(NodeId(i));

    std::vector<std::pair<NodeId, NodeId>> edges;
    for (std::size_t i = 0; i < n; ++i) {
        const auto& mine = members[cluster_of[i]];
        for (std::size_t l = 0; l < intra_links && mine.size() > 1; ++l) {
            NodeId j = mine[rng.below(mine.size())];
            if (j != NodeId(i)) edges.emplace_back(NodeId(i), j);
        }
        if (rng.next_unit() < inter_prob) {
            NodeId j = NodeId(rng.below(n));
            if (j != NodeId(i)) edges.emplace_back(NodeId(i), j);
        }
    }
    return make_graph(n, edges, std::move(attrs));
}

inline Dense dense_from(const SparseMatrix& m) {
    Dense d(m.rows, std::vector<double>(m.cols, 0.0));
    for (std::size_t i = 0; i < m.rows; ++i) {
        auto idx = m.row_indices(i);
        auto val = m.row_values(i);
        for (std::size_t k = 0; k < idx.size(); ++k)
            d[i][std::size_t(idx[k])] = val[k];
    }
    return d;
}

inline Dense dense_adjacency(const Graph& g) {
    const auto& adj = g.adjacency();
    Dense d(adj.nodes, std::vector<double>(adj.nodes, 0.0));
    for (std::size_t i = 0; i < adj.nodes; ++i)
        for (NodeId j : adj.row(i)) d[i][std::size_t(j)] = 1.0;
    return d;
}

// Brute-force normalization over the dense adjacency.
inline Dense dense_normalized(const Graph& g, randgad::NormMode mode,
                              bool self_loops) {
    Dense a = dense_adjacency(g);
    const std::size_t n = a.size();
    if (self_loops)
        for (std::size_t i = 0; i < n; ++i) a[i][i] += 1.0;
    std::vector<double> deg(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) deg[i] += a[i][j];
    Dense out(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) {
        if (deg[i] == 0.0) continue;
        for (std::size_t j = 0; j < n; ++j) {
            if (a[i][j] == 0.0) continue;
            out[i][j] = mode == randgad::NormMode::RowStochastic
                            ? a[i][j] / deg[i]
                            : a[i][j] / (std::sqrt(deg[i]) * std::sqrt(deg[j]));
        }
    }
    return out;
}

inline Dense dense_matmul(const Dense& a, const Dense& b) {
    const std::size_t n = a.size(), m = b[0].size(), k = b.size();
    Dense out(n, std::vector<double>(m, 0.0));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t l = 0; l < k; ++l) {
            const double v = a[i][l];
            if (v == 0.0) continue;
            for (std::size_t j = 0; j < m; ++j) out[i][j] += v * b[l][j];
        }
    return out;
}

inline double max_abs_diff(const Dense& a, const Dense& b) {
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < a[i].size(); ++j)
            worst = std::max(worst, std::abs(a[i][j] - b[i][j]));
    return worst;
}

// Unique scratch directory under the build tree, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        static std::atomic<int> counter{0};
        path_ = std::filesystem::temp_directory_path() /
                ("randgad_test_" + tag + "_" + std::to_string(::getpid()) + "_" +
                 std::to_string(counter++));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    std::string file(const std::string& name) const {
        return (path_ / name).string();
    }
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    out << content;
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), {});
}

}  // namespace testsupport
