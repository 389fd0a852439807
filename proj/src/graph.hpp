#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace randgad {

using NodeId = std::int32_t;

// General CSR matrix with real values. Column indices are strictly
// increasing within each row.
struct SparseMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<std::int64_t> offsets;  // rows + 1 entries
    std::vector<NodeId> indices;
    std::vector<double> values;

    std::size_t nnz() const { return indices.size(); }
    std::span<const NodeId> row_indices(std::size_t i) const {
        return {indices.data() + offsets[i],
                static_cast<std::size_t>(offsets[i + 1] - offsets[i])};
    }
    std::span<const double> row_values(std::size_t i) const {
        return {values.data() + offsets[i],
                static_cast<std::size_t>(offsets[i + 1] - offsets[i])};
    }
    // Throws InternalError if the CSR invariants are violated.
    void validate() const;
};

// Binary symmetric adjacency without self-loops, stored as CSR structure
// (both directions present, neighbor lists sorted ascending).
struct Adjacency {
    std::size_t nodes = 0;
    std::vector<std::int64_t> offsets;
    std::vector<NodeId> neighbors;

    std::span<const NodeId> row(std::size_t i) const {
        return {neighbors.data() + offsets[i],
                static_cast<std::size_t>(offsets[i + 1] - offsets[i])};
    }
    std::size_t degree(std::size_t i) const {
        return static_cast<std::size_t>(offsets[i + 1] - offsets[i]);
    }
    bool has_edge(NodeId a, NodeId b) const;
    // Stored directed entries = 2 x undirected edge count.
    std::size_t undirected_edges() const { return neighbors.size() / 2; }
};

// Dense row-major matrix of doubles.
struct DenseMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    DenseMatrix() = default;
    DenseMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

    double& at(std::size_t i, std::size_t j) { return data[i * cols + j]; }
    double at(std::size_t i, std::size_t j) const { return data[i * cols + j]; }
    std::span<const double> row(std::size_t i) const {
        return {data.data() + i * cols, cols};
    }
    std::span<double> row(std::size_t i) {
        return {data.data() + i * cols, cols};
    }
};

// Immutable attributed graph. Adjacency and attributes are shared between
// copies; all mutating operations build a new Graph.
class Graph {
public:
    Graph() = default;
    Graph(Adjacency adj, DenseMatrix attrs,
          std::optional<std::vector<std::uint8_t>> labels = std::nullopt,
          std::size_t dropped_self_loops = 0);

    std::size_t node_count() const { return adj_ ? adj_->nodes : 0; }
    std::size_t attr_dim() const { return attrs_ ? attrs_->cols : 0; }
    std::size_t edge_count() const { return adj_ ? adj_->undirected_edges() : 0; }

    const Adjacency& adjacency() const { return *adj_; }
    const DenseMatrix& attributes() const { return *attrs_; }
    std::span<const double> attr_row(std::size_t i) const { return attrs_->row(i); }

    bool has_labels() const { return labels_.has_value(); }
    std::span<const std::uint8_t> labels() const { return *labels_; }
    std::size_t anomaly_count() const;

    // Count of self-loop entries discarded while loading.
    std::size_t dropped_self_loops() const { return dropped_self_loops_; }

    Graph without_labels() const;
    Graph with_labels(std::vector<std::uint8_t> labels) const;
    // New graph sharing this adjacency but owning fresh attributes.
    Graph with_attributes(DenseMatrix attrs) const;
    Graph with_adjacency(Adjacency adj) const;

private:
    std::shared_ptr<const Adjacency> adj_;
    std::shared_ptr<const DenseMatrix> attrs_;
    std::optional<std::vector<std::uint8_t>> labels_;
    std::size_t dropped_self_loops_ = 0;
};

// Deduplicates, symmetrizes and drops self-loops. `loop_count`, when given,
// receives the number of discarded self-loop lines.
Adjacency build_adjacency(std::size_t nodes,
                          std::span<const std::pair<NodeId, NodeId>> edges,
                          std::size_t* loop_count = nullptr);

enum class AttrFormat { Csv, Binary };

// Edge file: whitespace-separated 0-indexed "src dst" pairs. Attribute file:
// headerless CSV (or the RANDATTR binary format, detected by magic). Label
// file: one 0/1 per line.
Graph load_graph(const std::string& edge_path, const std::string& attr_path,
                 const std::optional<std::string>& label_path = std::nullopt);

void save_graph(const Graph& g, const std::string& edge_path,
                const std::string& attr_path,
                const std::optional<std::string>& label_path = std::nullopt,
                AttrFormat format = AttrFormat::Csv);

enum class NormMode { Symmetric, RowStochastic };

// Symmetric: D^{-1/2} (A [+I]) D^{-1/2}. Row-stochastic: D^{-1} (A [+I]).
// Rows of isolated nodes stay all-zero unless self_loops adds the loop.
SparseMatrix normalized_adjacency(const Graph& g, NormMode mode, bool self_loops);

// Exact sparse m^k with explicit zeros pruned; k in {1, 2}.
SparseMatrix spmm_power(const SparseMatrix& m, int k);

}  // namespace randgad
