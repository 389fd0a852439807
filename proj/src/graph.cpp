#include "graph.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "errors.hpp"

namespace randgad {

namespace {

constexpr char kAttrMagic[8] = {'R', 'A', 'N', 'D', 'A', 'T', 'T', 'R'};

[[noreturn]] void fail_data(const std::string& msg) { throw DataError(msg); }

std::uint64_t read_u64_le(const unsigned char* p) {
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | p[i];
    return v;
}

void write_u64_le(std::ofstream& out, std::uint64_t v) {
    unsigned char buf[8];
    for (int i = 0; i < 8; ++i) buf[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
    out.write(reinterpret_cast<const char*>(buf), 8);
}

}  // namespace

void SparseMatrix::validate() const {
    if (offsets.size() != rows + 1 || offsets.front() != 0 ||
        offsets.back() != static_cast<std::int64_t>(indices.size()) ||
        indices.size() != values.size())
        throw InternalError("SparseMatrix: inconsistent CSR arrays");
    for (std::size_t i = 0; i < rows; ++i) {
        if (offsets[i] > offsets[i + 1])
            throw InternalError("SparseMatrix: offsets not monotone");
        for (auto k = offsets[i]; k < offsets[i + 1]; ++k) {
            if (indices[k] < 0 || static_cast<std::size_t>(indices[k]) >= cols)
                throw InternalError("SparseMatrix: column index out of range");
            if (k > offsets[i] && indices[k] <= indices[k - 1])
                throw InternalError("SparseMatrix: columns not strictly increasing");
        }
    }
}

bool Adjacency::has_edge(NodeId a, NodeId b) const {
    auto r = row(static_cast<std::size_t>(a));
    return std::binary_search(r.begin(), r.end(), b);
}

Graph::Graph(Adjacency adj, DenseMatrix attrs,
             std::optional<std::vector<std::uint8_t>> labels,
             std::size_t dropped_self_loops)
    : adj_(std::make_shared<Adjacency>(std::move(adj))),
      attrs_(std::make_shared<DenseMatrix>(std::move(attrs))),
      labels_(std::move(labels)),
      dropped_self_loops_(dropped_self_loops) {
    if (adj_->nodes != attrs_->rows)
        throw DataError("graph: attribute row count does not match node count");
    if (labels_ && labels_->size() != adj_->nodes)
        throw DataError("graph: label count does not match node count");
    if (labels_)
        for (auto v : *labels_)
            if (v > 1) throw DataError("graph: labels must be 0/1");
    for (double x : attrs_->data)
        if (!std::isfinite(x)) throw DataError("graph: non-finite attribute value");
}

std::size_t Graph::anomaly_count() const {
    if (!labels_) return 0;
    std::size_t c = 0;
    for (auto v : *labels_) c += v;
    return c;
}

Graph Graph::without_labels() const {
    Graph g(*this);
    g.labels_.reset();
    return g;
}

Graph Graph::with_labels(std::vector<std::uint8_t> labels) const {
    if (labels.size() != node_count())
        throw DataError("with_labels: length mismatch");
    Graph g(*this);
    g.labels_ = std::move(labels);
    return g;
}

Graph Graph::with_attributes(DenseMatrix attrs) const {
    if (attrs.rows != node_count())
        throw DataError("with_attributes: row count mismatch");
    Graph g(*this);
    g.attrs_ = std::make_shared<DenseMatrix>(std::move(attrs));
    return g;
}

Graph Graph::with_adjacency(Adjacency adj) const {
    if (adj.nodes != node_count())
        throw DataError("with_adjacency: node count mismatch");
    Graph g(*this);
    g.adj_ = std::make_shared<Adjacency>(std::move(adj));
    return g;
}

Adjacency build_adjacency(std::size_t nodes,
                          std::span<const std::pair<NodeId, NodeId>> edges,
                          std::size_t* loop_count) {
    std::size_t loops = 0;
    std::vector<std::pair<NodeId, NodeId>> dir;
    dir.reserve(edges.size() * 2);
    for (auto [a, b] : edges) {
        if (a < 0 || b < 0 || static_cast<std::size_t>(a) >= nodes ||
            static_cast<std::size_t>(b) >= nodes)
            fail_data("edge endpoint out of range");
        if (a == b) {
            ++loops;
            continue;
        }
        dir.emplace_back(a, b);
        dir.emplace_back(b, a);
    }
    std::sort(dir.begin(), dir.end());
    dir.erase(std::unique(dir.begin(), dir.end()), dir.end());

    Adjacency adj;
    adj.nodes = nodes;
    adj.offsets.assign(nodes + 1, 0);
    for (auto [a, b] : dir) adj.offsets[static_cast<std::size_t>(a) + 1]++;
    for (std::size_t i = 0; i < nodes; ++i) adj.offsets[i + 1] += adj.offsets[i];
    adj.neighbors.resize(dir.size());
    std::vector<std::int64_t> cursor(adj.offsets.begin(), adj.offsets.end() - 1);
    for (auto [a, b] : dir) adj.neighbors[cursor[static_cast<std::size_t>(a)]++] = b;
    if (loop_count) *loop_count = loops;
    return adj;
}

namespace {

std::vector<std::pair<NodeId, NodeId>> read_edge_file(const std::string& path,
                                                      NodeId* max_node) {
    std::ifstream in(path);
    if (!in) fail_data("cannot open edge file: " + path);
    std::vector<std::pair<NodeId, NodeId>> edges;
    long long a, b;
    *max_node = -1;
    while (in >> a >> b) {
        if (a < 0 || b < 0) fail_data("negative node index in " + path);
        if (a > INT32_MAX || b > INT32_MAX) fail_data("node index too large in " + path);
        edges.emplace_back(static_cast<NodeId>(a), static_cast<NodeId>(b));
        *max_node = std::max({*max_node, static_cast<NodeId>(a), static_cast<NodeId>(b)});
    }
    if (!in.eof()) {
        in.clear();
        std::string tok;
        in >> tok;
        if (!tok.empty()) fail_data("malformed token '" + tok + "' in " + path);
    }
    return edges;
}

DenseMatrix read_attr_binary(std::ifstream& in, const std::string& path) {
    unsigned char header[24];
    in.read(reinterpret_cast<char*>(header), 24);
    if (!in) fail_data("truncated binary attribute header in " + path);
    const std::uint64_t n = read_u64_le(header + 8);
    const std::uint64_t d = read_u64_le(header + 16);
    if (n == 0 || d == 0 || n > (1ULL << 32) || d > (1ULL << 32))
        fail_data("implausible attribute shape in " + path);
    DenseMatrix m(static_cast<std::size_t>(n), static_cast<std::size_t>(d));
    std::vector<float> rowbuf(m.cols);
    for (std::size_t i = 0; i < m.rows; ++i) {
        in.read(reinterpret_cast<char*>(rowbuf.data()),
                static_cast<std::streamsize>(sizeof(float) * m.cols));
        if (!in) fail_data("truncated binary attribute data in " + path);
        for (std::size_t j = 0; j < m.cols; ++j) {
            if (!std::isfinite(rowbuf[j])) fail_data("non-finite attribute in " + path);
            m.at(i, j) = static_cast<double>(rowbuf[j]);
        }
    }
    return m;
}

DenseMatrix read_attr_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail_data("cannot open attribute file: " + path);
    std::vector<double> data;
    std::size_t cols = 0, rows = 0;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() ||
            line.find_first_not_of(" \t\r") == std::string::npos)
            continue;
        std::size_t row_cols = 0;
        const char* p = line.data();
        const char* end = p + line.size();
        while (p < end) {
            while (p < end && (*p == ' ' || *p == '\t')) ++p;
            const char* field_end = std::find(p, end, ',');
            const char* num_end = field_end;
            while (num_end > p &&
                   (num_end[-1] == ' ' || num_end[-1] == '\t' || num_end[-1] == '\r'))
                --num_end;
            double v;
            auto [ptr, ec] = std::from_chars(p, num_end, v);
            if (ec != std::errc() || ptr != num_end)
                fail_data("bad numeric field in " + path + " line " +
                          std::to_string(rows + 1));
            if (!std::isfinite(v))
                fail_data("non-finite attribute in " + path);
            data.push_back(v);
            ++row_cols;
            p = field_end < end ? field_end + 1 : end;
        }
        if (rows == 0)
            cols = row_cols;
        else if (row_cols != cols)
            fail_data("ragged attribute rows in " + path);
        ++rows;
    }
    if (rows == 0) fail_data("empty attribute file: " + path);
    DenseMatrix m(rows, cols);
    m.data = std::move(data);
    return m;
}

DenseMatrix read_attr_file(const std::string& path) {
    std::ifstream probe(path, std::ios::binary);
    if (!probe) fail_data("cannot open attribute file: " + path);
    char magic[8] = {};
    probe.read(magic, 8);
    if (probe.gcount() == 8 && std::memcmp(magic, kAttrMagic, 8) == 0) {
        probe.seekg(0);
        return read_attr_binary(probe, path);
    }
    return read_attr_csv(path);
}

std::vector<std::uint8_t> read_label_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail_data("cannot open label file: " + path);
    std::vector<std::uint8_t> labels;
    std::string line;
    while (std::getline(in, line)) {
        std::size_t pos = line.find_first_not_of(" \t\r");
        if (pos == std::string::npos) continue;
        char c = line[pos];
        if (c != '0' && c != '1') fail_data("labels must be 0/1 in " + path);
        labels.push_back(static_cast<std::uint8_t>(c - '0'));
    }
    return labels;
}

}  // namespace

Graph load_graph(const std::string& edge_path, const std::string& attr_path,
                 const std::optional<std::string>& label_path) {
    DenseMatrix attrs = read_attr_file(attr_path);
    NodeId max_node = -1;
    auto edges = read_edge_file(edge_path, &max_node);
    if (max_node >= 0 && static_cast<std::size_t>(max_node) >= attrs.rows)
        fail_data("edge file references node " + std::to_string(max_node) +
                  " but attribute file has only " + std::to_string(attrs.rows) +
                  " rows");
    std::size_t loops = 0;
    Adjacency adj = build_adjacency(attrs.rows, edges, &loops);

    std::optional<std::vector<std::uint8_t>> labels;
    if (label_path) {
        auto l = read_label_file(*label_path);
        if (l.size() != attrs.rows)
            fail_data("label count " + std::to_string(l.size()) +
                      " does not match node count " + std::to_string(attrs.rows));
        labels = std::move(l);
    }
    return Graph(std::move(adj), std::move(attrs), std::move(labels), loops);
}

void save_graph(const Graph& g, const std::string& edge_path,
                const std::string& attr_path,
                const std::optional<std::string>& label_path, AttrFormat format) {
    {
        std::ofstream out(edge_path);
        if (!out) fail_data("cannot write edge file: " + edge_path);
        const auto& adj = g.adjacency();
        for (std::size_t i = 0; i < adj.nodes; ++i)
            for (NodeId j : adj.row(i))
                if (static_cast<NodeId>(i) < j)
                    out << i << ' ' << j << '\n';
    }
    if (format == AttrFormat::Binary) {
        std::ofstream out(attr_path, std::ios::binary);
        if (!out) fail_data("cannot write attribute file: " + attr_path);
        out.write(kAttrMagic, 8);
        write_u64_le(out, g.node_count());
        write_u64_le(out, g.attr_dim());
        const auto& m = g.attributes();
        std::vector<float> rowbuf(m.cols);
        for (std::size_t i = 0; i < m.rows; ++i) {
            for (std::size_t j = 0; j < m.cols; ++j)
                rowbuf[j] = static_cast<float>(m.at(i, j));
            out.write(reinterpret_cast<const char*>(rowbuf.data()),
                      static_cast<std::streamsize>(sizeof(float) * m.cols));
        }
    } else {
        std::ofstream out(attr_path);
        if (!out) fail_data("cannot write attribute file: " + attr_path);
        char buf[40];
        const auto& m = g.attributes();
        for (std::size_t i = 0; i < m.rows; ++i) {
            for (std::size_t j = 0; j < m.cols; ++j) {
                // %.17g round-trips doubles exactly.
                std::snprintf(buf, sizeof buf, "%.17g", m.at(i, j));
                out << (j ? "," : "") << buf;
            }
            out << '\n';
        }
    }
    if (label_path) {
        std::ofstream out(*label_path);
        if (!out) fail_data("cannot write label file: " + *label_path);
        if (g.has_labels())
            for (auto v : g.labels()) out << int(v) << '\n';
        else
            for (std::size_t i = 0; i < g.node_count(); ++i) out << 0 << '\n';
    }
}

SparseMatrix normalized_adjacency(const Graph& g, NormMode mode, bool self_loops) {
    const auto& adj = g.adjacency();
    const std::size_t n = adj.nodes;
    SparseMatrix m;
    m.rows = m.cols = n;
    m.offsets.assign(n + 1, 0);

    std::vector<double> degree(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        degree[i] = static_cast<double>(adj.degree(i)) + (self_loops ? 1.0 : 0.0);
    }
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t len = adj.degree(i) + (self_loops ? 1 : 0);
        if (degree[i] == 0.0) len = 0;
        m.offsets[i + 1] = m.offsets[i] + static_cast<std::int64_t>(len);
    }
    m.indices.resize(static_cast<std::size_t>(m.offsets[n]));
    m.values.resize(m.indices.size());

    for (std::size_t i = 0; i < n; ++i) {
        if (degree[i] == 0.0) continue;
        auto pos = static_cast<std::size_t>(m.offsets[i]);
        auto emit = [&](NodeId j) {
            double v;
            if (mode == NormMode::RowStochastic)
                v = 1.0 / degree[i];
            else
                v = 1.0 / (std::sqrt(degree[i]) *
                           std::sqrt(degree[static_cast<std::size_t>(j)]));
            m.indices[pos] = j;
            m.values[pos] = v;
            ++pos;
        };
        bool loop_emitted = !self_loops;
        for (NodeId j : adj.row(i)) {
            if (!loop_emitted && j > static_cast<NodeId>(i)) {
                emit(static_cast<NodeId>(i));
                loop_emitted = true;
            }
            emit(j);
        }
        if (!loop_emitted) emit(static_cast<NodeId>(i));
    }
    return m;
}

namespace {

// One row of the CSR product accumulated through a dense scratch vector.
void accumulate_product_row(const SparseMatrix& a, const SparseMatrix& b,
                            std::size_t i, std::vector<double>& scratch,
                            std::vector<NodeId>& touched) {
    for (auto ka = a.offsets[i]; ka < a.offsets[i + 1]; ++ka) {
        const auto j = static_cast<std::size_t>(a.indices[ka]);
        const double va = a.values[ka];
        for (auto kb = b.offsets[j]; kb < b.offsets[j + 1]; ++kb) {
            const NodeId c = b.indices[kb];
            if (scratch[static_cast<std::size_t>(c)] == 0.0) touched.push_back(c);
            scratch[static_cast<std::size_t>(c)] += va * b.values[kb];
        }
    }
}

}  // namespace

SparseMatrix spmm_power(const SparseMatrix& m, int k) {
    if (m.rows != m.cols) throw ArgumentError("spmm_power: matrix must be square");
    if (k != 1 && k != 2) throw ArgumentError("spmm_power: k must be 1 or 2");
    if (k == 1) return m;

    SparseMatrix out;
    out.rows = out.cols = m.rows;
    out.offsets.assign(m.rows + 1, 0);
    std::vector<double> scratch(m.cols, 0.0);
    std::vector<NodeId> touched;
    for (std::size_t i = 0; i < m.rows; ++i) {
        touched.clear();
        accumulate_product_row(m, m, i, scratch, touched);
        std::sort(touched.begin(), touched.end());
        for (NodeId c : touched) {
            const double v = scratch[static_cast<std::size_t>(c)];
            if (v != 0.0) {
                out.indices.push_back(c);
                out.values.push_back(v);
            }
            scratch[static_cast<std::size_t>(c)] = 0.0;
        }
        out.offsets[i + 1] = static_cast<std::int64_t>(out.indices.size());
    }
    return out;
}

}  // namespace randgad
