#include "model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "errors.hpp"

namespace randgad {

void ModelConfig::validate() const {
    if (embedding < 1) throw ArgumentError("model: embedding size must be positive");
    if (mask_rate < 0.0 || mask_rate >= 1.0)
        throw ArgumentError("model: mask rate must lie in [0,1)");
    if (alpha < 0.0 || alpha > 1.0)
        throw ArgumentError("model: alpha must lie in [0,1]");
    if (lambda < 0.0) throw ArgumentError("model: lambda must be non-negative");
}

ModelParams ModelParams::init(std::size_t attr_dim, const ModelConfig& cfg,
                              Rng& rng) {
    cfg.validate();
    if (attr_dim < 1) throw ArgumentError("model: attribute dimension must be positive");
    const std::size_t h = cfg.embedding;
    ModelParams p;
    p.decoder = cfg.decoder;
    p.enc1 = Parameter("encoder1", xavier_init(attr_dim, h, rng));
    p.enc2 = Parameter("encoder2", xavier_init(h, h, rng));
    p.att = Parameter("attention", xavier_init(h, h, rng));
    p.mp = Parameter("message", xavier_init(h, h, rng));
    if (cfg.decoder == ModelConfig::Decoder::GraphConv) {
        p.dec1 = Parameter("attr_decoder", xavier_init(h, attr_dim, rng));
    } else {
        p.dec1 = Parameter("attr_decoder1", xavier_init(h, h, rng));
        p.dec2 = Parameter("attr_decoder2", xavier_init(h, attr_dim, rng));
    }
    return p;
}

std::vector<Parameter*> ModelParams::all() {
    std::vector<Parameter*> out{&enc1, &enc2, &att, &mp, &dec1};
    if (decoder == ModelConfig::Decoder::Mlp2) out.push_back(&dec2);
    return out;
}

std::vector<const Parameter*> ModelParams::all() const {
    std::vector<const Parameter*> out{&enc1, &enc2, &att, &mp, &dec1};
    if (decoder == ModelConfig::Decoder::Mlp2) out.push_back(&dec2);
    return out;
}

void ModelParams::zero_grads() {
    for (auto* p : all()) p->zero_grad();
}

Tape::Id encode(Tape& tape, Tape::Id x, ModelParams& params) {
    auto l1 = tape.tanh(tape.matmul(x, tape.param(params.enc1)));
    return tape.tanh(tape.matmul(l1, tape.param(params.enc2)));
}

Tensor center_anchor(const Tensor& embeddings) {
    if (embeddings.rows == 0) throw ArgumentError("center_anchor: empty embeddings");
    Tensor anchor(1, embeddings.cols);
    for (std::size_t i = 0; i < embeddings.rows; ++i) {
        auto row = embeddings.row(i);
        for (std::size_t j = 0; j < embeddings.cols; ++j) anchor.v[j] += row[j];
    }
    const double inv = 1.0 / double(embeddings.rows);
    for (auto& x : anchor.v) x *= inv;
    return anchor;
}

std::vector<NodeId> mask_ids(const Tensor& embeddings, const Tensor& anchor,
                             double mask_rate) {
    if (mask_rate < 0.0 || mask_rate >= 1.0)
        throw ArgumentError("mask_ids: mask rate must lie in [0,1)");
    if (anchor.cols != embeddings.cols)
        throw ArgumentError("mask_ids: anchor dimension mismatch");
    const std::size_t n = embeddings.rows;
    const auto count = std::size_t(mask_rate * double(n));
    if (count == 0) return {};

    std::vector<double> dist(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        auto row = embeddings.row(i);
        double s = 0.0;
        for (std::size_t j = 0; j < embeddings.cols; ++j) {
            const double d = row[j] - anchor.v[j];
            s += d * d;
        }
        dist[i] = s;
    }
    std::vector<NodeId> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::nth_element(order.begin(), order.begin() + std::ptrdiff_t(count) - 1,
                     order.end(), [&](NodeId a, NodeId b) {
                         return dist[std::size_t(a)] != dist[std::size_t(b)]
                                    ? dist[std::size_t(a)] > dist[std::size_t(b)]
                                    : a < b;
                     });
    order.resize(count);
    std::sort(order.begin(), order.end());
    return order;
}

Tape::Id aggregate(Tape& tape, Tape::Id embeddings, const NeighborPool& pool,
                   std::span<const NodeId> masked_sorted, ModelParams& params) {
    const std::size_t n = tape.value(embeddings).rows;
    if (pool.node_count() != n)
        throw ArgumentError("aggregate: pool size mismatch");

    std::vector<std::uint8_t> is_masked(n, 0);
    for (NodeId m : masked_sorted) is_masked[std::size_t(m)] = 1;

    auto att_id = tape.param(params.att);
    std::vector<Tape::Id> messages;
    messages.reserve(n);
    std::vector<NodeId> unmasked;
    unmasked.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (is_masked[i]) continue;
        unmasked.push_back(NodeId(i));
        auto sel = pool.selection(NodeId(i));
        std::vector<NodeId> ids;
        ids.reserve(sel.size() + 1);
        ids.push_back(NodeId(i));  // row 0 is the center's own slot
        ids.insert(ids.end(), sel.begin(), sel.end());
        auto stacked = tape.gather_rows(embeddings, std::move(ids));
        auto gates = tape.tanh(tape.matmul(stacked, att_id));
        messages.push_back(tape.sum_rows(tape.mul(gates, stacked)));
    }

    Tape::Id hidden_unmasked = -1;
    if (!messages.empty())
        hidden_unmasked =
            tape.matmul(tape.concat_rows(messages), tape.param(params.mp));

    if (masked_sorted.empty()) return hidden_unmasked;

    auto kept = tape.gather_rows(
        embeddings, std::vector<NodeId>(masked_sorted.begin(), masked_sorted.end()));
    Tape::Id stacked = messages.empty()
                           ? kept
                           : tape.concat_rows({hidden_unmasked, kept});

    // Restore node order: unmasked rows come first in `stacked`.
    std::vector<NodeId> position(n, 0);
    for (std::size_t r = 0; r < unmasked.size(); ++r)
        position[std::size_t(unmasked[r])] = NodeId(r);
    for (std::size_t r = 0; r < masked_sorted.size(); ++r)
        position[std::size_t(masked_sorted[r])] = NodeId(unmasked.size() + r);
    std::vector<NodeId> perm(n);
    for (std::size_t v = 0; v < n; ++v) perm[v] = position[v];
    return tape.gather_rows(stacked, std::move(perm));
}

Tape::Id decode_topology(Tape& tape, Tape::Id hidden) {
    return tape.matmul(hidden, tape.transpose(hidden));
}

Tape::Id decode_attribute(Tape& tape, Tape::Id hidden,
                          std::shared_ptr<const SparseMatrix> a_norm,
                          ModelParams& params) {
    if (params.decoder == ModelConfig::Decoder::GraphConv) {
        auto conv = tape.tanh(tape.spmm(std::move(a_norm), hidden));
        return tape.matmul(conv, tape.param(params.dec1));
    }
    auto l1 = tape.tanh(tape.matmul(hidden, tape.param(params.dec1)));
    return tape.matmul(l1, tape.param(params.dec2));
}

std::vector<double> anomaly_scores(const Tensor& d_topo, const Tensor& d_attr,
                                   double alpha) {
    if (d_topo.rows != d_attr.rows || d_topo.cols != 1 || d_attr.cols != 1)
        throw ArgumentError("anomaly_scores: expected column error vectors");
    if (alpha < 0.0 || alpha > 1.0)
        throw ArgumentError("anomaly_scores: alpha must lie in [0,1]");
    std::vector<double> s(d_topo.rows);
    for (std::size_t i = 0; i < s.size(); ++i)
        s[i] = (1.0 - alpha) * d_topo.v[i] + alpha * d_attr.v[i];
    return s;
}

std::vector<double> anomaly_scores(const Tensor& a, const Tensor& a_hat,
                                   const Tensor& x, const Tensor& x_hat,
                                   double alpha) {
    if (!a.same_shape(a_hat) || !x.same_shape(x_hat) || a.rows != x.rows)
        throw ArgumentError("anomaly_scores: shape mismatch");
    Tensor dt(a.rows, 1), da(a.rows, 1);
    for (std::size_t i = 0; i < a.rows; ++i) {
        double st = 0.0;
        auto ra = a.row(i);
        auto rah = a_hat.row(i);
        for (std::size_t j = 0; j < a.cols; ++j) {
            const double d = ra[j] - rah[j];
            st += d * d;
        }
        dt.v[i] = st;
        double sa = 0.0;
        auto rx = x.row(i);
        auto rxh = x_hat.row(i);
        for (std::size_t j = 0; j < x.cols; ++j) {
            const double d = rx[j] - rxh[j];
            sa += d * d;
        }
        da.v[i] = sa;
    }
    return anomaly_scores(dt, da, alpha);
}

std::shared_ptr<const Tensor> dense_adjacency_tensor(const Graph& g) {
    const auto& adj = g.adjacency();
    auto t = std::make_shared<Tensor>(adj.nodes, adj.nodes);
    for (std::size_t i = 0; i < adj.nodes; ++i)
        for (NodeId j : adj.row(i)) t->at(i, std::size_t(j)) = 1.0;
    return t;
}

std::shared_ptr<const Tensor> attribute_tensor(const Graph& g) {
    const auto& m = g.attributes();
    auto t = std::make_shared<Tensor>(m.rows, m.cols);
    t->v = m.data;
    return t;
}

ForwardPass model_forward(std::shared_ptr<const Tensor> attrs,
                          std::shared_ptr<const Tensor> dense_adj,
                          std::shared_ptr<const SparseMatrix> a_norm,
                          const NeighborPool& pool, ModelParams& params,
                          const ModelConfig& cfg) {
    cfg.validate();
    ForwardPass fp;
    Tape& tape = fp.tape;
    const std::size_t n = attrs->rows;

    auto x = tape.constant(attrs);
    fp.embeddings = encode(tape, x, params);

    const Tensor& e_val = tape.value(fp.embeddings);
    fp.masked = mask_ids(e_val, center_anchor(e_val), cfg.mask_rate);

    fp.hidden = aggregate(tape, fp.embeddings, pool, fp.masked, params);
    fp.topo_recon = decode_topology(tape, fp.hidden);
    fp.attr_recon = decode_attribute(tape, fp.hidden, std::move(a_norm), params);

    auto d_topo = tape.rows_sqdist(fp.topo_recon, tape.constant(dense_adj));
    auto d_attr = tape.rows_sqdist(fp.attr_recon, tape.constant(attrs));
    const double inv_n = 1.0 / double(n);
    auto l_topo = tape.scale(tape.sum(d_topo), inv_n);
    auto l_attr = tape.scale(tape.sum(d_attr), inv_n);

    Tape::Id loss = tape.add(tape.scale(l_topo, 1.0 - cfg.alpha),
                             tape.scale(l_attr, cfg.alpha));
    if (cfg.lambda > 0.0) {
        Tape::Id reg = -1;
        for (auto* p : params.all()) {
            auto pid = tape.param(*p);
            auto sq = tape.sum(tape.mul(pid, pid));
            reg = reg < 0 ? sq : tape.add(reg, sq);
        }
        loss = tape.add(loss, tape.scale(reg, cfg.lambda));
    }
    fp.loss = loss;
    fp.loss_value = tape.value(loss).v[0];
    fp.topo_term = tape.value(l_topo).v[0];
    fp.attr_term = tape.value(l_attr).v[0];
    fp.scores = anomaly_scores(tape.value(d_topo), tape.value(d_attr), cfg.alpha);
    return fp;
}

}  // namespace randgad
