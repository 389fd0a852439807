#pragma once

#include <memory>
#include <vector>

#include "graph.hpp"
#include "pool.hpp"
#include "rng.hpp"
#include "tensor.hpp"

namespace randgad {

struct ModelConfig {
    std::size_t embedding = 64;  // h
    double mask_rate = 0.03;     // fraction of nodes barred from receiving
    double alpha = 0.5;          // attribute-vs-topology blend
    double lambda = 0.0;         // L2 regularizer coefficient
    enum class Decoder { GraphConv, Mlp2 };
    Decoder decoder = Decoder::GraphConv;

    void validate() const;
};

struct ModelParams {
    Parameter enc1;  // d x h
    Parameter enc2;  // h x h
    Parameter att;   // h x h
    Parameter mp;    // h x h
    Parameter dec1;  // GraphConv: h x d; Mlp2: h x h
    Parameter dec2;  // Mlp2 only: h x d
    ModelConfig::Decoder decoder = ModelConfig::Decoder::GraphConv;

    static ModelParams init(std::size_t attr_dim, const ModelConfig& cfg, Rng& rng);
    std::vector<Parameter*> all();
    std::vector<const Parameter*> all() const;
    void zero_grads();
};

// E = tanh(tanh(X enc1) enc2)
Tape::Id encode(Tape& tape, Tape::Id x, ModelParams& params);

// Mean-pooled readout over all node embeddings (1 x h).
Tensor center_anchor(const Tensor& embeddings);

// The floor(mr*n) nodes with the largest squared distance to the anchor,
// ties toward lower index; returned sorted ascending.
std::vector<NodeId> mask_ids(const Tensor& embeddings, const Tensor& anchor,
                             double mask_rate);

// Distinguishing message passing over the cached selections: masked nodes
// keep their encoding; every other node aggregates tanh-gated messages from
// itself and its selected neighborhood, then projects through mp.
Tape::Id aggregate(Tape& tape, Tape::Id embeddings, const NeighborPool& pool,
                   std::span<const NodeId> masked_sorted, ModelParams& params);

// A_hat = H H^T
Tape::Id decode_topology(Tape& tape, Tape::Id hidden);

// GraphConv: tanh(A_norm H) dec1. Mlp2: tanh(H dec1) dec2.
Tape::Id decode_attribute(Tape& tape, Tape::Id hidden,
                          std::shared_ptr<const SparseMatrix> a_norm,
                          ModelParams& params);

// score_i = (1-alpha) d_topo_i + alpha d_attr_i from per-row error vectors.
std::vector<double> anomaly_scores(const Tensor& d_topo, const Tensor& d_attr,
                                   double alpha);
// Same, computed from raw reconstructions (value-level, no tape).
std::vector<double> anomaly_scores(const Tensor& a, const Tensor& a_hat,
                                   const Tensor& x, const Tensor& x_hat,
                                   double alpha);

// One full differentiable pass: encode, mask, aggregate, decode, loss.
struct ForwardPass {
    Tape tape;
    Tape::Id embeddings = -1;
    Tape::Id hidden = -1;
    Tape::Id topo_recon = -1;
    Tape::Id attr_recon = -1;
    Tape::Id loss = -1;
    std::vector<NodeId> masked;   // sorted ascending
    std::vector<double> scores;   // length n
    double loss_value = 0.0;
    double topo_term = 0.0;       // mean topology reconstruction error
    double attr_term = 0.0;       // mean attribute reconstruction error
};

ForwardPass model_forward(std::shared_ptr<const Tensor> attrs,
                          std::shared_ptr<const Tensor> dense_adj,
                          std::shared_ptr<const SparseMatrix> a_norm,
                          const NeighborPool& pool, ModelParams& params,
                          const ModelConfig& cfg);

// Dense copies used as reconstruction targets.
std::shared_ptr<const Tensor> dense_adjacency_tensor(const Graph& g);
std::shared_ptr<const Tensor> attribute_tensor(const Graph& g);

}  // namespace randgad
