#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "graph.hpp"
#include "rng.hpp"

namespace randgad {

// Dense 2-D tensor of doubles (vectors are 1xC or Rx1).
struct Tensor {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> v;

    Tensor() = default;
    Tensor(std::size_t r, std::size_t c) : rows(r), cols(c), v(r * c, 0.0) {}

    static Tensor full(std::size_t r, std::size_t c, double x) {
        Tensor t(r, c);
        std::fill(t.v.begin(), t.v.end(), x);
        return t;
    }

    std::size_t size() const { return v.size(); }
    double& at(std::size_t i, std::size_t j) { return v[i * cols + j]; }
    double at(std::size_t i, std::size_t j) const { return v[i * cols + j]; }
    std::span<double> row(std::size_t i) { return {v.data() + i * cols, cols}; }
    std::span<const double> row(std::size_t i) const {
        return {v.data() + i * cols, cols};
    }
    bool same_shape(const Tensor& o) const {
        return rows == o.rows && cols == o.cols;
    }
};

// Trainable tensor with persistent gradient accumulator.
struct Parameter {
    std::string name;
    Tensor value;
    Tensor grad;

    Parameter() = default;
    Parameter(std::string n, Tensor val)
        : name(std::move(n)), value(std::move(val)),
          grad(value.rows, value.cols) {}

    void zero_grad() { std::fill(grad.v.begin(), grad.v.end(), 0.0); }
};

// Uniform on [-a, a] with a = sqrt(6 / (rows + cols)).
Tensor xavier_init(std::size_t rows, std::size_t cols, Rng& rng);

// Reverse-mode tape over a fixed op set. A tape records one forward pass;
// backward() accumulates into the bound Parameters' grad buffers. Non-finite
// op outputs raise NumericError.
class Tape {
public:
    using Id = std::int32_t;

    Id constant(Tensor t);
    Id constant(std::shared_ptr<const Tensor> t);
    Id param(Parameter& p);

    Id matmul(Id a, Id b);
    Id add(Id a, Id b);
    Id sub(Id a, Id b);
    Id mul(Id a, Id b);            // elementwise
    Id tanh(Id a);
    Id transpose(Id a);
    Id concat_rows(const std::vector<Id>& parts);
    Id gather_rows(Id a, std::vector<NodeId> idx);
    Id mean_rows(Id a);            // RxC -> 1xC
    Id sum_rows(Id a);             // RxC -> 1xC
    Id rows_sqdist(Id a, Id b);    // RxC,RxC -> Rx1 squared L2 per row
    Id sum(Id a);                  // -> 1x1
    Id scale(Id a, double c);
    Id spmm(std::shared_ptr<const SparseMatrix> m, Id x);  // constant sparse left factor

    const Tensor& value(Id id) const { return *slots_[std::size_t(id)].val; }
    std::size_t node_count() const { return slots_.size(); }

    // loss must be 1x1; gradients of all reachable Parameters accumulate.
    void backward(Id loss);

private:
    struct Slot {
        std::shared_ptr<const Tensor> val;
        Tensor grad;                       // empty until needed
        bool needs_grad = false;
        Parameter* bound = nullptr;
        std::function<void(Tape&, Id)> back;
    };

    Id push(Tensor value, bool needs_grad, std::function<void(Tape&, Id)> back);
    Tensor& grad_of(Id id);
    bool needs(Id id) const { return slots_[std::size_t(id)].needs_grad; }
    const Tensor& val_of(Id id) const { return *slots_[std::size_t(id)].val; }

    std::vector<Slot> slots_;
};

struct AdamConfig {
    double learning_rate = 1e-2;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

// Standard Adam with bias correction; step() consumes and clears grads.
class Adam {
public:
    Adam(std::vector<Parameter*> params, AdamConfig cfg);

    void step();
    std::uint64_t steps() const { return t_; }

private:
    std::vector<Parameter*> params_;
    AdamConfig cfg_;
    std::vector<Tensor> m_;
    std::vector<Tensor> v_;
    std::uint64_t t_ = 0;
};

// Checkpoint format: JSON manifest (names, shapes, blob offsets) plus a raw
// little-endian float64 blob.
void save_checkpoint(const std::vector<const Parameter*>& params,
                     const std::string& json_path, const std::string& blob_path);
void load_checkpoint(std::vector<Parameter*>& params,
                     const std::string& json_path, const std::string& blob_path);

}  // namespace randgad
