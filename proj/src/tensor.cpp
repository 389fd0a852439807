#include "tensor.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <fstream>

#include <json.hpp>

#include "errors.hpp"

namespace randgad {

namespace {

using EMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Map = Eigen::Map<EMat>;
using CMap = Eigen::Map<const EMat>;

CMap cmap(const Tensor& t) {
    return CMap(t.v.data(), Eigen::Index(t.rows), Eigen::Index(t.cols));
}

Map mmap(Tensor& t) {
    return Map(t.v.data(), Eigen::Index(t.rows), Eigen::Index(t.cols));
}

void check_finite(const Tensor& t, const char* op) {
    for (double x : t.v)
        if (!std::isfinite(x))
            throw NumericError(std::string("non-finite value produced by op '") +
                               op + "'");
}

}  // namespace

Tensor xavier_init(std::size_t rows, std::size_t cols, Rng& rng) {
    if (rows == 0 || cols == 0)
        throw ArgumentError("xavier_init: dimensions must be positive");
    const double a = std::sqrt(6.0 / double(rows + cols));
    Tensor t(rows, cols);
    for (auto& x : t.v) x = rng.next_real(-a, a);
    return t;
}

Tape::Id Tape::push(Tensor value, bool needs_grad,
                    std::function<void(Tape&, Id)> back) {
    Slot s;
    s.val = std::make_shared<const Tensor>(std::move(value));
    s.needs_grad = needs_grad;
    s.back = std::move(back);
    slots_.push_back(std::move(s));
    return Id(slots_.size() - 1);
}

Tensor& Tape::grad_of(Id id) {
    Slot& s = slots_[std::size_t(id)];
    if (s.grad.v.empty()) s.grad = Tensor(s.val->rows, s.val->cols);
    return s.grad;
}

Tape::Id Tape::constant(Tensor t) {
    return constant(std::make_shared<const Tensor>(std::move(t)));
}

Tape::Id Tape::constant(std::shared_ptr<const Tensor> t) {
    Slot s;
    s.val = std::move(t);
    slots_.push_back(std::move(s));
    return Id(slots_.size() - 1);
}

Tape::Id Tape::param(Parameter& p) {
    Slot s;
    // Aliasing the parameter value is safe: the tape lives within one step.
    s.val = std::shared_ptr<const Tensor>(&p.value, [](const Tensor*) {});
    s.needs_grad = true;
    s.bound = &p;
    slots_.push_back(std::move(s));
    return Id(slots_.size() - 1);
}

Tape::Id Tape::matmul(Id a, Id b) {
    const Tensor& A = val_of(a);
    const Tensor& B = val_of(b);
    if (A.cols != B.rows) throw ArgumentError("matmul: inner dimensions differ");
    Tensor out(A.rows, B.cols);
    mmap(out).noalias() = cmap(A) * cmap(B);
    check_finite(out, "matmul");
    return push(std::move(out), needs(a) || needs(b), [a, b](Tape& t, Id self) {
        const Tensor& G = t.slots_[std::size_t(self)].grad;
        if (t.needs(a))
            mmap(t.grad_of(a)).noalias() += cmap(G) * cmap(t.val_of(b)).transpose();
        if (t.needs(b))
            mmap(t.grad_of(b)).noalias() += cmap(t.val_of(a)).transpose() * cmap(G);
    });
}

Tape::Id Tape::add(Id a, Id b) {
    const Tensor& A = val_of(a);
    const Tensor& B = val_of(b);
    if (!A.same_shape(B)) throw ArgumentError("add: shape mismatch");
    Tensor out(A.rows, A.cols);
    mmap(out) = cmap(A) + cmap(B);
    check_finite(out, "add");
    return push(std::move(out), needs(a) || needs(b), [a, b](Tape& t, Id self) {
        const Tensor& G = t.slots_[std::size_t(self)].grad;
        if (t.needs(a)) mmap(t.grad_of(a)) += cmap(G);
        if (t.needs(b)) mmap(t.grad_of(b)) += cmap(G);
    });
}

Tape::Id Tape::sub(Id a, Id b) {
    const Tensor& A = val_of(a);
    const Tensor& B = val_of(b);
    if (!A.same_shape(B)) throw ArgumentError("sub: shape mismatch");
    Tensor out(A.rows, A.cols);
    mmap(out) = cmap(A) - cmap(B);
    check_finite(out, "sub");
    return push(std::move(out), needs(a) || needs(b), [a, b](Tape& t, Id self) {
        const Tensor& G = t.slots_[std::size_t(self)].grad;
        if (t.needs(a)) mmap(t.grad_of(a)) += cmap(G);
        if (t.needs(b)) mmap(t.grad_of(b)) -= cmap(G);
    });
}

Tape::Id Tape::mul(Id a, Id b) {
    const Tensor& A = val_of(a);
    const Tensor& B = val_of(b);
    if (!A.same_shape(B)) throw ArgumentError("mul: shape mismatch");
    Tensor out(A.rows, A.cols);
    mmap(out) = cmap(A).cwiseProduct(cmap(B));
    check_finite(out, "mul");
    return push(std::move(out), needs(a) || needs(b), [a, b](Tape& t, Id self) {
        const Tensor& G = t.slots_[std::size_t(self)].grad;
        if (t.needs(a))
            mmap(t.grad_of(a)) += cmap(G).cwiseProduct(cmap(t.val_of(b)));
        if (t.needs(b))
            mmap(t.grad_of(b)) += cmap(G).cwiseProduct(cmap(t.val_of(a)));
    });
}

Tape::Id Tape::tanh(Id a) {
    const Tensor& A = val_of(a);
    Tensor out(A.rows, A.cols);
    for (std::size_t i = 0; i < A.v.size(); ++i) out.v[i] = std::tanh(A.v[i]);
    check_finite(out, "tanh");
    return push(std::move(out), needs(a), [a](Tape& t, Id self) {
        if (!t.needs(a)) return;
        const Tensor& G = t.slots_[std::size_t(self)].grad;
        const Tensor& Y = t.val_of(self);
        Tensor& ga = t.grad_of(a);
        for (std::size_t i = 0; i < G.v.size(); ++i)
            ga.v[i] += G.v[i] * (1.0 - Y.v[i] * Y.v[i]);
    });
}

Tape::Id Tape::transpose(Id a) {
    const Tensor& A = val_of(a);
    Tensor out(A.cols, A.rows);
    mmap(out) = cmap(A).transpose();
    return push(std::move(out), needs(a), [a](Tape& t, Id self) {
        if (!t.needs(a)) return;
        const Tensor& G = t.slots_[std::size_t(self)].grad;
        mmap(t.grad_of(a)) += cmap(G).transpose();
    });
}

Tape::Id Tape::concat_rows(const std::vector<Id>& parts) {
    if (parts.empty()) throw ArgumentError("concat_rows: empty part list");
    const std::size_t cols = val_of(parts[0]).cols;
    std::size_t rows = 0;
    bool any_grad = false;
    for (Id p : parts) {
        if (val_of(p).cols != cols)
            throw ArgumentError("concat_rows: column mismatch");
        rows += val_of(p).rows;
        any_grad = any_grad || needs(p);
    }
    Tensor out(rows, cols);
    std::size_t at = 0;
    for (Id p : parts) {
        const Tensor& P = val_of(p);
        std::copy(P.v.begin(), P.v.end(), out.v.begin() + at * cols);
        at += P.rows;
    }
    return push(std::move(out), any_grad,
                [parts](Tape& t, Id self) {
                    const Tensor& G = t.slots_[std::size_t(self)].grad;
                    std::size_t at = 0;
                    for (Id p : parts) {
                        const std::size_t r = t.val_of(p).rows;
                        if (t.needs(p)) {
                            Tensor& gp = t.grad_of(p);
                            const std::size_t c = gp.cols;
                            for (std::size_t i = 0; i < r * c; ++i)
                                gp.v[i] += G.v[at * c + i];
                        }
                        at += r;
                    }
                });
}

Tape::Id Tape::gather_rows(Id a, std::vector<NodeId> idx) {
    const Tensor& A = val_of(a);
    for (NodeId i : idx)
        if (i < 0 || std::size_t(i) >= A.rows)
            throw ArgumentError("gather_rows: index out of range");
    Tensor out(idx.size(), A.cols);
    for (std::size_t r = 0; r < idx.size(); ++r) {
        auto src = A.row(std::size_t(idx[r]));
        std::copy(src.begin(), src.end(), out.row(r).begin());
    }
    return push(std::move(out), needs(a),
                [a, idx = std::move(idx)](Tape& t, Id self) {
                    if (!t.needs(a)) return;
                    const Tensor& G = t.slots_[std::size_t(self)].grad;
                    Tensor& ga = t.grad_of(a);
                    for (std::size_t r = 0; r < idx.size(); ++r) {
                        auto dst = ga.row(std::size_t(idx[r]));
                        auto src = G.row(r);
                        for (std::size_t j = 0; j < dst.size(); ++j) dst[j] += src[j];
                    }
                });
}

Tape::Id Tape::mean_rows(Id a) {
    const Tensor& A = val_of(a);
    if (A.rows == 0) throw ArgumentError("mean_rows: empty tensor");
    Tensor out(1, A.cols);
    mmap(out) = cmap(A).colwise().mean();
    check_finite(out, "mean_rows");
    return push(std::move(out), needs(a), [a](Tape& t, Id self) {
        if (!t.needs(a)) return;
        const Tensor& G = t.slots_[std::size_t(self)].grad;
        Tensor& ga = t.grad_of(a);
        const double inv = 1.0 / double(ga.rows);
        for (std::size_t i = 0; i < ga.rows; ++i)
            for (std::size_t j = 0; j < ga.cols; ++j)
                ga.at(i, j) += G.v[j] * inv;
    });
}

Tape::Id Tape::sum_rows(Id a) {
    const Tensor& A = val_of(a);
    if (A.rows == 0) throw ArgumentError("sum_rows: empty tensor");
    Tensor out(1, A.cols);
    mmap(out) = cmap(A).colwise().sum();
    check_finite(out, "sum_rows");
    return push(std::move(out), needs(a), [a](Tape& t, Id self) {
        if (!t.needs(a)) return;
        const Tensor& G = t.slots_[std::size_t(self)].grad;
        Tensor& ga = t.grad_of(a);
        for (std::size_t i = 0; i < ga.rows; ++i)
            for (std::size_t j = 0; j < ga.cols; ++j) ga.at(i, j) += G.v[j];
    });
}

Tape::Id Tape::rows_sqdist(Id a, Id b) {
    const Tensor& A = val_of(a);
    const Tensor& B = val_of(b);
    if (!A.same_shape(B)) throw ArgumentError("rows_sqdist: shape mismatch");
    Tensor out(A.rows, 1);
    for (std::size_t i = 0; i < A.rows; ++i) {
        double s = 0.0;
        auto ra = A.row(i);
        auto rb = B.row(i);
        for (std::size_t j = 0; j < A.cols; ++j) {
            const double d = ra[j] - rb[j];
            s += d * d;
        }
        out.v[i] = s;
    }
    check_finite(out, "rows_sqdist");
    return push(std::move(out), needs(a) || needs(b), [a, b](Tape& t, Id self) {
        const Tensor& G = t.slots_[std::size_t(self)].grad;
        const Tensor& A = t.val_of(a);
        const Tensor& B = t.val_of(b);
        for (std::size_t i = 0; i < A.rows; ++i) {
            const double g2 = 2.0 * G.v[i];
            if (g2 == 0.0) continue;
            if (t.needs(a)) {
                auto dst = t.grad_of(a).row(i);
                auto ra = A.row(i);
                auto rb = B.row(i);
                for (std::size_t j = 0; j < A.cols; ++j)
                    dst[j] += g2 * (ra[j] - rb[j]);
            }
            if (t.needs(b)) {
                auto dst = t.grad_of(b).row(i);
                auto ra = A.row(i);
                auto rb = B.row(i);
                for (std::size_t j = 0; j < A.cols; ++j)
                    dst[j] -= g2 * (ra[j] - rb[j]);
            }
        }
    });
}

Tape::Id Tape::sum(Id a) {
    const Tensor& A = val_of(a);
    Tensor out(1, 1);
    out.v[0] = cmap(A).sum();
    check_finite(out, "sum");
    return push(std::move(out), needs(a), [a](Tape& t, Id self) {
        if (!t.needs(a)) return;
        const double g = t.slots_[std::size_t(self)].grad.v[0];
        Tensor& ga = t.grad_of(a);
        for (auto& x : ga.v) x += g;
    });
}

Tape::Id Tape::scale(Id a, double c) {
    const Tensor& A = val_of(a);
    Tensor out(A.rows, A.cols);
    mmap(out) = cmap(A) * c;
    check_finite(out, "scale");
    return push(std::move(out), needs(a), [a, c](Tape& t, Id self) {
        if (!t.needs(a)) return;
        const Tensor& G = t.slots_[std::size_t(self)].grad;
        mmap(t.grad_of(a)) += cmap(G) * c;
    });
}

Tape::Id Tape::spmm(std::shared_ptr<const SparseMatrix> m, Id x) {
    const Tensor& X = val_of(x);
    if (m->cols != X.rows) throw ArgumentError("spmm: inner dimensions differ");
    Tensor out(m->rows, X.cols);
    for (std::size_t i = 0; i < m->rows; ++i) {
        auto idx = m->row_indices(i);
        auto val = m->row_values(i);
        auto dst = out.row(i);
        for (std::size_t k = 0; k < idx.size(); ++k) {
            const double v = val[k];
            auto src = X.row(std::size_t(idx[k]));
            for (std::size_t j = 0; j < X.cols; ++j) dst[j] += v * src[j];
        }
    }
    check_finite(out, "spmm");
    return push(std::move(out), needs(x),
                [m = std::move(m), x](Tape& t, Id self) {
                    if (!t.needs(x)) return;
                    const Tensor& G = t.slots_[std::size_t(self)].grad;
                    Tensor& gx = t.grad_of(x);
                    // grad_X += m^T * G via row scatter.
                    for (std::size_t i = 0; i < m->rows; ++i) {
                        auto idx = m->row_indices(i);
                        auto val = m->row_values(i);
                        auto src = G.row(i);
                        for (std::size_t k = 0; k < idx.size(); ++k) {
                            auto dst = gx.row(std::size_t(idx[k]));
                            const double v = val[k];
                            for (std::size_t j = 0; j < gx.cols; ++j)
                                dst[j] += v * src[j];
                        }
                    }
                });
}

void Tape::backward(Id loss) {
    const Tensor& L = val_of(loss);
    if (L.rows != 1 || L.cols != 1)
        throw ArgumentError("backward: loss must be a 1x1 tensor");
    grad_of(loss).v[0] = 1.0;
    for (Id id = loss; id >= 0; --id) {
        Slot& s = slots_[std::size_t(id)];
        if (s.grad.v.empty() || !s.needs_grad) continue;
        if (s.back) s.back(*this, id);
        if (s.bound) {
            Tensor& pg = s.bound->grad;
            for (std::size_t i = 0; i < pg.v.size(); ++i) pg.v[i] += s.grad.v[i];
            check_finite(pg, "backward");
        }
    }
}

Adam::Adam(std::vector<Parameter*> params, AdamConfig cfg)
    : params_(std::move(params)), cfg_(cfg) {
    m_.reserve(params_.size());
    v_.reserve(params_.size());
    for (auto* p : params_) {
        m_.emplace_back(p->value.rows, p->value.cols);
        v_.emplace_back(p->value.rows, p->value.cols);
    }
}

void Adam::step() {
    ++t_;
    const double bc1 = 1.0 - std::pow(cfg_.beta1, double(t_));
    const double bc2 = 1.0 - std::pow(cfg_.beta2, double(t_));
    for (std::size_t k = 0; k < params_.size(); ++k) {
        Parameter& p = *params_[k];
        for (std::size_t i = 0; i < p.value.v.size(); ++i) {
            const double g = p.grad.v[i];
            m_[k].v[i] = cfg_.beta1 * m_[k].v[i] + (1.0 - cfg_.beta1) * g;
            v_[k].v[i] = cfg_.beta2 * v_[k].v[i] + (1.0 - cfg_.beta2) * g * g;
            const double mhat = m_[k].v[i] / bc1;
            const double vhat = v_[k].v[i] / bc2;
            p.value.v[i] -=
                cfg_.learning_rate * mhat / (std::sqrt(vhat) + cfg_.epsilon);
        }
        p.zero_grad();
    }
}

void save_checkpoint(const std::vector<const Parameter*>& params,
                     const std::string& json_path, const std::string& blob_path) {
    nlohmann::json manifest;
    manifest["format"] = "randgad-checkpoint-v1";
    manifest["blob"] = blob_path.substr(blob_path.find_last_of('/') + 1);
    auto& list = manifest["tensors"] = nlohmann::json::array();

    std::ofstream blob(blob_path, std::ios::binary);
    if (!blob) throw DataError("cannot write checkpoint blob: " + blob_path);
    std::uint64_t offset = 0;
    for (const auto* p : params) {
        nlohmann::json entry;
        entry["name"] = p->name;
        entry["rows"] = p->value.rows;
        entry["cols"] = p->value.cols;
        entry["offset"] = offset;
        list.push_back(entry);
        static_assert(sizeof(double) == 8);
        blob.write(reinterpret_cast<const char*>(p->value.v.data()),
                   std::streamsize(p->value.v.size() * 8));
        offset += p->value.v.size() * 8;
    }
    std::ofstream json(json_path);
    if (!json) throw DataError("cannot write checkpoint manifest: " + json_path);
    json << manifest.dump(2) << '\n';
}

void load_checkpoint(std::vector<Parameter*>& params,
                     const std::string& json_path, const std::string& blob_path) {
    std::ifstream json(json_path);
    if (!json) throw DataError("cannot read checkpoint manifest: " + json_path);
    nlohmann::json manifest = nlohmann::json::parse(json, nullptr, true, true);
    const auto& list = manifest.at("tensors");
    if (list.size() != params.size())
        throw DataError("checkpoint tensor count mismatch");

    std::ifstream blob(blob_path, std::ios::binary);
    if (!blob) throw DataError("cannot read checkpoint blob: " + blob_path);
    for (std::size_t k = 0; k < params.size(); ++k) {
        const auto& entry = list[k];
        Parameter& p = *params[k];
        if (entry.at("name").get<std::string>() != p.name ||
            entry.at("rows").get<std::size_t>() != p.value.rows ||
            entry.at("cols").get<std::size_t>() != p.value.cols)
            throw DataError("checkpoint entry mismatch for parameter " + p.name);
        blob.seekg(std::streamoff(entry.at("offset").get<std::uint64_t>()));
        blob.read(reinterpret_cast<char*>(p.value.v.data()),
                  std::streamsize(p.value.v.size() * 8));
        if (!blob) throw DataError("truncated checkpoint blob");
    }
}

}  // namespace randgad
