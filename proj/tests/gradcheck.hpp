#pragma once

// Central finite-difference gradient oracle, independent of the tape's
// backward pass: only forward evaluations are used to form the reference.

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "tensor.hpp"

namespace testsupport {

// Builds the loss on a fresh tape from the current parameter values.
using LossBuilder = std::function<randgad::Tape::Id(randgad::Tape&)>;

struct GradCheckResult {
    double worst_rel = 0.0;
    std::string worst_at;
};

inline double eval_loss(const LossBuilder& build) {
    randgad::Tape tape;
    return tape.value(build(tape)).v[0];
}

inline GradCheckResult check_gradients(std::vector<randgad::Parameter*> params,
                                       const LossBuilder& build,
                                       double step = 1e-5) {
    for (auto* p : params) p->zero_grad();
    {
        randgad::Tape tape;
        auto loss = build(tape);
        tape.backward(loss);
    }
    GradCheckResult res;
    for (auto* p : params) {
        for (std::size_t i = 0; i < p->value.v.size(); ++i) {
            const double orig = p->value.v[i];
            p->value.v[i] = orig + step;
            const double up = eval_loss(build);
            p->value.v[i] = orig - step;
            const double down = eval_loss(build);
            p->value.v[i] = orig;
            const double fd = (up - down) / (2.0 * step);
            const double an = p->grad.v[i];
            const double rel =
                std::abs(fd - an) / std::max({1.0, std::abs(fd), std::abs(an)});
            if (rel > res.worst_rel) {
                res.worst_rel = rel;
                res.worst_at = p->name + "[" + std::to_string(i) + "]";
            }
        }
    }
    return res;
}

}  // namespace testsupport
