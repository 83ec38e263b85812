#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <utility>
#include <vector>

#include "scout/tensor.hpp"

namespace scout::testing {

// Central finite differences on every element of the given tensors, compared
// against analytic gradients already accumulated in the paired grad buffers.
// Returns the worst relative error. eval() must recompute the loss from the
// current tensor values.
//
// Convention: rel = |fd - an| / max(|fd|, |an|) when that scale exceeds 1e-6;
// below it both values are within finite-difference noise of zero, so the
// comparison degrades to |fd - an| / 1e-6.
inline double fd_worst_rel_err(const std::function<double()>& eval,
                               const std::vector<std::pair<Tensor*, Tensor*>>& params,
                               double h = 1e-5) {
    double worst = 0.0;
    for (auto& [value, grad] : params) {
        for (size_t k = 0; k < value->size(); ++k) {
            double saved = value->data[k];
            value->data[k] = saved + h;
            double fp = eval();
            value->data[k] = saved - h;
            double fm = eval();
            value->data[k] = saved;
            double fd = (fp - fm) / (2.0 * h);
            double an = grad->data[k];
            double scale = std::max(std::fabs(fd), std::fabs(an));
            double rel = std::fabs(fd - an) / std::max(scale, 1e-6);
            if (rel > worst) worst = rel;
        }
    }
    return worst;
}

}  // namespace scout::testing
