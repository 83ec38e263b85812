#include "scout/optim.hpp"

#include <Eigen/Dense>
#include <cmath>

#include "scout/common.hpp"

namespace scout {

namespace {
using ArrMap = Eigen::Map<Eigen::ArrayXd>;
using CArrMap = Eigen::Map<const Eigen::ArrayXd>;
}  // namespace

void RmsProp::attach(Tensor& value, Tensor& grad) {
    check(value.same_shape(grad), "rmsprop: value/grad shape mismatch");
    params_.push_back({&value, &grad});
    avg_.emplace_back(value.rows, value.cols, 0.0);
}

void RmsProp::step() {
    // refuse to apply a non-finite gradient; better to halt than corrupt params
    for (size_t s = 0; s < params_.size(); ++s) {
        const Tensor& g = *params_[s].grad;
        if (!CArrMap(g.data.data(), g.size()).isFinite().all())
            fail("rmsprop: non-finite gradient");
    }
    for (size_t s = 0; s < params_.size(); ++s) {
        Tensor& w = *params_[s].value;
        const Tensor& g = *params_[s].grad;
        Tensor& a = avg_[s];
        ArrMap av(a.data.data(), a.size());
        ArrMap wv(w.data.data(), w.size());
        CArrMap gv(g.data.data(), g.size());
        av = decay_ * av + (1.0 - decay_) * gv.square();
        wv -= lr_ * gv / (av.sqrt() + eps_);
    }
}

}  // namespace scout
