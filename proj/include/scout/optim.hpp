#pragma once

#include <vector>

#include "scout/tensor.hpp"

namespace scout {

// RMSProp over externally owned parameter/gradient tensors.
// Update, per element: avg <- decay*avg + (1-decay)*g^2
//                      w   <- w - lr * g / (sqrt(avg) + eps)
// Attachment order fixes update order, which keeps runs repeatable.
class RmsProp {
  public:
    explicit RmsProp(double lr, double decay = 0.9, double eps = 1e-8)
        : lr_(lr), decay_(decay), eps_(eps) {}

    void attach(Tensor& value, Tensor& grad);
    void step();

    double lr() const { return lr_; }
    void set_lr(double lr) { lr_ = lr; }

    // moving averages in attachment order, for checkpointing
    std::vector<Tensor>& state() { return avg_; }
    const std::vector<Tensor>& state() const { return avg_; }
    int slots() const { return static_cast<int>(params_.size()); }

  private:
    struct Slot {
        Tensor* value;
        Tensor* grad;
    };
    double lr_, decay_, eps_;
    std::vector<Slot> params_;
    std::vector<Tensor> avg_;
};

}  // namespace scout
