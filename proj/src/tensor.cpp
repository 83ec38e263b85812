#include "scout/tensor.hpp"

#include "scout/common.hpp"

namespace scout {

Tensor::Tensor(int r, int c, double v) : rows(r), cols(c) {
    check(r >= 0 && c >= 0, "tensor shape must be non-negative");
    data.assign(static_cast<size_t>(r) * c, v);
}

void Tensor::fill(double v) {
    for (auto& x : data) x = v;
}

}  // namespace scout
