#include "scout/mlp.hpp"

#include <cmath>

#include "kernels.hpp"
#include "scout/common.hpp"

namespace scout {

Mlp::Mlp(int in_dim, std::vector<LayerSpec> specs) : in_dim_(in_dim) {
    check(in_dim > 0, "mlp: input dim must be positive");
    check(!specs.empty(), "mlp: need at least one layer");
    int d = in_dim;
    for (const auto& s : specs) {
        check(s.out > 0, "mlp: layer width must be positive");
        Layer l;
        l.W = Tensor(d, s.out);
        l.b = Tensor(1, s.out);
        l.gW = Tensor(d, s.out);
        l.gb = Tensor(1, s.out);
        l.act = s.act;
        l.dropout = s.dropout;
        layers_.push_back(std::move(l));
        d = s.out;
    }
}

int Mlp::out_dim() const {
    check(!layers_.empty(), "mlp: uninitialized");
    return layers_.back().W.cols;
}

std::vector<LayerSpec> Mlp::layer_specs() const {
    std::vector<LayerSpec> out;
    for (const auto& l : layers_) out.push_back({l.W.cols, l.act, l.dropout});
    return out;
}

void Mlp::init(Rng& rng) {
    for (auto& l : layers_) {
        double limit = std::sqrt(6.0 / (l.W.rows + l.W.cols));
        for (auto& w : l.W.data) w = rng.uniform(-limit, limit);
        l.b.zero();
    }
}

Tensor Mlp::forward(const Tensor& x) const {
    check(x.cols == in_dim_, "mlp: input dim mismatch");
    Tensor h = x;
    for (const auto& l : layers_) {
        Tensor y;
        kern::affine(h, l.W, l.b, y);
        if (l.act == Act::Tanh) {
            for (auto& v : y.data) v = std::tanh(v);
        } else if (l.act == Act::Relu) {
            for (auto& v : y.data) v = v > 0.0 ? v : 0.0;
        }
        h = std::move(y);
    }
    return h;
}

Mlp::Bound Mlp::bind(Tape& t) {
    Bound b;
    for (auto& l : layers_) b.wb.emplace_back(t.param(l.W, l.gW), t.param(l.b, l.gb));
    return b;
}

int Mlp::forward_tape(Tape& t, const Bound& bound, int x, Rng* dropout_rng) {
    check(bound.wb.size() == layers_.size(), "mlp: bound/layer count mismatch");
    int h = x;
    for (size_t i = 0; i < layers_.size(); ++i) {
        h = t.dense(h, bound.wb[i].first, bound.wb[i].second);
        if (layers_[i].act == Act::Tanh) h = t.tanh_op(h);
        else if (layers_[i].act == Act::Relu) h = t.relu_op(h);
        if (layers_[i].dropout > 0.0 && dropout_rng != nullptr)
            h = t.dropout(h, layers_[i].dropout, *dropout_rng);
    }
    return h;
}

void Mlp::attach(RmsProp& opt) {
    for (auto& l : layers_) {
        opt.attach(l.W, l.gW);
        opt.attach(l.b, l.gb);
    }
}

void Mlp::copy_params_from(const Mlp& src) {
    check(src.layers_.size() == layers_.size(), "mlp: copy shape mismatch");
    for (size_t i = 0; i < layers_.size(); ++i) {
        check(src.layers_[i].W.same_shape(layers_[i].W), "mlp: copy shape mismatch");
        layers_[i].W.data = src.layers_[i].W.data;
        layers_[i].b.data = src.layers_[i].b.data;
    }
}

std::vector<Tensor*> Mlp::param_tensors() {
    std::vector<Tensor*> out;
    for (auto& l : layers_) {
        out.push_back(&l.W);
        out.push_back(&l.b);
    }
    return out;
}

std::vector<const Tensor*> Mlp::param_tensors() const {
    std::vector<const Tensor*> out;
    for (const auto& l : layers_) {
        out.push_back(&l.W);
        out.push_back(&l.b);
    }
    return out;
}

std::vector<Tensor*> Mlp::grad_tensors() {
    std::vector<Tensor*> out;
    for (auto& l : layers_) {
        out.push_back(&l.gW);
        out.push_back(&l.gb);
    }
    return out;
}

}  // namespace scout
