#include "scout/tape.hpp"

#include <cmath>

#include "kernels.hpp"
#include "scout/common.hpp"

namespace scout {

int Tape::push(Node n) {
    nodes_.push_back(std::move(n));
    return static_cast<int>(nodes_.size()) - 1;
}

void Tape::check_id(int id) const {
    check(id >= 0 && id < size(), "tape: node id out of range");
}

const Tensor& Tape::val(int id) const {
    check_id(id);
    return value_of(nodes_[id]);
}

double Tape::scalar_val(int id) const {
    const Tensor& v = val(id);
    check(v.rows == 1 && v.cols == 1, "tape: node is not scalar");
    return v.data[0];
}

const Tensor& Tape::node_grad(int id) const {
    check_id(id);
    check(nodes_[id].op != Op::Param, "tape: param grads live in bound storage");
    return nodes_[id].grad;
}

void Tape::clear() { nodes_.clear(); }

int Tape::input(Tensor v) {
    Node n;
    n.op = Op::Input;
    n.val = std::move(v);
    return push(std::move(n));
}

int Tape::param(Tensor& value, Tensor& grad) {
    check(value.same_shape(grad), "tape: param value/grad shape mismatch");
    Node n;
    n.op = Op::Param;
    n.pval = &value;
    n.pgrad = &grad;
    return push(std::move(n));
}

int Tape::detach(int x) {
    check_id(x);
    Node n;
    n.op = Op::Detach;
    n.val = val(x);
    return push(std::move(n));
}

int Tape::dense(int x, int w, int b) {
    check_id(x);
    check_id(w);
    check_id(b);
    Node n;
    n.op = Op::Dense;
    n.a = x;
    n.b = w;
    n.c = b;
    kern::affine(val(x), val(w), val(b), n.val);
    return push(std::move(n));
}

int Tape::tanh_op(int x) {
    check_id(x);
    Node n;
    n.op = Op::Tanh;
    n.a = x;
    n.val = val(x);
    for (auto& v : n.val.data) v = std::tanh(v);
    return push(std::move(n));
}

int Tape::relu_op(int x) {
    check_id(x);
    Node n;
    n.op = Op::Relu;
    n.a = x;
    n.val = val(x);
    for (auto& v : n.val.data) v = v > 0.0 ? v : 0.0;
    return push(std::move(n));
}

int Tape::exp_op(int x) {
    check_id(x);
    Node n;
    n.op = Op::Exp;
    n.a = x;
    n.val = val(x);
    for (auto& v : n.val.data) v = std::exp(v);
    return push(std::move(n));
}

int Tape::add(int a, int b) {
    check_id(a);
    check_id(b);
    check(val(a).same_shape(val(b)), "tape: add shape mismatch");
    Node n;
    n.op = Op::Add;
    n.a = a;
    n.b = b;
    n.val = val(a);
    const Tensor& vb = val(b);
    for (size_t i = 0; i < n.val.size(); ++i) n.val.data[i] += vb.data[i];
    return push(std::move(n));
}

int Tape::sub(int a, int b) {
    check_id(a);
    check_id(b);
    check(val(a).same_shape(val(b)), "tape: sub shape mismatch");
    Node n;
    n.op = Op::Sub;
    n.a = a;
    n.b = b;
    n.val = val(a);
    const Tensor& vb = val(b);
    for (size_t i = 0; i < n.val.size(); ++i) n.val.data[i] -= vb.data[i];
    return push(std::move(n));
}

int Tape::mul(int a, int b) {
    check_id(a);
    check_id(b);
    check(val(a).same_shape(val(b)), "tape: mul shape mismatch");
    Node n;
    n.op = Op::Mul;
    n.a = a;
    n.b = b;
    n.val = val(a);
    const Tensor& vb = val(b);
    for (size_t i = 0; i < n.val.size(); ++i) n.val.data[i] *= vb.data[i];
    return push(std::move(n));
}

int Tape::scale(int x, double c) {
    check_id(x);
    Node n;
    n.op = Op::Scale;
    n.a = x;
    n.scalar = c;
    n.val = val(x);
    for (auto& v : n.val.data) v *= c;
    return push(std::move(n));
}

int Tape::add_scalar(int x, double c) {
    check_id(x);
    Node n;
    n.op = Op::AddScalar;
    n.a = x;
    n.scalar = c;
    n.val = val(x);
    for (auto& v : n.val.data) v += c;
    return push(std::move(n));
}

int Tape::concat_cols(int a, int b) {
    check_id(a);
    check_id(b);
    const Tensor& va = val(a);
    const Tensor& vb = val(b);
    check(va.rows == vb.rows, "tape: concat_cols row mismatch");
    Node n;
    n.op = Op::ConcatCols;
    n.a = a;
    n.b = b;
    n.val = Tensor(va.rows, va.cols + vb.cols);
    for (int i = 0; i < va.rows; ++i) {
        for (int j = 0; j < va.cols; ++j) n.val.at(i, j) = va.at(i, j);
        for (int j = 0; j < vb.cols; ++j) n.val.at(i, va.cols + j) = vb.at(i, j);
    }
    return push(std::move(n));
}

int Tape::gather_rows(int x, std::vector<int> idx) {
    check_id(x);
    const Tensor& vx = val(x);
    Node n;
    n.op = Op::GatherRows;
    n.a = x;
    n.val = Tensor(static_cast<int>(idx.size()), vx.cols);
    for (size_t i = 0; i < idx.size(); ++i) {
        check(idx[i] >= 0 && idx[i] < vx.rows, "tape: gather_rows index out of range");
        for (int j = 0; j < vx.cols; ++j) n.val.at(static_cast<int>(i), j) = vx.at(idx[i], j);
    }
    n.idx = std::move(idx);
    return push(std::move(n));
}

int Tape::select_cols(int x, std::vector<int> idx) {
    check_id(x);
    const Tensor& vx = val(x);
    check(static_cast<int>(idx.size()) == vx.rows, "tape: select_cols needs one index per row");
    Node n;
    n.op = Op::SelectCols;
    n.a = x;
    n.val = Tensor(vx.rows, 1);
    for (int i = 0; i < vx.rows; ++i) {
        check(idx[i] >= 0 && idx[i] < vx.cols, "tape: select_cols index out of range");
        n.val.at(i, 0) = vx.at(i, idx[i]);
    }
    n.idx = std::move(idx);
    return push(std::move(n));
}

int Tape::l2_norm_rows(int x) {
    check_id(x);
    const Tensor& vx = val(x);
    Node n;
    n.op = Op::L2NormRows;
    n.a = x;
    n.val = Tensor(vx.rows, 1);
    for (int i = 0; i < vx.rows; ++i) {
        double s = 0.0;
        for (int j = 0; j < vx.cols; ++j) s += vx.at(i, j) * vx.at(i, j);
        n.val.at(i, 0) = std::sqrt(s);
    }
    return push(std::move(n));
}

int Tape::sum_rows(int x) {
    check_id(x);
    const Tensor& vx = val(x);
    Node n;
    n.op = Op::SumRows;
    n.a = x;
    n.val = Tensor(vx.rows, 1);
    for (int i = 0; i < vx.rows; ++i) {
        double s = 0.0;
        for (int j = 0; j < vx.cols; ++j) s += vx.at(i, j);
        n.val.at(i, 0) = s;
    }
    return push(std::move(n));
}

int Tape::sum(int x) {
    check_id(x);
    const Tensor& vx = val(x);
    double s = 0.0;
    for (double v : vx.data) s += v;
    Node n;
    n.op = Op::Sum;
    n.a = x;
    n.val = Tensor(1, 1, s);
    return push(std::move(n));
}

int Tape::mean(int x) {
    check_id(x);
    const Tensor& vx = val(x);
    check(vx.size() > 0, "tape: mean of empty tensor");
    double s = 0.0;
    for (double v : vx.data) s += v;
    Node n;
    n.op = Op::Mean;
    n.a = x;
    n.val = Tensor(1, 1, s / static_cast<double>(vx.size()));
    return push(std::move(n));
}

int Tape::dropout(int x, double rate, Rng& rng) {
    check_id(x);
    check(rate >= 0.0 && rate < 1.0, "tape: dropout rate must be in [0,1)");
    const Tensor& vx = val(x);
    Node n;
    n.op = Op::Dropout;
    n.a = x;
    n.mask = Tensor(vx.rows, vx.cols);
    double keep = 1.0 - rate;
    for (auto& m : n.mask.data) m = rng.uniform() < keep ? 1.0 / keep : 0.0;
    n.val = vx;
    for (size_t i = 0; i < n.val.size(); ++i) n.val.data[i] *= n.mask.data[i];
    return push(std::move(n));
}

void Tape::backward(int loss) {
    check_id(loss);
    {
        const Tensor& lv = val(loss);
        check(lv.rows == 1 && lv.cols == 1, "tape: backward needs a scalar loss");
    }

    for (int i = 0; i <= loss; ++i) {
        Node& n = nodes_[i];
        if (n.op == Op::Param) {
            n.pgrad->zero();
        } else {
            const Tensor& v = value_of(n);
            n.grad = Tensor(v.rows, v.cols, 0.0);
        }
    }
    grad_of(nodes_[loss]).fill(1.0);

    for (int i = loss; i >= 0; --i) {
        Node& n = nodes_[i];
        const Tensor& g = grad_of(n);
        switch (n.op) {
            case Op::Input:
            case Op::Param:
            case Op::Detach:
                break;
            case Op::Dense: {
                Node& nx = nodes_[n.a];
                Node& nw = nodes_[n.b];
                Node& nb = nodes_[n.c];
                // leaves absorb no gradient, and dy*W^T is the widest matmul here
                if (nx.op != Op::Input && nx.op != Op::Detach)
                    kern::acc_dx(g, value_of(nw), grad_of(nx));
                kern::acc_dw(value_of(nx), g, grad_of(nw));
                kern::acc_db(g, grad_of(nb));
                break;
            }
            case Op::Tanh: {
                Tensor& ga = grad_of(nodes_[n.a]);
                for (size_t k = 0; k < g.size(); ++k)
                    ga.data[k] += g.data[k] * (1.0 - n.val.data[k] * n.val.data[k]);
                break;
            }
            case Op::Relu: {
                Tensor& ga = grad_of(nodes_[n.a]);
                for (size_t k = 0; k < g.size(); ++k)
                    if (n.val.data[k] > 0.0) ga.data[k] += g.data[k];
                break;
            }
            case Op::Exp: {
                Tensor& ga = grad_of(nodes_[n.a]);
                for (size_t k = 0; k < g.size(); ++k) ga.data[k] += g.data[k] * n.val.data[k];
                break;
            }
            case Op::Add: {
                Tensor& ga = grad_of(nodes_[n.a]);
                for (size_t k = 0; k < g.size(); ++k) ga.data[k] += g.data[k];
                Tensor& gb = grad_of(nodes_[n.b]);
                for (size_t k = 0; k < g.size(); ++k) gb.data[k] += g.data[k];
                break;
            }
            case Op::Sub: {
                Tensor& ga = grad_of(nodes_[n.a]);
                for (size_t k = 0; k < g.size(); ++k) ga.data[k] += g.data[k];
                Tensor& gb = grad_of(nodes_[n.b]);
                for (size_t k = 0; k < g.size(); ++k) gb.data[k] -= g.data[k];
                break;
            }
            case Op::Mul: {
                const Tensor& va = value_of(nodes_[n.a]);
                const Tensor& vb = value_of(nodes_[n.b]);
                {
                    Tensor& ga = grad_of(nodes_[n.a]);
                    for (size_t k = 0; k < g.size(); ++k) ga.data[k] += g.data[k] * vb.data[k];
                }
                {
                    Tensor& gb = grad_of(nodes_[n.b]);
                    for (size_t k = 0; k < g.size(); ++k) gb.data[k] += g.data[k] * va.data[k];
                }
                break;
            }
            case Op::Scale: {
                Tensor& ga = grad_of(nodes_[n.a]);
                for (size_t k = 0; k < g.size(); ++k) ga.data[k] += g.data[k] * n.scalar;
                break;
            }
            case Op::AddScalar: {
                Tensor& ga = grad_of(nodes_[n.a]);
                for (size_t k = 0; k < g.size(); ++k) ga.data[k] += g.data[k];
                break;
            }
            case Op::ConcatCols: {
                Tensor& ga = grad_of(nodes_[n.a]);
                Tensor& gb = grad_of(nodes_[n.b]);
                int ca = ga.cols;
                for (int r = 0; r < g.rows; ++r) {
                    for (int j = 0; j < ca; ++j) ga.at(r, j) += g.at(r, j);
                    for (int j = 0; j < gb.cols; ++j) gb.at(r, j) += g.at(r, ca + j);
                }
                break;
            }
            case Op::GatherRows: {
                Tensor& ga = grad_of(nodes_[n.a]);
                for (size_t r = 0; r < n.idx.size(); ++r)
                    for (int j = 0; j < g.cols; ++j)
                        ga.at(n.idx[r], j) += g.at(static_cast<int>(r), j);
                break;
            }
            case Op::SelectCols: {
                Tensor& ga = grad_of(nodes_[n.a]);
                for (int r = 0; r < ga.rows; ++r) ga.at(r, n.idx[r]) += g.at(r, 0);
                break;
            }
            case Op::L2NormRows: {
                const Tensor& vx = value_of(nodes_[n.a]);
                Tensor& ga = grad_of(nodes_[n.a]);
                // zero norm rows get zero gradient
                for (int r = 0; r < vx.rows; ++r) {
                    double nrm = n.val.at(r, 0);
                    if (nrm <= 0.0) continue;
                    double gr = g.at(r, 0) / nrm;
                    for (int j = 0; j < vx.cols; ++j) ga.at(r, j) += gr * vx.at(r, j);
                }
                break;
            }
            case Op::SumRows: {
                Tensor& ga = grad_of(nodes_[n.a]);
                for (int r = 0; r < ga.rows; ++r)
                    for (int j = 0; j < ga.cols; ++j) ga.at(r, j) += g.at(r, 0);
                break;
            }
            case Op::Sum: {
                Tensor& ga = grad_of(nodes_[n.a]);
                double gs = g.data[0];
                for (auto& v : ga.data) v += gs;
                break;
            }
            case Op::Mean: {
                Tensor& ga = grad_of(nodes_[n.a]);
                double gs = g.data[0] / static_cast<double>(ga.size());
                for (auto& v : ga.data) v += gs;
                break;
            }
            case Op::Dropout: {
                Tensor& ga = grad_of(nodes_[n.a]);
                for (size_t k = 0; k < g.size(); ++k) ga.data[k] += g.data[k] * n.mask.data[k];
                break;
            }
        }
    }
}

}  // namespace scout
