#pragma once

#include <deque>
#include <vector>

#include "scout/rng.hpp"
#include "scout/tensor.hpp"

namespace scout {

// Reverse-mode autodiff over an eagerly evaluated tape.
//
// Values are computed at op-construction time; backward() walks the tape in
// reverse creation order, which makes gradient accumulation order fixed and
// repeatable for a given graph. Parameters are bound by reference: their
// values live in caller-owned storage and their gradients are accumulated
// into caller-owned buffers, so an optimizer can step them in place.
class Tape {
  public:
    enum class Op {
        Input,      // constant leaf
        Param,      // external value/grad storage
        Detach,     // copy value, block gradient
        Dense,      // x*W + b
        Tanh,
        Relu,
        Exp,
        Add,
        Sub,
        Mul,        // elementwise
        Scale,      // c*x
        AddScalar,  // x + c
        ConcatCols,
        GatherRows,
        SelectCols,
        L2NormRows,
        SumRows,
        Sum,
        Mean,
        Dropout,
    };

    int input(Tensor v);
    int param(Tensor& value, Tensor& grad);
    int detach(int x);

    int dense(int x, int w, int b);
    int tanh_op(int x);
    int relu_op(int x);
    int exp_op(int x);
    int add(int a, int b);
    int sub(int a, int b);
    int mul(int a, int b);
    int scale(int x, double c);
    int add_scalar(int x, double c);
    int concat_cols(int a, int b);
    // out[i, :] = x[idx[i], :]; repeated indices accumulate gradient
    int gather_rows(int x, std::vector<int> idx);
    // out[i, 0] = x[i, idx[i]]
    int select_cols(int x, std::vector<int> idx);
    int l2_norm_rows(int x);
    int sum_rows(int x);
    int sum(int x);
    int mean(int x);
    // inverted dropout: keep with prob 1-rate, scale kept entries by 1/(1-rate)
    int dropout(int x, double rate, Rng& rng);

    const Tensor& val(int id) const;
    double scalar_val(int id) const;  // value of a [1,1] node

    // Accumulates d(loss)/d(param) into every bound param's grad buffer
    // (zeroing them first). loss must be a [1,1] node.
    void backward(int loss);

    // Gradient buffer of a non-param node after backward; for tests.
    const Tensor& node_grad(int id) const;

    void clear();
    int size() const { return static_cast<int>(nodes_.size()); }

  private:
    struct Node {
        Op op;
        int a = -1, b = -1, c = -1;  // parents
        Tensor val;
        Tensor grad;
        Tensor* pval = nullptr;  // Param only
        Tensor* pgrad = nullptr;
        double scalar = 0.0;
        std::vector<int> idx;
        Tensor mask;  // Dropout only
    };

    int push(Node n);
    const Tensor& value_of(const Node& n) const { return n.op == Op::Param ? *n.pval : n.val; }
    Tensor& grad_of(Node& n) { return n.op == Op::Param ? *n.pgrad : n.grad; }
    void check_id(int id) const;

    std::deque<Node> nodes_;
};

}  // namespace scout
