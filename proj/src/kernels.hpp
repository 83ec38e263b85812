#pragma once

// Dense linear algebra kernels shared by the tape forward pass, the tape
// backward pass, and the no-grad evaluation path. Using one implementation
// everywhere keeps train-time and eval-time forwards bitwise identical.

#include <Eigen/Dense>

#include "scout/common.hpp"
#include "scout/tensor.hpp"

namespace scout::kern {

using MatRM = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Map = Eigen::Map<MatRM>;
using CMap = Eigen::Map<const MatRM>;

inline CMap cmap(const Tensor& t) { return CMap(t.data.data(), t.rows, t.cols); }
inline Map map(Tensor& t) { return Map(t.data.data(), t.rows, t.cols); }

// Grid observations are 0/1 indicator rows, so the first layer reduces to
// summing picked rows of W. The branch is keyed on the values alone; every
// caller sees the same arithmetic for the same input.
inline bool indicator_rows(const Tensor& x) {
    for (double v : x.data)
        if (v != 0.0 && v != 1.0) return false;
    return true;
}

// y = x*W + b (b broadcast over rows)
inline void affine(const Tensor& x, const Tensor& W, const Tensor& b, Tensor& y) {
    check(x.cols == W.rows, "affine: inner dims mismatch");
    check(b.rows == 1 && b.cols == W.cols, "affine: bias shape mismatch");
    y = Tensor(x.rows, W.cols);
    if (indicator_rows(x)) {
        auto yv = map(y);
        auto Wv = cmap(W);
        for (int i = 0; i < x.rows; ++i) {
            yv.row(i) = cmap(b).row(0);
            const double* xi = x.data.data() + static_cast<size_t>(i) * x.cols;
            for (int j = 0; j < x.cols; ++j)
                if (xi[j] == 1.0) yv.row(i) += Wv.row(j);
        }
        return;
    }
    map(y).noalias() = cmap(x) * cmap(W);
    map(y).rowwise() += cmap(b).row(0);
}

// dx += dy * W^T
inline void acc_dx(const Tensor& dy, const Tensor& W, Tensor& dx) {
    map(dx).noalias() += cmap(dy) * cmap(W).transpose();
}

// dW += x^T * dy
inline void acc_dw(const Tensor& x, const Tensor& dy, Tensor& dW) {
    if (indicator_rows(x)) {
        auto dWv = map(dW);
        auto dyv = cmap(dy);
        for (int i = 0; i < x.rows; ++i) {
            const double* xi = x.data.data() + static_cast<size_t>(i) * x.cols;
            for (int j = 0; j < x.cols; ++j)
                if (xi[j] == 1.0) dWv.row(j) += dyv.row(i);
        }
        return;
    }
    map(dW).noalias() += cmap(x).transpose() * cmap(dy);
}

// db += column sums of dy
inline void acc_db(const Tensor& dy, Tensor& db) {
    map(db).row(0).noalias() += cmap(dy).colwise().sum();
}

}  // namespace scout::kern
