#pragma once

#include <cstddef>
#include <new>
#include <vector>

namespace scout {

template <class T>
struct AlignedAlloc {
    using value_type = T;
    static constexpr std::size_t alignment = 64;
    AlignedAlloc() = default;
    template <class U>
    AlignedAlloc(const AlignedAlloc<U>&) {}
    T* allocate(std::size_t n) {
        return static_cast<T*>(::operator new(n * sizeof(T), std::align_val_t(alignment)));
    }
    void deallocate(T* p, std::size_t) noexcept {
        ::operator delete(p, std::align_val_t(alignment));
    }
    template <class U>
    bool operator==(const AlignedAlloc<U>&) const {
        return true;
    }
    template <class U>
    bool operator!=(const AlignedAlloc<U>&) const {
        return false;
    }
};

// One fixed buffer alignment keeps vectorized kernels on a single code path,
// so arithmetic never depends on where the heap happens to place a tensor.
using DVec = std::vector<double, AlignedAlloc<double>>;

// Dense row-major 2D array of doubles. Row vectors are [1, n].
struct Tensor {
    int rows = 0;
    int cols = 0;
    DVec data;

    Tensor() = default;
    Tensor(int r, int c, double v = 0.0);

    double& at(int i, int j) { return data[static_cast<size_t>(i) * cols + j]; }
    double at(int i, int j) const { return data[static_cast<size_t>(i) * cols + j]; }
    double* row(int i) { return data.data() + static_cast<size_t>(i) * cols; }
    const double* row(int i) const { return data.data() + static_cast<size_t>(i) * cols; }

    size_t size() const { return data.size(); }
    void fill(double v);
    void zero() { fill(0.0); }
    bool same_shape(const Tensor& o) const { return rows == o.rows && cols == o.cols; }
};

}  // namespace scout
