#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace msgat::ad {

// Dense row-major matrix of doubles. Vectors are n x 1, scalars 1 x 1.
// All training math runs in 64-bit; near-boundary artanh is too lossy in 32-bit.
struct Tensor {
    int rows = 0;
    int cols = 0;
    std::vector<double> v;

    Tensor() = default;
    Tensor(int r, int c) : rows(r), cols(c), v(static_cast<size_t>(r) * c, 0.0) {}

    static Tensor zeros(int r, int c = 1) { return Tensor(r, c); }
    static Tensor scalar(double x) {
        Tensor t(1, 1);
        t.v[0] = x;
        return t;
    }
    static Tensor column(std::vector<double> d) {
        Tensor t;
        t.rows = static_cast<int>(d.size());
        t.cols = 1;
        t.v = std::move(d);
        return t;
    }

    int size() const { return rows * cols; }
    bool is_scalar() const { return rows == 1 && cols == 1; }
    bool is_vector() const { return cols == 1; }
    bool same_shape(const Tensor& o) const { return rows == o.rows && cols == o.cols; }

    double& at(int r, int c = 0) { return v[static_cast<size_t>(r) * cols + c]; }
    double at(int r, int c = 0) const { return v[static_cast<size_t>(r) * cols + c]; }
    double& operator[](int i) { return v[static_cast<size_t>(i)]; }
    double operator[](int i) const { return v[static_cast<size_t>(i)]; }

    std::string shape_str() const {
        return "(" + std::to_string(rows) + "x" + std::to_string(cols) + ")";
    }
};

}  // namespace msgat::ad
