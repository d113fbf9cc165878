#pragma once

#include <cstdint>
#include <initializer_list>
#include <vector>

namespace lipfd {

/// Dense row-major double tensor. Shapes are small here (features, token
/// matrices, conv maps), so a flat vector plus a shape is all we need.
struct Tensor {
    std::vector<int> shape;
    std::vector<double> data;

    Tensor() = default;
    Tensor(std::vector<int> s, std::vector<double> d) : shape(std::move(s)), data(std::move(d)) {}

    static Tensor zeros(std::vector<int> s) {
        Tensor t;
        t.shape = std::move(s);
        t.data.assign(static_cast<size_t>(numel_of(t.shape)), 0.0);
        return t;
    }

    static Tensor scalar(double v) { return Tensor({1}, {v}); }

    static int64_t numel_of(const std::vector<int>& s) {
        int64_t n = 1;
        for (int d : s) n *= d;
        return n;
    }

    int64_t numel() const { return static_cast<int64_t>(data.size()); }
    int dim(int i) const { return shape[static_cast<size_t>(i)]; }
    int ndim() const { return static_cast<int>(shape.size()); }

    double& operator[](int64_t i) { return data[static_cast<size_t>(i)]; }
    double operator[](int64_t i) const { return data[static_cast<size_t>(i)]; }

    bool same_shape(const Tensor& o) const { return shape == o.shape; }
};

}  // namespace lipfd
