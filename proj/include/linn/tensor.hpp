#pragma once

#include <cstdint>
#include <initializer_list>
#include <numeric>
#include <string>
#include <vector>

#include "linn/common.hpp"

namespace linn {

// Dense row-major tensor. float for training/inference, double for
// gradient-check mode.
template <typename Real>
struct Tensor {
    std::vector<int64_t> shape;
    std::vector<Real> data;

    Tensor() = default;

    explicit Tensor(std::vector<int64_t> s) : shape(std::move(s)) {
        data.assign(static_cast<size_t>(numel_of(shape)), Real(0));
    }

    static int64_t numel_of(const std::vector<int64_t>& s) {
        int64_t n = 1;
        for (int64_t e : s) {
            if (e < 0) throw ConfigError("tensor extent must be non-negative");
            n *= e;
        }
        return n;
    }

    static Tensor zeros(std::vector<int64_t> s) { return Tensor(std::move(s)); }

    static Tensor full(std::vector<int64_t> s, Real v) {
        Tensor t(std::move(s));
        std::fill(t.data.begin(), t.data.end(), v);
        return t;
    }

    static Tensor from(std::vector<int64_t> s, std::vector<Real> values) {
        Tensor t;
        t.shape = std::move(s);
        if (static_cast<int64_t>(values.size()) != numel_of(t.shape))
            throw ConfigError("tensor data size does not match shape");
        t.data = std::move(values);
        return t;
    }

    int64_t numel() const { return static_cast<int64_t>(data.size()); }
    int64_t dim(size_t i) const { return shape.at(i); }

    Real* ptr() { return data.data(); }
    const Real* ptr() const { return data.data(); }

    Real& operator[](int64_t i) { return data[static_cast<size_t>(i)]; }
    Real operator[](int64_t i) const { return data[static_cast<size_t>(i)]; }

    Real& at2(int64_t i, int64_t j) { return data[static_cast<size_t>(i * shape[1] + j)]; }
    Real at2(int64_t i, int64_t j) const { return data[static_cast<size_t>(i * shape[1] + j)]; }

    Real& at3(int64_t i, int64_t j, int64_t k) {
        return data[static_cast<size_t>((i * shape[1] + j) * shape[2] + k)];
    }
    Real at3(int64_t i, int64_t j, int64_t k) const {
        return data[static_cast<size_t>((i * shape[1] + j) * shape[2] + k)];
    }

    void fill(Real v) { std::fill(data.begin(), data.end(), v); }

    bool all_finite() const {
        for (Real v : data)
            if (!std::isfinite(static_cast<double>(v))) return false;
        return true;
    }

    void check_finite(const std::string& what) const {
        if (!all_finite()) throw InternalError("non-finite values in " + what);
    }
};

using TensorF = Tensor<float>;
using TensorD = Tensor<double>;

// Trainable parameter: value plus gradient and AdamW moment buffers,
// all the same shape. Moments start at zero.
template <typename Real>
struct Param {
    Tensor<Real> value;
    Tensor<Real> grad;
    Tensor<Real> m;
    Tensor<Real> v;

    Param() = default;
    explicit Param(std::vector<int64_t> shape)
        : value(shape), grad(shape), m(shape), v(std::move(shape)) {}

    void zero_grad() { grad.fill(Real(0)); }
    int64_t numel() const { return value.numel(); }
};

// Named handle used for checkpointing and the optimizer; ordering of a
// module's param list is part of the checkpoint format.
template <typename Real>
struct ParamRef {
    std::string name;
    Param<Real>* param;
};

// uniform(-sqrt(1/fan_in), +sqrt(1/fan_in))
template <typename Real>
void init_uniform_fan_in(Param<Real>& p, int64_t fan_in, Rng& rng) {
    double bound = std::sqrt(1.0 / static_cast<double>(fan_in));
    for (auto& v : p.value.data) v = static_cast<Real>(rng.uniform(-bound, bound));
}

}  // namespace linn
