#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "linn/gemm.hpp"
#include "linn/tensor.hpp"

namespace linn {

template <typename Real>
void transpose(const Real* src, int64_t rows, int64_t cols, Real* dst) {
    constexpr int64_t tile = 32;
    for (int64_t i0 = 0; i0 < rows; i0 += tile) {
        int64_t i1 = std::min(rows, i0 + tile);
        for (int64_t j0 = 0; j0 < cols; j0 += tile) {
            int64_t j1 = std::min(cols, j0 + tile);
            for (int64_t i = i0; i < i1; ++i)
                for (int64_t j = j0; j < j1; ++j) dst[j * rows + i] = src[i * cols + j];
        }
    }
}

// numerically stable logistic
template <typename Real>
inline Real sigmoid(Real x) {
    if (x >= Real(0)) {
        return Real(1) / (Real(1) + std::exp(-x));
    }
    Real e = std::exp(x);
    return e / (Real(1) + e);
}

template <typename Real>
inline Real silu(Real x) {
    return x * sigmoid(x);
}

// d/dx [x * s(x)] = s(x) * (1 + x * (1 - s(x)))
template <typename Real>
inline Real silu_grad(Real x) {
    Real s = sigmoid(x);
    return s * (Real(1) + x * (Real(1) - s));
}

template <typename Real>
Tensor<Real> silu_forward(const Tensor<Real>& x) {
    Tensor<Real> y = x;
    for (auto& v : y.data) v = silu(v);
    return y;
}

template <typename Real>
Tensor<Real> silu_backward(const Tensor<Real>& x, const Tensor<Real>& dy) {
    Tensor<Real> dx = dy;
    for (int64_t i = 0; i < x.numel(); ++i) dx[i] = dy[i] * silu_grad(x[i]);
    return dx;
}

// Fully connected layer, y = x W + b with W[in, out].
template <typename Real>
class Linear {
public:
    Linear() = default;
    Linear(int64_t in, int64_t out, Rng& rng) : in_(in), out_(out), w_({in, out}), b_({out}) {
        init_uniform_fan_in(w_, in, rng);
        init_uniform_fan_in(b_, in, rng);
    }

    // x: [batch, in] -> [batch, out]
    Tensor<Real> forward(const Tensor<Real>& x) const {
        check_input(x);
        int64_t batch = x.dim(0);
        Tensor<Real> y({batch, out_});
        gemm(batch, out_, in_, x.ptr(), in_, w_.value.ptr(), out_, y.ptr(), out_, false);
        for (int64_t r = 0; r < batch; ++r) {
            Real* row = y.ptr() + r * out_;
            for (int64_t j = 0; j < out_; ++j) row[j] += b_.value[j];
        }
        return y;
    }

    // Accumulates dW, db; returns dx.
    Tensor<Real> backward(const Tensor<Real>& x, const Tensor<Real>& dy) {
        check_input(x);
        if (dy.shape.size() != 2 || dy.dim(0) != x.dim(0) || dy.dim(1) != out_)
            throw ConfigError("linear backward: dy shape mismatch");
        int64_t batch = x.dim(0);

        // dW += x^T dy; x^T is materialized so both gemm operands stream
        // sequentially
        std::vector<Real> xt(static_cast<size_t>(in_ * batch));
        transpose(x.ptr(), batch, in_, xt.data());
        gemm(in_, out_, batch, xt.data(), batch, dy.ptr(), out_, w_.grad.ptr(), out_, true);

        for (int64_t r = 0; r < batch; ++r) {
            const Real* row = dy.ptr() + r * out_;
            for (int64_t j = 0; j < out_; ++j) b_.grad[j] += row[j];
        }

        // dx = dy W^T
        std::vector<Real> wt(static_cast<size_t>(in_ * out_));
        transpose(w_.value.ptr(), in_, out_, wt.data());
        Tensor<Real> dx({batch, in_});
        gemm(batch, in_, out_, dy.ptr(), out_, wt.data(), in_, dx.ptr(), in_, false);
        return dx;
    }

    int64_t in() const { return in_; }
    int64_t out() const { return out_; }
    int64_t param_count() const { return in_ * out_ + out_; }

    Param<Real>& weight() { return w_; }
    Param<Real>& bias() { return b_; }
    const Param<Real>& weight() const { return w_; }
    const Param<Real>& bias() const { return b_; }

    void collect(const std::string& prefix, std::vector<ParamRef<Real>>& out) {
        out.push_back({prefix + ".weight", &w_});
        out.push_back({prefix + ".bias", &b_});
    }

private:
    void check_input(const Tensor<Real>& x) const {
        if (x.shape.size() != 2 || x.dim(1) != in_)
            throw ConfigError("linear: input width " +
                              std::to_string(x.shape.size() == 2 ? x.dim(1) : -1) +
                              " does not match layer width " + std::to_string(in_));
    }

    int64_t in_ = 0, out_ = 0;
    Param<Real> w_, b_;
};

// 1-D convolution (cross-correlation) with odd kernel size and symmetric
// zero padding, so the output has the same length as the input.
template <typename Real>
class Conv1d {
public:
    Conv1d() = default;
    Conv1d(int64_t ch_in, int64_t ch_out, int64_t ksize, Rng& rng)
        : ch_in_(ch_in), ch_out_(ch_out), k_(ksize),
          w_({ch_out, ch_in, ksize}), b_({ch_out}) {
        if (ksize % 2 == 0) throw ConfigError("conv1d: kernel size must be odd");
        init_uniform_fan_in(w_, ch_in * ksize, rng);
        init_uniform_fan_in(b_, ch_in * ksize, rng);
    }

    // x: [ch_in, T] -> [ch_out, T]
    Tensor<Real> forward(const Tensor<Real>& x) const {
        check_input(x);
        int64_t t_len = x.dim(1);
        int64_t half = (k_ - 1) / 2;
        Tensor<Real> y({ch_out_, t_len});
        for (int64_t o = 0; o < ch_out_; ++o) {
            for (int64_t t = 0; t < t_len; ++t) {
                Real acc = b_.value[o];
                for (int64_t ci = 0; ci < ch_in_; ++ci) {
                    const Real* xin = x.ptr() + ci * t_len;
                    const Real* w = w_.value.ptr() + (o * ch_in_ + ci) * k_;
                    for (int64_t j = 0; j < k_; ++j) {
                        int64_t s = t + j - half;
                        if (s >= 0 && s < t_len) acc += w[j] * xin[s];
                    }
                }
                y.at2(o, t) = acc;
            }
        }
        return y;
    }

    Tensor<Real> backward(const Tensor<Real>& x, const Tensor<Real>& dy) {
        check_input(x);
        if (dy.shape.size() != 2 || dy.dim(0) != ch_out_ || dy.dim(1) != x.dim(1))
            throw ConfigError("conv1d backward: dy shape mismatch");
        int64_t t_len = x.dim(1);
        int64_t half = (k_ - 1) / 2;
        Tensor<Real> dx({ch_in_, t_len});
        for (int64_t o = 0; o < ch_out_; ++o) {
            const Real* dyo = dy.ptr() + o * t_len;
            for (int64_t t = 0; t < t_len; ++t) b_.grad[o] += dyo[t];
            for (int64_t ci = 0; ci < ch_in_; ++ci) {
                const Real* xin = x.ptr() + ci * t_len;
                Real* dxi = dx.ptr() + ci * t_len;
                Real* dw = w_.grad.ptr() + (o * ch_in_ + ci) * k_;
                const Real* w = w_.value.ptr() + (o * ch_in_ + ci) * k_;
                for (int64_t j = 0; j < k_; ++j) {
                    int64_t lo = std::max<int64_t>(0, half - j);
                    int64_t hi = std::min<int64_t>(t_len, t_len + half - j);
                    Real acc = Real(0);
                    for (int64_t t = lo; t < hi; ++t) {
                        int64_t s = t + j - half;
                        acc += dyo[t] * xin[s];
                        dxi[s] += dyo[t] * w[j];
                    }
                    dw[j] += acc;
                }
            }
        }
        return dx;
    }

    int64_t param_count() const { return ch_out_ * ch_in_ * k_ + ch_out_; }

    Param<Real>& kernels() { return w_; }
    Param<Real>& bias() { return b_; }

    void collect(const std::string& prefix, std::vector<ParamRef<Real>>& out) {
        out.push_back({prefix + ".kernels", &w_});
        out.push_back({prefix + ".bias", &b_});
    }

private:
    void check_input(const Tensor<Real>& x) const {
        if (x.shape.size() != 2 || x.dim(0) != ch_in_)
            throw ConfigError("conv1d: expected input [" + std::to_string(ch_in_) + ", T]");
    }

    int64_t ch_in_ = 0, ch_out_ = 0, k_ = 0;
    Param<Real> w_, b_;
};

}  // namespace linn
