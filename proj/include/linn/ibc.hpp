#pragma once

#include <cmath>
#include <complex>
#include <vector>

#include "linn/dsp.hpp"
#include "linn/nn.hpp"
#include "linn/pose.hpp"
#include "linn/simd_math.hpp"

namespace linn {

// Stage 2: the implicit binaural corrector. A coordinate MLP maps
// (pose, ear, frequency encoding, time encoding) to a log-amplitude and
// phase correction per time-frequency bin, from which a complex gain mask
// is assembled.

struct EncodingConfig {
    int64_t n_f = 8;   // frequency bands
    int64_t n_t = 12;  // time bands
    bool use_freqpe = true;  // ablation: zero the block, width unchanged
    bool use_timepe = true;

    void validate() const {
        if (n_f < 1 || n_t < 1) throw ConfigError("encoding: band counts must be >= 1");
    }

    // pose(7) + ear one-hot(2) + 2*n_f + 2*n_t
    int64_t coord_width() const { return 7 + 2 + 2 * n_f + 2 * n_t; }
};

// (sin(2^k 2 pi u), cos(2^k 2 pi u)) for k = 0..bands-1, sin first per band.
template <typename Real>
void sinusoidal_pe(double u, int64_t bands, Real* out) {
    double ang = 2.0 * kPi * u;
    for (int64_t k = 0; k < bands; ++k) {
        out[2 * k] = static_cast<Real>(std::sin(ang));
        out[2 * k + 1] = static_cast<Real>(std::cos(ang));
        ang *= 2.0;
    }
}

template <typename Real>
std::vector<Real> freq_pe(double f_norm, int64_t n_f) {
    if (n_f < 1) throw ConfigError("freq_pe: need at least one band");
    std::vector<Real> out(static_cast<size_t>(2 * n_f));
    sinusoidal_pe(f_norm, n_f, out.data());
    return out;
}

template <typename Real>
std::vector<Real> time_pe(double t_norm, int64_t n_t) {
    if (n_t < 1) throw ConfigError("time_pe: need at least one band");
    std::vector<Real> out(static_cast<size_t>(2 * n_t));
    sinusoidal_pe(t_norm, n_t, out.data());
    return out;
}

// Coordinate layout: [p(3), q(4), ear_onehot(2), FreqPE, TimePE].
// Frequency and time are normalized to [0,1] as bin/(bins-1) and
// frame/(frames_per_chunk-1).
template <typename Real>
void assemble_coords(const Pose& pose, int ear, int64_t frame, int64_t bin,
                     int64_t frames_per_chunk, int64_t bins, const EncodingConfig& enc,
                     Real* out) {
    enc.validate();
    if (ear != 0 && ear != 1) throw ConfigError("assemble_coords: ear must be 0 or 1");
    if (bin < 0 || bin >= bins) throw ConfigError("assemble_coords: bin out of range");
    if (frame < 0 || frame >= frames_per_chunk)
        throw ConfigError("assemble_coords: frame out of range");
    int64_t o = 0;
    for (int j = 0; j < 3; ++j) out[o++] = static_cast<Real>(pose.position[static_cast<size_t>(j)]);
    for (int j = 0; j < 4; ++j) out[o++] = static_cast<Real>(pose.orientation[static_cast<size_t>(j)]);
    out[o++] = ear == 0 ? Real(1) : Real(0);
    out[o++] = ear == 1 ? Real(1) : Real(0);
    if (enc.use_freqpe) {
        double f_norm = bins > 1 ? static_cast<double>(bin) / static_cast<double>(bins - 1) : 0.0;
        sinusoidal_pe(f_norm, enc.n_f, out + o);
    } else {
        std::fill(out + o, out + o + 2 * enc.n_f, Real(0));
    }
    o += 2 * enc.n_f;
    if (enc.use_timepe) {
        double t_norm = frames_per_chunk > 1
                            ? static_cast<double>(frame) / static_cast<double>(frames_per_chunk - 1)
                            : 0.0;
        sinusoidal_pe(t_norm, enc.n_t, out + o);
    } else {
        std::fill(out + o, out + o + 2 * enc.n_t, Real(0));
    }
}

struct IbcMlpConfig {
    int64_t hidden = 256;
    int64_t depth = 3;  // hidden layers
    double alpha = 0.8;
};

// Coordinate MLP: input -> hidden (SiLU) x depth -> 2 linear outputs
// (raw delta-logA, raw delta-phi).
template <typename Real>
class IbcMlp {
public:
    IbcMlp() = default;
    IbcMlp(int64_t in_width, const IbcMlpConfig& cfg, Rng& rng) : cfg_(cfg) {
        if (cfg.depth < 1) throw ConfigError("ibc mlp: depth must be >= 1");
        layers_.emplace_back(in_width, cfg.hidden, rng);
        for (int64_t i = 1; i < cfg.depth; ++i) layers_.emplace_back(cfg.hidden, cfg.hidden, rng);
        out_ = Linear<Real>(cfg.hidden, 2, rng);
    }

    struct Trace {
        std::vector<Tensor<Real>> pre;   // pre-activation per hidden layer
        std::vector<Tensor<Real>> act;   // SiLU outputs
        Tensor<Real> raw;                // [N, 2]
    };

    // coords: [N, width] -> raw [N, 2]
    Tensor<Real> forward(const Tensor<Real>& coords) const {
        Tensor<Real> h = layers_[0].forward(coords);
        silu_inplace(h.ptr(), h.numel());
        for (size_t l = 1; l < layers_.size(); ++l) {
            h = layers_[l].forward(h);
            silu_inplace(h.ptr(), h.numel());
        }
        return out_.forward(h);
    }

    Trace forward_trace(const Tensor<Real>& coords) const {
        Trace t;
        t.pre.reserve(layers_.size());
        t.act.reserve(layers_.size());
        const Tensor<Real>* src = &coords;
        for (const auto& layer : layers_) {
            t.pre.push_back(layer.forward(*src));
            t.act.push_back(t.pre.back());
            silu_inplace(t.act.back().ptr(), t.act.back().numel());
            src = &t.act.back();
        }
        t.raw = out_.forward(t.act.back());
        return t;
    }

    // d_raw: [N, 2]; accumulates parameter grads, returns d_coords.
    Tensor<Real> backward(const Tensor<Real>& coords, Trace& t, const Tensor<Real>& d_raw) {
        Tensor<Real> d = out_.backward(t.act.back(), d_raw);
        for (size_t l = layers_.size(); l-- > 0;) {
            silu_grad_mul_inplace(t.pre[l].ptr(), d.ptr(), d.numel());
            d = layers_[l].backward(l == 0 ? coords : t.act[l - 1], d);
        }
        return d;
    }

    int64_t param_count() const {
        int64_t n = out_.param_count();
        for (const auto& l : layers_) n += l.param_count();
        return n;
    }

    int64_t input_width() const { return layers_.empty() ? 0 : layers_[0].in(); }
    double alpha() const { return cfg_.alpha; }

    void collect(const std::string& prefix, std::vector<ParamRef<Real>>& out) {
        for (size_t l = 0; l < layers_.size(); ++l)
            layers_[l].collect(prefix + ".hidden" + std::to_string(l), out);
        out_.collect(prefix + ".out", out);
    }

private:
    IbcMlpConfig cfg_;
    std::vector<Linear<Real>> layers_;
    Linear<Real> out_;
};

// delta_A = alpha * tanh(raw_A); delta_phi = pi * tanh(raw_phi)
template <typename Real>
inline void scale_corrections(Real raw_a, Real raw_p, double alpha, Real& delta_a, Real& delta_p) {
    delta_a = static_cast<Real>(alpha * std::tanh(static_cast<double>(raw_a)));
    delta_p = static_cast<Real>(kPi * std::tanh(static_cast<double>(raw_p)));
}

// G = exp(delta_A) * (cos(delta_phi) + j sin(delta_phi))
template <typename Real>
inline std::complex<Real> build_gain(Real delta_a, Real delta_p) {
    Real mag = std::exp(delta_a);
    return std::complex<Real>(mag * std::cos(delta_p), mag * std::sin(delta_p));
}

// Complex gain per (ear, frame, bin).
template <typename Real>
struct GainMask {
    int64_t frames = 0;
    int64_t bins = 0;
    std::vector<std::complex<Real>> data;  // [ear][frame][bin]

    GainMask() = default;
    GainMask(int64_t f, int64_t b) : frames(f), bins(b), data(static_cast<size_t>(2 * f * b)) {}

    std::complex<Real>& at(int ear, int64_t f, int64_t b) {
        return data[static_cast<size_t>((ear * frames + f) * bins + b)];
    }
    std::complex<Real> at(int ear, int64_t f, int64_t b) const {
        return data[static_cast<size_t>((ear * frames + f) * bins + b)];
    }
};

// Element-wise complex product, out = spec * mask.
template <typename Real>
ComplexSpectrogram<Real> apply_gain(const ComplexSpectrogram<Real>& spec, const GainMask<Real>& mask) {
    if (spec.channels != 2) throw ConfigError("apply_gain: spectrogram must be stereo");
    if (mask.frames != spec.frames || mask.bins != spec.bins)
        throw ConfigError("apply_gain: mask shape does not match spectrogram");
    ComplexSpectrogram<Real> out = spec;
    for (int ear = 0; ear < 2; ++ear)
        for (int64_t f = 0; f < spec.frames; ++f) {
            const std::complex<Real>* s = spec.frame_ptr(ear, f);
            std::complex<Real>* o = out.frame_ptr(ear, f);
            for (int64_t b = 0; b < spec.bins; ++b) o[b] = s[b] * mask.at(ear, f, b);
        }
    return out;
}

// Backward of the complex product z = x * g for real losses: gradients are
// carried as d/dRe + j d/dIm.
template <typename Real>
inline void complex_mul_backward(std::complex<Real> x, std::complex<Real> g,
                                 std::complex<Real> dz, std::complex<Real>& dx,
                                 std::complex<Real>& dg) {
    // Re z = xr gr - xi gi ; Im z = xr gi + xi gr
    Real ar = dz.real(), ai = dz.imag();
    dx = std::complex<Real>(ar * g.real() + ai * g.imag(), -ar * g.imag() + ai * g.real());
    dg = std::complex<Real>(ar * x.real() + ai * x.imag(), -ar * x.imag() + ai * x.real());
}

// Backward of (raw_a, raw_p) -> G given tanh values and upstream dG.
template <typename Real>
inline void gain_backward(Real tanh_a, Real tanh_p, double alpha, std::complex<Real> gain,
                          std::complex<Real> d_gain, Real& d_raw_a, Real& d_raw_p) {
    Real d_delta_a = d_gain.real() * gain.real() + d_gain.imag() * gain.imag();
    Real d_delta_p = -d_gain.real() * gain.imag() + d_gain.imag() * gain.real();
    d_raw_a = static_cast<Real>(d_delta_a * alpha * (1.0 - static_cast<double>(tanh_a) * tanh_a));
    d_raw_p = static_cast<Real>(d_delta_p * kPi * (1.0 - static_cast<double>(tanh_p) * tanh_p));
}

}  // namespace linn
