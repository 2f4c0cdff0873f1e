#pragma once

#include <array>
#include <cmath>
#include <vector>

#include "linn/dsp.hpp"
#include "linn/nn.hpp"
#include "linn/pose.hpp"

namespace linn {

// Stage 1: time-domain warping. A geometric propagation delay per ear plus a
// small learned correction bounded by w_max samples.
struct WarpConfig {
    double ear_offset = 0.09;       // meters along the interaural axis (+y left, -y right)
    double speed_of_sound = 343.0;  // m/s
    int fs = 48000;
    bool neural_enabled = true;
    double w_max = 64.0;            // max neural correction, samples
    int64_t neural_channels = 16;
    int64_t neural_layers = 3;
    int64_t kernel = 3;

    void validate() const {
        if (ear_offset <= 0.0) throw ConfigError("warp: ear_offset must be positive");
        if (w_max < 0.0) throw ConfigError("warp: w_max must be non-negative");
        if (fs <= 0) throw ConfigError("warp: fs must be positive");
        if (speed_of_sound <= 0.0) throw ConfigError("warp: speed_of_sound must be positive");
    }

    std::array<double, 3> ear_position(int ear) const {
        return {0.0, ear == 0 ? ear_offset : -ear_offset, 0.0};
    }
};

// Per-ear fractional read indices into the mono input, one per output sample.
// Indices stay in double precision at every sample-value precision.
struct WarpField {
    std::array<std::vector<double>, 2> index;

    int64_t length() const { return static_cast<int64_t>(index[0].size()); }
};

// index_e(i) = i - ||p(i/fs) - o_e|| * fs / c
inline WarpField geometric_warp(const PoseTrack& track, int64_t length, const WarpConfig& cfg) {
    if (length <= 0) throw ConfigError("geometric_warp: length must be positive");
    cfg.validate();
    WarpField field;
    for (auto& v : field.index) v.resize(static_cast<size_t>(length));
    const double fs = static_cast<double>(cfg.fs);
    for (int64_t i = 0; i < length; ++i) {
        Pose pose = track_sample(track, static_cast<double>(i) / fs);
        for (int ear = 0; ear < 2; ++ear) {
            auto o = cfg.ear_position(ear);
            double dx = pose.position[0] - o[0];
            double dy = pose.position[1] - o[1];
            double dz = pose.position[2] - o[2];
            double delay = std::sqrt(dx * dx + dy * dy + dz * dz) * fs / cfg.speed_of_sound;
            field.index[static_cast<size_t>(ear)][static_cast<size_t>(i)] =
                static_cast<double>(i) - delay;
        }
    }
    return field;
}

// Temporal conv stack over the 7-channel pose sequence at pose rate.
// conv(7->ch) SiLU, conv(ch->ch) SiLU, conv(ch->2), then w_max * tanh.
template <typename Real>
class WarpNet {
public:
    WarpNet() = default;
    WarpNet(const WarpConfig& cfg, Rng& rng)
        : w_max_(static_cast<Real>(cfg.w_max)),
          conv1_(7, cfg.neural_channels, cfg.kernel, rng),
          conv2_(cfg.neural_channels, cfg.neural_channels, cfg.kernel, rng),
          conv3_(cfg.neural_channels, 2, cfg.kernel, rng) {}

    struct Trace {
        Tensor<Real> input;   // [7, T]
        Tensor<Real> pre1, act1, pre2, act2, pre3, tanh3;
        Tensor<Real> correction;  // [2, T], samples
    };

    // Corrections at pose rate for each ear, bounded to (-w_max, w_max).
    Trace forward(const PoseTrack& track) const {
        Trace t;
        t.input = pose_channels(track);
        t.pre1 = conv1_.forward(t.input);
        t.act1 = silu_forward(t.pre1);
        t.pre2 = conv2_.forward(t.act1);
        t.act2 = silu_forward(t.pre2);
        t.pre3 = conv3_.forward(t.act2);
        t.tanh3 = t.pre3;
        for (auto& v : t.tanh3.data) v = std::tanh(v);
        t.correction = t.tanh3;
        for (auto& v : t.correction.data) v *= w_max_;
        return t;
    }

    // d_correction: [2, T]. Accumulates conv parameter gradients.
    void backward(Trace& t, const Tensor<Real>& d_correction) {
        Tensor<Real> d3 = d_correction;
        for (int64_t i = 0; i < d3.numel(); ++i)
            d3[i] = d_correction[i] * w_max_ * (Real(1) - t.tanh3[i] * t.tanh3[i]);
        Tensor<Real> da2 = conv3_.backward(t.act2, d3);
        Tensor<Real> dp2 = silu_backward(t.pre2, da2);
        Tensor<Real> da1 = conv2_.backward(t.act1, dp2);
        Tensor<Real> dp1 = silu_backward(t.pre1, da1);
        conv1_.backward(t.input, dp1);
    }

    static Tensor<Real> pose_channels(const PoseTrack& track) {
        int64_t t_len = static_cast<int64_t>(track.poses.size());
        Tensor<Real> x({7, t_len});
        for (int64_t k = 0; k < t_len; ++k) {
            const Pose& p = track.poses[static_cast<size_t>(k)];
            for (int j = 0; j < 3; ++j) x.at2(j, k) = static_cast<Real>(p.position[static_cast<size_t>(j)]);
            for (int j = 0; j < 4; ++j) x.at2(3 + j, k) = static_cast<Real>(p.orientation[static_cast<size_t>(j)]);
        }
        return x;
    }

    int64_t param_count() const {
        return conv1_.param_count() + conv2_.param_count() + conv3_.param_count();
    }

    void collect(const std::string& prefix, std::vector<ParamRef<Real>>& out) {
        conv1_.collect(prefix + ".conv1", out);
        conv2_.collect(prefix + ".conv2", out);
        conv3_.collect(prefix + ".conv3", out);
    }

    Conv1d<Real>& conv1() { return conv1_; }
    Conv1d<Real>& conv2() { return conv2_; }
    Conv1d<Real>& conv3() { return conv3_; }

private:
    Real w_max_ = 64;
    Conv1d<Real> conv1_, conv2_, conv3_;
};

// Linear upsampling of pose-rate corrections to audio rate: sample i reads
// knot position i * rate / fs.
template <typename Real>
void upsample_to_audio_rate(const Real* knots, int64_t n_knots, int64_t n_samples, double rate,
                            double fs, Real* out) {
    const double step = rate / fs;
    for (int64_t i = 0; i < n_samples; ++i) {
        double u = static_cast<double>(i) * step;
        int64_t k = static_cast<int64_t>(u);
        if (k >= n_knots - 1) {
            out[i] = knots[n_knots - 1];
            continue;
        }
        Real frac = static_cast<Real>(u - static_cast<double>(k));
        out[i] = (Real(1) - frac) * knots[k] + frac * knots[k + 1];
    }
}

template <typename Real>
void upsample_to_audio_rate_adjoint(const Real* d_out, int64_t n_samples, int64_t n_knots,
                                    double rate, double fs, Real* d_knots) {
    const double step = rate / fs;
    for (int64_t i = 0; i < n_samples; ++i) {
        double u = static_cast<double>(i) * step;
        int64_t k = static_cast<int64_t>(u);
        if (k >= n_knots - 1) {
            d_knots[n_knots - 1] += d_out[i];
            continue;
        }
        Real frac = static_cast<Real>(u - static_cast<double>(k));
        d_knots[k] += (Real(1) - frac) * d_out[i];
        d_knots[k + 1] += frac * d_out[i];
    }
}

// Per-ear fractional resample of the mono signal at the field indices.
template <typename Real>
AudioBuffer<Real> apply_warp(const AudioBuffer<Real>& mono, const WarpField& field) {
    mono.validate();
    if (mono.channel_count() != 1) throw ConfigError("apply_warp: input must be mono");
    if (field.length() != mono.length())
        throw ConfigError("apply_warp: field length does not match input length");
    AudioBuffer<Real> out(mono.sample_rate, 2, mono.length());
    for (int ear = 0; ear < 2; ++ear)
        fractional_resample(mono.channels[0].data(), mono.length(),
                            field.index[static_cast<size_t>(ear)].data(), field.length(),
                            out.channels[static_cast<size_t>(ear)].data());
    return out;
}

}  // namespace linn
