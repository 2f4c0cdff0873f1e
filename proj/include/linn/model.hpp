#pragma once

#include <array>
#include <optional>
#include <utility>

#include "linn/config.hpp"
#include "linn/ibc.hpp"
#include "linn/pose.hpp"
#include "linn/warp.hpp"

namespace linn {

// The full two-stage pipeline:
//   y = istft( stft( warp(x | pose) ) * G(t, f) )
// Stage 1 warps the mono input per ear along geometric delay trajectories
// plus a learned bounded correction; stage 2 multiplies the complex
// spectrogram by the gain mask predicted by the coordinate MLP.
template <typename Real>
class LinnModel {
public:
    explicit LinnModel(const RunConfig& cfg, uint64_t seed = 0) : cfg_(cfg) {
        cfg_.validate();
        Rng rng(seed ^ 0x5a17c3b94d2e8f01ULL);
        Rng warp_rng = rng.fork(1);
        Rng ibc_rng = rng.fork(2);
        warp_net_ = WarpNet<Real>(cfg_.warp, warp_rng);
        ibc_ = IbcMlp<Real>(cfg_.enc.coord_width(), cfg_.mlp, ibc_rng);
    }

    const RunConfig& config() const { return cfg_; }
    RunConfig& config() { return cfg_; }

    // The registry follows the architecture: a model built without the
    // neural warp has no warp parameters at all (and checkpoints reflect
    // that). --no-ibc is a runtime switch and leaves the registry alone.
    std::vector<ParamRef<Real>> params() {
        std::vector<ParamRef<Real>> out;
        if (cfg_.warp.neural_enabled) warp_net_.collect("warp", out);
        ibc_.collect("ibc", out);
        return out;
    }

    // Parameters the current configuration actually trains.
    std::vector<ParamRef<Real>> trainable_params() {
        std::vector<ParamRef<Real>> out;
        if (cfg_.warp.neural_enabled) warp_net_.collect("warp", out);
        if (cfg_.ibc_enabled) ibc_.collect("ibc", out);
        return out;
    }

    int64_t param_count() const { return warp_param_count() + ibc_param_count(); }
    int64_t warp_param_count() const {
        return cfg_.warp.neural_enabled ? warp_net_.param_count() : 0;
    }
    int64_t ibc_param_count() const { return ibc_.param_count(); }

    WarpNet<Real>& warp_net() { return warp_net_; }
    IbcMlp<Real>& ibc() { return ibc_; }

    void zero_grads() {
        for (auto& ref : params()) ref.param->zero_grad();
    }

    // ------------------------------------------------------------------
    // Rendering
    // ------------------------------------------------------------------

    // Whole-signal processing: single STFT over the warped signal.
    // Streaming processing: fixed chunk grid with one window of overlap on
    // each side; the two agree on every sample to within float tolerance.
    AudioBuffer<Real> render(const AudioBuffer<Real>& mono, const PoseTrack& track,
                             bool streaming = true) const {
        mono.validate();
        if (mono.channel_count() != 1) throw ConfigError("render: input must be mono");
        const int64_t len = mono.length();
        double need = static_cast<double>(len) / cfg_.fs;
        if (track.duration() + 1.0 / track.rate < need)
            throw ConfigError("render: pose track covers " + std::to_string(track.duration()) +
                              " s but audio needs " + std::to_string(need) + " s");

        AudioBuffer<Real> warped = warp_stage(mono, track);
        if (streaming) return spectral_stage_streaming(warped, track);
        return spectral_stage_whole(warped, track);
    }

    // Stage-1 output alone (the initial binaural estimate).
    AudioBuffer<Real> warp_stage(const AudioBuffer<Real>& mono, const PoseTrack& track) const {
        const int64_t len = mono.length();
        WarpField field = geometric_warp(track, len, cfg_.warp);
        if (cfg_.warp.neural_enabled) {
            PoseTrack knots = track_window(track, 0.0, static_cast<double>(len) / cfg_.fs);
            auto trace = warp_net_.forward(knots);
            add_upsampled_corrections(trace.correction, field, len);
        }
        return apply_warp(mono, field);
    }

    // Mean (delta_logA, delta_phi) per ear over all frequency bins at the
    // mid-chunk time coordinate; the interpretability probe.
    std::array<std::pair<double, double>, 2> probe_mean_corrections(const Pose& pose) const {
        const int64_t bins = cfg_.stft.bins();
        const int64_t fpc = cfg_.frames_per_chunk();
        const int64_t frame = (fpc - 1) / 2;
        const int64_t width = cfg_.enc.coord_width();
        Tensor<Real> coords({2 * bins, width});
        for (int ear = 0; ear < 2; ++ear)
            for (int64_t b = 0; b < bins; ++b)
                assemble_coords(pose, ear, frame, b, fpc, bins, cfg_.enc,
                                coords.ptr() + (ear * bins + b) * width);
        Tensor<Real> raw = ibc_.forward(coords);
        std::array<std::pair<double, double>, 2> out{};
        for (int ear = 0; ear < 2; ++ear) {
            double sum_a = 0.0, sum_p = 0.0;
            for (int64_t b = 0; b < bins; ++b) {
                Real da, dp;
                scale_corrections(raw.at2(ear * bins + b, 0), raw.at2(ear * bins + b, 1),
                                  cfg_.mlp.alpha, da, dp);
                sum_a += da;
                sum_p += dp;
            }
            out[static_cast<size_t>(ear)] = {sum_a / static_cast<double>(bins),
                                             sum_p / static_cast<double>(bins)};
        }
        return out;
    }

    // ------------------------------------------------------------------
    // Training (one chunk at a time, fixed graph, hand-derived backward)
    // ------------------------------------------------------------------

    struct ChunkTrace {
        std::vector<Real> mono;
        PoseTrack knots;                       // chunk-local pose sub-track
        WarpField index;                 // geometric + correction
        std::optional<typename WarpNet<Real>::Trace> warp_trace;
        std::array<std::vector<Real>, 2> y_init;
        ComplexSpectrogram<Real> spec_init;
        GainMask<Real> gain;
        std::vector<Real> tanh_a, tanh_p;      // same layout as gain
        std::vector<Pose> frame_poses;
        AudioBuffer<Real> output;
    };

    ChunkTrace forward_chunk(std::vector<Real> mono, const PoseTrack& knots) const {
        const int64_t len = static_cast<int64_t>(mono.size());
        if (len != cfg_.chunk_len) throw ConfigError("forward_chunk: wrong chunk length");
        ChunkTrace t;
        t.mono = std::move(mono);
        t.knots = knots;

        t.index = geometric_warp(knots, len, cfg_.warp);
        if (cfg_.warp.neural_enabled) {
            t.warp_trace = warp_net_.forward(knots);
            add_upsampled_corrections(t.warp_trace->correction, t.index, len);
        }
        for (int ear = 0; ear < 2; ++ear) {
            t.y_init[static_cast<size_t>(ear)].resize(static_cast<size_t>(len));
            fractional_resample(t.mono.data(), len, t.index.index[static_cast<size_t>(ear)].data(), len,
                                t.y_init[static_cast<size_t>(ear)].data());
        }

        const int64_t frames = cfg_.stft.frame_count(len);
        const int64_t bins = cfg_.stft.bins();
        t.spec_init = ComplexSpectrogram<Real>(2, frames, bins, cfg_.stft);
        auto window = hamming_window<Real>(cfg_.stft.window_len);
        FftPlan<Real> plan(cfg_.stft.window_len);
        for (int ear = 0; ear < 2; ++ear)
            stft_channel(t.y_init[static_cast<size_t>(ear)].data(), len, window, cfg_.stft, plan,
                         t.spec_init.frame_ptr(ear, 0), frames);

        t.frame_poses.resize(static_cast<size_t>(frames));
        for (int64_t f = 0; f < frames; ++f)
            t.frame_poses[static_cast<size_t>(f)] =
                track_sample(knots, frame_center_time(f));

        t.gain = GainMask<Real>(frames, bins);
        ComplexSpectrogram<Real> spec_out = t.spec_init;
        if (cfg_.ibc_enabled) {
            t.tanh_a.assign(static_cast<size_t>(2 * frames * bins), Real(0));
            t.tanh_p.assign(static_cast<size_t>(2 * frames * bins), Real(0));
            const int64_t fpc = cfg_.frames_per_chunk();
            for (int64_t f0 = 0; f0 < frames; f0 += kFrameSlab) {
                int64_t f1 = std::min(frames, f0 + kFrameSlab);
                Tensor<Real> coords = build_coords(t.frame_poses, f0, f1, fpc, bins, true);
                Tensor<Real> raw = ibc_.forward(coords);
                store_gains(raw, f0, f1, bins, frames, t.tanh_a, t.tanh_p, t.gain);
            }
            spec_out = apply_gain(t.spec_init, t.gain);
        } else {
            std::fill(t.gain.data.begin(), t.gain.data.end(), std::complex<Real>(1, 0));
        }

        t.output = istft(spec_out, len, cfg_.fs);
        return t;
    }

    // d_output: d(loss)/dy over the stereo chunk. Accumulates parameter
    // gradients for both the IBC and the warp net.
    void backward_chunk(ChunkTrace& t, const AudioBuffer<Real>& d_output) {
        const int64_t len = cfg_.chunk_len;
        const int64_t frames = t.spec_init.frames;
        const int64_t bins = t.spec_init.bins;
        auto window = hamming_window<Real>(cfg_.stft.window_len);
        FftPlan<Real> plan(cfg_.stft.window_len);
        auto den = wola_denominator(window, frames, cfg_.stft.hop);

        // through istft
        ComplexSpectrogram<Real> d_spec_out(2, frames, bins, cfg_.stft);
        for (int ear = 0; ear < 2; ++ear)
            istft_adjoint_channel(d_output.channels[static_cast<size_t>(ear)].data(), len, frames,
                                  window, cfg_.stft, plan, den, d_spec_out.frame_ptr(ear, 0));

        // through the gain product
        ComplexSpectrogram<Real> d_spec_init(2, frames, bins, cfg_.stft);
        if (cfg_.ibc_enabled) {
            std::vector<Real> d_raw_a(static_cast<size_t>(2 * frames * bins));
            std::vector<Real> d_raw_p(static_cast<size_t>(2 * frames * bins));
            for (int ear = 0; ear < 2; ++ear)
                for (int64_t f = 0; f < frames; ++f)
                    for (int64_t b = 0; b < bins; ++b) {
                        size_t gi = static_cast<size_t>((ear * frames + f) * bins + b);
                        std::complex<Real> dx, dg;
                        complex_mul_backward(t.spec_init.at(ear, f, b), t.gain.data[gi],
                                             d_spec_out.at(ear, f, b), dx, dg);
                        d_spec_init.at(ear, f, b) = dx;
                        gain_backward(t.tanh_a[gi], t.tanh_p[gi], cfg_.mlp.alpha, t.gain.data[gi],
                                      dg, d_raw_a[gi], d_raw_p[gi]);
                    }
            // recompute MLP activations slab-by-slab and backpropagate
            const int64_t fpc = cfg_.frames_per_chunk();
            for (int64_t f0 = 0; f0 < frames; f0 += kFrameSlab) {
                int64_t f1 = std::min(frames, f0 + kFrameSlab);
                Tensor<Real> coords = build_coords(t.frame_poses, f0, f1, fpc, bins, true);
                auto trace = ibc_.forward_trace(coords);
                Tensor<Real> d_raw({(f1 - f0) * 2 * bins, 2});
                for (int64_t f = f0; f < f1; ++f)
                    for (int ear = 0; ear < 2; ++ear)
                        for (int64_t b = 0; b < bins; ++b) {
                            int64_t row = ((f - f0) * 2 + ear) * bins + b;
                            size_t gi = static_cast<size_t>((ear * frames + f) * bins + b);
                            d_raw.at2(row, 0) = d_raw_a[gi];
                            d_raw.at2(row, 1) = d_raw_p[gi];
                        }
                ibc_.backward(coords, trace, d_raw);
            }
        } else {
            d_spec_init = d_spec_out;
        }

        // through stft
        std::array<std::vector<Real>, 2> d_y_init;
        for (int ear = 0; ear < 2; ++ear) {
            d_y_init[static_cast<size_t>(ear)].resize(static_cast<size_t>(len));
            stft_adjoint_channel(d_spec_init.frame_ptr(ear, 0), frames, window, cfg_.stft, plan,
                                 d_y_init[static_cast<size_t>(ear)].data(), len);
        }

        // through the fractional resampler into the warp indices
        if (cfg_.warp.neural_enabled && t.warp_trace) {
            const int64_t knot_count = static_cast<int64_t>(t.knots.poses.size());
            Tensor<Real> d_knots({2, knot_count});
            std::vector<Real> d_idx(static_cast<size_t>(len));
            for (int ear = 0; ear < 2; ++ear) {
                fractional_resample_backward(t.mono.data(), len,
                                             t.index.index[static_cast<size_t>(ear)].data(), len,
                                             d_y_init[static_cast<size_t>(ear)].data(),
                                             static_cast<Real*>(nullptr), d_idx.data());
                upsample_to_audio_rate_adjoint(d_idx.data(), len, knot_count, cfg_.pose_rate,
                                               static_cast<double>(cfg_.fs),
                                               d_knots.ptr() + ear * knot_count);
            }
            warp_net_.backward(*t.warp_trace, d_knots);
        }
    }

    // ------------------------------------------------------------------
    // Shared frame coordinate mapping
    // ------------------------------------------------------------------

    double frame_center_time(int64_t frame) const {
        return static_cast<double>(frame * cfg_.stft.hop) / cfg_.fs;
    }

    // Absolute frame index -> position inside its chunk group. Rendering
    // assigns frame f to chunk f / (chunk_len/hop); training chunks span
    // local frames 0..frames_per_chunk-1 on the same normalization.
    double time_norm_for_abs_frame(int64_t abs_frame) const {
        const int64_t group = cfg_.chunk_len / cfg_.stft.hop;
        int64_t l = abs_frame % group;
        if (l < 0) l += group;
        return static_cast<double>(l) / static_cast<double>(cfg_.frames_per_chunk() - 1);
    }

private:
    static constexpr int64_t kFrameSlab = 8;

    void add_upsampled_corrections(const Tensor<Real>& corr_knots, WarpField& field,
                                   int64_t len) const {
        const int64_t knots = corr_knots.dim(1);
        std::vector<Real> corr(static_cast<size_t>(len));
        for (int ear = 0; ear < 2; ++ear) {
            upsample_to_audio_rate(corr_knots.ptr() + ear * knots, knots, len, cfg_.pose_rate,
                                   static_cast<double>(cfg_.fs), corr.data());
            auto& idx = field.index[static_cast<size_t>(ear)];
            for (int64_t i = 0; i < len; ++i) idx[static_cast<size_t>(i)] += corr[static_cast<size_t>(i)];
        }
    }

    // Coordinates for frames [f0, f1): rows ordered (frame, ear, bin).
    // chunk_local: frame index itself is the time coordinate (training);
    // otherwise the absolute-frame mapping applies (rendering). The
    // frequency encoding depends only on the bin and the time encoding only
    // on the frame, so both are tabulated once per slab.
    Tensor<Real> build_coords(const std::vector<Pose>& frame_poses, int64_t f0, int64_t f1,
                              int64_t fpc, int64_t bins, bool chunk_local,
                              const int64_t* abs_frames = nullptr) const {
        const EncodingConfig& enc = cfg_.enc;
        const int64_t width = enc.coord_width();
        const int64_t nf2 = 2 * enc.n_f;
        const int64_t nt2 = 2 * enc.n_t;
        Tensor<Real> coords({(f1 - f0) * 2 * bins, width});

        std::vector<Real> freq_table(static_cast<size_t>(bins * nf2), Real(0));
        if (enc.use_freqpe)
            for (int64_t b = 0; b < bins; ++b)
                sinusoidal_pe(bins > 1 ? static_cast<double>(b) / static_cast<double>(bins - 1) : 0.0,
                              enc.n_f, freq_table.data() + b * nf2);

        std::vector<Real> time_block(static_cast<size_t>(nt2), Real(0));
        for (int64_t f = f0; f < f1; ++f) {
            const Pose& pose = frame_poses[static_cast<size_t>(f)];
            Real head[9];
            for (int j = 0; j < 3; ++j) head[j] = static_cast<Real>(pose.position[static_cast<size_t>(j)]);
            for (int j = 0; j < 4; ++j) head[3 + j] = static_cast<Real>(pose.orientation[static_cast<size_t>(j)]);
            if (enc.use_timepe) {
                double t_norm;
                if (chunk_local) {
                    int64_t frame = std::min(f, fpc - 1);
                    t_norm = fpc > 1 ? static_cast<double>(frame) / static_cast<double>(fpc - 1) : 0.0;
                } else {
                    t_norm = time_norm_for_abs_frame(abs_frames[f]);
                }
                sinusoidal_pe(t_norm, enc.n_t, time_block.data());
            }
            for (int ear = 0; ear < 2; ++ear) {
                head[7] = ear == 0 ? Real(1) : Real(0);
                head[8] = ear == 1 ? Real(1) : Real(0);
                Real* base = coords.ptr() + (((f - f0) * 2 + ear) * bins) * width;
                for (int64_t b = 0; b < bins; ++b) {
                    Real* row = base + b * width;
                    std::copy(head, head + 9, row);
                    std::copy(freq_table.data() + b * nf2, freq_table.data() + (b + 1) * nf2, row + 9);
                    std::copy(time_block.data(), time_block.data() + nt2, row + 9 + nf2);
                }
            }
        }
        return coords;
    }

    void store_gains(const Tensor<Real>& raw, int64_t f0, int64_t f1, int64_t bins, int64_t frames,
                     std::vector<Real>& tanh_a, std::vector<Real>& tanh_p,
                     GainMask<Real>& gain) const {
        for (int64_t f = f0; f < f1; ++f)
            for (int ear = 0; ear < 2; ++ear)
                for (int64_t b = 0; b < bins; ++b) {
                    int64_t row = ((f - f0) * 2 + ear) * bins + b;
                    Real ta = std::tanh(raw.at2(row, 0));
                    Real tp = std::tanh(raw.at2(row, 1));
                    size_t gi = static_cast<size_t>((ear * frames + f) * bins + b);
                    tanh_a[gi] = ta;
                    tanh_p[gi] = tp;
                    gain.data[gi] = build_gain(static_cast<Real>(cfg_.mlp.alpha * ta),
                                               static_cast<Real>(kPi * tp));
                }
    }

    // gains for a run of absolute frames (rendering path)
    GainMask<Real> render_gains(const std::vector<Pose>& frame_poses,
                                const std::vector<int64_t>& abs_frames, int64_t bins) const {
        const int64_t frames = static_cast<int64_t>(frame_poses.size());
        GainMask<Real> gain(frames, bins);
        std::vector<Real> ta(static_cast<size_t>(2 * frames * bins));
        std::vector<Real> tp(static_cast<size_t>(2 * frames * bins));
        const int64_t fpc = cfg_.frames_per_chunk();
        for (int64_t f0 = 0; f0 < frames; f0 += kFrameSlab) {
            int64_t f1 = std::min(frames, f0 + kFrameSlab);
            Tensor<Real> coords =
                build_coords(frame_poses, f0, f1, fpc, bins, false, abs_frames.data());
            Tensor<Real> raw = ibc_.forward(coords);
            store_gains(raw, f0, f1, bins, frames, ta, tp, gain);
        }
        return gain;
    }

    AudioBuffer<Real> spectral_stage_whole(const AudioBuffer<Real>& warped,
                                           const PoseTrack& track) const {
        const int64_t len = warped.length();
        auto spec = stft(warped, cfg_.stft);
        if (cfg_.ibc_enabled) {
            std::vector<Pose> poses(static_cast<size_t>(spec.frames));
            std::vector<int64_t> abs_frames(static_cast<size_t>(spec.frames));
            for (int64_t f = 0; f < spec.frames; ++f) {
                poses[static_cast<size_t>(f)] = track_sample(track, frame_center_time(f));
                abs_frames[static_cast<size_t>(f)] = f;
            }
            auto gain = render_gains(poses, abs_frames, spec.bins);
            spec = apply_gain(spec, gain);
        }
        return istft(spec, len, cfg_.fs);
    }

    // Chunk-grid processing with one full window of context on each side.
    // Frames outside the whole-signal frame set are excluded from the
    // overlap-add, so every kept sample sees exactly the frames, windows and
    // normalizers of the whole-signal path.
    AudioBuffer<Real> spectral_stage_streaming(const AudioBuffer<Real>& warped,
                                               const PoseTrack& track) const {
        const int64_t len = warped.length();
        const int64_t seg = cfg_.chunk_len;
        const int64_t win = cfg_.stft.window_len;
        const int64_t hop = cfg_.stft.hop;
        const int64_t overlap = win;
        const int64_t group = seg / hop;
        const int64_t frame_off = overlap / hop;
        const int64_t total_frames = cfg_.stft.frame_count(len);
        const int64_t pad = cfg_.stft.centered ? win / 2 : 0;
        AudioBuffer<Real> out(warped.sample_rate, 2, len);
        auto window = hamming_window<Real>(win);
        FftPlan<Real> plan(win);

        const int64_t n_chunks = (len + seg - 1) / seg;
        for (int64_t c = 0; c < n_chunks; ++c) {
            const int64_t seg_start = c * seg - overlap;  // absolute sample
            const int64_t seg_len = seg + 2 * overlap;
            AudioBuffer<Real> piece(warped.sample_rate, 2, seg_len);
            for (int ear = 0; ear < 2; ++ear) {
                const auto& src = warped.channels[static_cast<size_t>(ear)];
                auto& dst = piece.channels[static_cast<size_t>(ear)];
                for (int64_t i = 0; i < seg_len; ++i) {
                    int64_t s = seg_start + i;
                    dst[static_cast<size_t>(i)] =
                        (s >= 0 && s < len) ? src[static_cast<size_t>(s)] : Real(0);
                }
            }
            auto spec = stft(piece, cfg_.stft);
            if (cfg_.ibc_enabled) {
                std::vector<Pose> poses(static_cast<size_t>(spec.frames));
                std::vector<int64_t> abs_frames(static_cast<size_t>(spec.frames));
                for (int64_t m = 0; m < spec.frames; ++m) {
                    int64_t f_abs = c * group - frame_off + m;
                    abs_frames[static_cast<size_t>(m)] = f_abs;
                    poses[static_cast<size_t>(m)] = track_sample(track, frame_center_time(f_abs));
                }
                auto gain = render_gains(poses, abs_frames, spec.bins);
                spec = apply_gain(spec, gain);
            }

            // overlap-add over frames that exist in the whole-signal grid
            const int64_t keep = std::min(seg, len - c * seg);
            const int64_t acc_len = (spec.frames - 1) * hop + win;
            std::vector<std::complex<Real>> scratch(static_cast<size_t>(win));
            std::vector<Real> frame(static_cast<size_t>(win));
            for (int ear = 0; ear < 2; ++ear) {
                std::vector<Real> acc(static_cast<size_t>(acc_len), Real(0));
                std::vector<Real> den(static_cast<size_t>(acc_len), Real(0));
                for (int64_t m = 0; m < spec.frames; ++m) {
                    int64_t f_abs = c * group - frame_off + m;
                    if (f_abs < 0 || f_abs >= total_frames) continue;
                    istft_frame(spec.frame_ptr(ear, m), spec.bins, plan, scratch, frame.data());
                    Real* ap = acc.data() + m * hop;
                    Real* dp = den.data() + m * hop;
                    for (int64_t i = 0; i < win; ++i) {
                        Real w = window[static_cast<size_t>(i)];
                        ap[i] += frame[static_cast<size_t>(i)] * w;
                        dp[i] += w * w;
                    }
                }
                auto& dst = out.channels[static_cast<size_t>(ear)];
                for (int64_t i = 0; i < keep; ++i) {
                    int64_t p = overlap + i + pad;  // padded segment coordinate
                    Real d = den[static_cast<size_t>(p)];
                    if (!(d > Real(1e-12)))
                        throw InternalError("streaming render: zero window energy");
                    dst[static_cast<size_t>(c * seg + i)] = acc[static_cast<size_t>(p)] / d;
                }
            }
        }
        return out;
    }

    RunConfig cfg_;
    WarpNet<Real> warp_net_;
    IbcMlp<Real> ibc_;
};

}  // namespace linn
