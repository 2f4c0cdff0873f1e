#pragma once

#include <complex>
#include <cstdint>
#include <vector>

#include "linn/common.hpp"

namespace linn {

inline constexpr double kPi = 3.14159265358979323846;

// Sampled audio, one vector per channel, equal lengths.
template <typename Real>
struct AudioBuffer {
    int sample_rate = 48000;
    std::vector<std::vector<Real>> channels;

    AudioBuffer() = default;
    AudioBuffer(int rate, int nch, int64_t len) : sample_rate(rate) {
        channels.assign(static_cast<size_t>(nch), std::vector<Real>(static_cast<size_t>(len), Real(0)));
    }

    int64_t length() const { return channels.empty() ? 0 : static_cast<int64_t>(channels[0].size()); }
    int channel_count() const { return static_cast<int>(channels.size()); }

    void validate() const {
        if (sample_rate <= 0) throw ConfigError("audio: sample_rate must be positive");
        for (const auto& ch : channels)
            if (static_cast<int64_t>(ch.size()) != length())
                throw ConfigError("audio: channels have unequal lengths");
    }
};

using AudioF = AudioBuffer<float>;
using AudioD = AudioBuffer<double>;

// Periodic Hamming: w[i] = 0.54 - 0.46 cos(2 pi i / n).
template <typename Real>
std::vector<Real> hamming_window(int64_t n) {
    if (n <= 1) throw ConfigError("hamming_window: length must exceed 1");
    std::vector<Real> w(static_cast<size_t>(n));
    for (int64_t i = 0; i < n; ++i)
        w[static_cast<size_t>(i)] =
            static_cast<Real>(0.54 - 0.46 * std::cos(2.0 * kPi * static_cast<double>(i) / static_cast<double>(n)));
    return w;
}

// Direct O(n^2) DFT, the reference the FFT is cross-checked against.
// sign = -1 forward, +1 inverse (unnormalized).
template <typename Real>
void dft_reference(const std::complex<Real>* in, std::complex<Real>* out, int64_t n, int sign) {
    for (int64_t k = 0; k < n; ++k) {
        std::complex<double> acc(0.0, 0.0);
        for (int64_t j = 0; j < n; ++j) {
            double ang = sign * 2.0 * kPi * static_cast<double>(k) * static_cast<double>(j) /
                         static_cast<double>(n);
            std::complex<double> tw(std::cos(ang), std::sin(ang));
            acc += std::complex<double>(in[j].real(), in[j].imag()) * tw;
        }
        out[k] = std::complex<Real>(static_cast<Real>(acc.real()), static_cast<Real>(acc.imag()));
    }
}

// Iterative radix-2 FFT for power-of-two sizes; falls back to the direct
// DFT otherwise. Inverse is unnormalized.
template <typename Real>
class FftPlan {
public:
    explicit FftPlan(int64_t n) : n_(n) {
        if (n < 1) throw ConfigError("fft: size must be positive");
        pow2_ = (n & (n - 1)) == 0;
        if (!pow2_) return;
        rev_.resize(static_cast<size_t>(n));
        int log2n = 0;
        while ((int64_t(1) << log2n) < n) ++log2n;
        for (int64_t i = 0; i < n; ++i) {
            int64_t r = 0;
            for (int b = 0; b < log2n; ++b)
                if (i & (int64_t(1) << b)) r |= int64_t(1) << (log2n - 1 - b);
            rev_[static_cast<size_t>(i)] = r;
        }
        tw_.resize(static_cast<size_t>(n / 2));
        for (int64_t i = 0; i < n / 2; ++i) {
            double ang = -2.0 * kPi * static_cast<double>(i) / static_cast<double>(n);
            tw_[static_cast<size_t>(i)] =
                std::complex<Real>(static_cast<Real>(std::cos(ang)), static_cast<Real>(std::sin(ang)));
        }
    }

    int64_t size() const { return n_; }

    void forward(std::complex<Real>* buf) const { run(buf, false); }
    void inverse(std::complex<Real>* buf) const { run(buf, true); }

private:
    void run(std::complex<Real>* buf, bool inv) const {
        if (!pow2_) {
            std::vector<std::complex<Real>> tmp(buf, buf + n_);
            dft_reference(tmp.data(), buf, n_, inv ? +1 : -1);
            return;
        }
        for (int64_t i = 0; i < n_; ++i) {
            int64_t r = rev_[static_cast<size_t>(i)];
            if (i < r) std::swap(buf[i], buf[r]);
        }
        for (int64_t len = 2; len <= n_; len <<= 1) {
            int64_t half = len >> 1;
            int64_t step = n_ / len;
            for (int64_t base = 0; base < n_; base += len) {
                for (int64_t j = 0; j < half; ++j) {
                    std::complex<Real> w = tw_[static_cast<size_t>(j * step)];
                    if (inv) w = std::conj(w);
                    std::complex<Real> odd = buf[base + half + j] * w;
                    std::complex<Real> even = buf[base + j];
                    buf[base + j] = even + odd;
                    buf[base + half + j] = even - odd;
                }
            }
        }
    }

    int64_t n_;
    bool pow2_ = false;
    std::vector<int64_t> rev_;
    std::vector<std::complex<Real>> tw_;
};

struct StftConfig {
    int64_t window_len = 512;
    int64_t hop = 256;
    bool centered = true;

    void validate() const {
        if (window_len <= 1) throw ConfigError("stft: window_len must exceed 1");
        if (hop <= 0) throw ConfigError("stft: hop must be positive");
        if (window_len % hop != 0)
            throw ConfigError("stft: hop must divide window_len (overlap-add reconstruction)");
    }

    int64_t bins() const { return window_len / 2 + 1; }

    int64_t frame_count(int64_t len) const {
        validate();
        if (len < 1) throw ConfigError("stft: signal must have at least one sample");
        if (centered) return len / hop + 1;
        return len >= window_len ? (len - window_len) / hop + 1 : 0;
    }
};

// Per-channel frames x bins complex STFT; only non-negative frequencies are
// stored (bins = window_len/2 + 1).
template <typename Real>
struct ComplexSpectrogram {
    int channels = 0;
    int64_t frames = 0;
    int64_t bins = 0;
    StftConfig cfg;
    std::vector<std::complex<Real>> data;  // [channel][frame][bin]

    ComplexSpectrogram() = default;
    ComplexSpectrogram(int ch, int64_t f, int64_t b, StftConfig c)
        : channels(ch), frames(f), bins(b), cfg(c),
          data(static_cast<size_t>(ch * f * b), std::complex<Real>(0, 0)) {}

    std::complex<Real>& at(int ch, int64_t f, int64_t b) {
        return data[static_cast<size_t>((ch * frames + f) * bins + b)];
    }
    std::complex<Real> at(int ch, int64_t f, int64_t b) const {
        return data[static_cast<size_t>((ch * frames + f) * bins + b)];
    }
    std::complex<Real>* frame_ptr(int ch, int64_t f) {
        return data.data() + static_cast<size_t>((ch * frames + f) * bins);
    }
    const std::complex<Real>* frame_ptr(int ch, int64_t f) const {
        return data.data() + static_cast<size_t>((ch * frames + f) * bins);
    }
};

// ---------------------------------------------------------------------------
// STFT / iSTFT and their exact adjoints. The adjoints are the transposes of
// the linear forward maps and carry d(loss)/d(Re,Im) through the pipeline.
// ---------------------------------------------------------------------------

template <typename Real>
void stft_channel(const Real* x, int64_t len, const std::vector<Real>& window,
                  const StftConfig& cfg, const FftPlan<Real>& plan,
                  std::complex<Real>* out, int64_t frames) {
    const int64_t n = cfg.window_len;
    const int64_t pad = cfg.centered ? n / 2 : 0;
    const int64_t bins = cfg.bins();
    parallel_for(frames, [&](int64_t f0, int64_t f1) {
        std::vector<std::complex<Real>> buf(static_cast<size_t>(n));
        for (int64_t f = f0; f < f1; ++f) {
            int64_t start = f * cfg.hop - pad;
            for (int64_t i = 0; i < n; ++i) {
                int64_t s = start + i;
                Real v = (s >= 0 && s < len) ? x[s] : Real(0);
                buf[static_cast<size_t>(i)] = std::complex<Real>(v * window[static_cast<size_t>(i)], 0);
            }
            plan.forward(buf.data());
            std::complex<Real>* dst = out + f * bins;
            for (int64_t k = 0; k < bins; ++k) dst[k] = buf[static_cast<size_t>(k)];
        }
    });
}

template <typename Real>
ComplexSpectrogram<Real> stft(const AudioBuffer<Real>& audio, const StftConfig& cfg) {
    audio.validate();
    cfg.validate();
    const int64_t len = audio.length();
    const int64_t frames = cfg.frame_count(len);
    ComplexSpectrogram<Real> spec(audio.channel_count(), frames, cfg.bins(), cfg);
    auto window = hamming_window<Real>(cfg.window_len);
    FftPlan<Real> plan(cfg.window_len);
    for (int ch = 0; ch < audio.channel_count(); ++ch)
        stft_channel(audio.channels[static_cast<size_t>(ch)].data(), len, window, cfg, plan,
                     spec.frame_ptr(ch, 0), frames);
    return spec;
}

// Weighted overlap-add sum of squared windows over the frame grid; the
// normalizer for istft. Positions are in padded coordinates.
template <typename Real>
std::vector<Real> wola_denominator(const std::vector<Real>& window, int64_t frames, int64_t hop) {
    const int64_t n = static_cast<int64_t>(window.size());
    std::vector<Real> den(static_cast<size_t>((frames - 1) * hop + n), Real(0));
    for (int64_t f = 0; f < frames; ++f)
        for (int64_t i = 0; i < n; ++i)
            den[static_cast<size_t>(f * hop + i)] += window[static_cast<size_t>(i)] * window[static_cast<size_t>(i)];
    return den;
}

// Rebuild length-n full spectrum from the stored non-negative bins and take
// the real part of the unnormalized inverse transform, scaled by 1/n.
// Only Re of bins 0 and n/2 can influence a real frame; their Im parts drop.
template <typename Real>
void istft_frame(const std::complex<Real>* binsrc, int64_t bins, const FftPlan<Real>& plan,
                 std::vector<std::complex<Real>>& scratch, Real* frame_out) {
    const int64_t n = plan.size();
    for (int64_t k = 0; k < bins; ++k) scratch[static_cast<size_t>(k)] = binsrc[k];
    for (int64_t k = bins; k < n; ++k) scratch[static_cast<size_t>(k)] = std::conj(binsrc[n - k]);
    plan.inverse(scratch.data());
    const Real inv_n = Real(1) / static_cast<Real>(n);
    for (int64_t i = 0; i < n; ++i) frame_out[i] = scratch[static_cast<size_t>(i)].real() * inv_n;
}

template <typename Real>
void istft_channel(const std::complex<Real>* spec, int64_t frames, const std::vector<Real>& window,
                   const StftConfig& cfg, const FftPlan<Real>& plan, const std::vector<Real>& den,
                   Real* out, int64_t out_len) {
    const int64_t n = cfg.window_len;
    const int64_t pad = cfg.centered ? n / 2 : 0;
    const int64_t bins = cfg.bins();
    std::vector<Real> acc(den.size(), Real(0));
    std::vector<std::complex<Real>> scratch(static_cast<size_t>(n));
    std::vector<Real> frame(static_cast<size_t>(n));
    for (int64_t f = 0; f < frames; ++f) {
        istft_frame(spec + f * bins, bins, plan, scratch, frame.data());
        Real* dst = acc.data() + f * cfg.hop;
        for (int64_t i = 0; i < n; ++i) dst[i] += frame[static_cast<size_t>(i)] * window[static_cast<size_t>(i)];
    }
    for (int64_t i = 0; i < out_len; ++i) {
        int64_t p = i + pad;
        if (p < static_cast<int64_t>(acc.size())) {
            Real d = den[static_cast<size_t>(p)];
            if (!(d > Real(1e-12)))
                throw InternalError("istft: zero window energy inside output range");
            out[i] = acc[static_cast<size_t>(p)] / d;
        } else {
            out[i] = Real(0);
        }
    }
}

template <typename Real>
AudioBuffer<Real> istft(const ComplexSpectrogram<Real>& spec, int64_t out_len, int sample_rate = 48000) {
    spec.cfg.validate();
    if (spec.frames < 1) throw ConfigError("istft: spectrogram has no frames");
    AudioBuffer<Real> audio(sample_rate, spec.channels, out_len);
    auto window = hamming_window<Real>(spec.cfg.window_len);
    FftPlan<Real> plan(spec.cfg.window_len);
    auto den = wola_denominator(window, spec.frames, spec.cfg.hop);
    for (int ch = 0; ch < spec.channels; ++ch)
        istft_channel(spec.frame_ptr(ch, 0), spec.frames, window, spec.cfg, plan, den,
                      audio.channels[static_cast<size_t>(ch)].data(), out_len);
    return audio;
}

// Adjoint of stft_channel: scatters spectral gradients back to the signal.
template <typename Real>
void stft_adjoint_channel(const std::complex<Real>* dspec, int64_t frames, const std::vector<Real>& window,
                          const StftConfig& cfg, const FftPlan<Real>& plan, Real* dx, int64_t len) {
    const int64_t n = cfg.window_len;
    const int64_t pad = cfg.centered ? n / 2 : 0;
    const int64_t bins = cfg.bins();
    std::vector<std::complex<Real>> buf(static_cast<size_t>(n));
    std::fill(dx, dx + len, Real(0));
    for (int64_t f = 0; f < frames; ++f) {
        const std::complex<Real>* src = dspec + f * bins;
        for (int64_t k = 0; k < bins; ++k) buf[static_cast<size_t>(k)] = src[k];
        for (int64_t k = bins; k < n; ++k) buf[static_cast<size_t>(k)] = std::complex<Real>(0, 0);
        plan.inverse(buf.data());
        int64_t start = f * cfg.hop - pad;
        for (int64_t i = 0; i < n; ++i) {
            int64_t s = start + i;
            if (s >= 0 && s < len) dx[s] += window[static_cast<size_t>(i)] * buf[static_cast<size_t>(i)].real();
        }
    }
}

// Adjoint of istft_channel.
template <typename Real>
void istft_adjoint_channel(const Real* dout, int64_t out_len, int64_t frames,
                           const std::vector<Real>& window, const StftConfig& cfg,
                           const FftPlan<Real>& plan, const std::vector<Real>& den,
                           std::complex<Real>* dspec) {
    const int64_t n = cfg.window_len;
    const int64_t pad = cfg.centered ? n / 2 : 0;
    const int64_t bins = cfg.bins();
    std::vector<Real> dacc(den.size(), Real(0));
    for (int64_t i = 0; i < out_len; ++i) {
        int64_t p = i + pad;
        if (p < static_cast<int64_t>(dacc.size()))
            dacc[static_cast<size_t>(p)] = dout[i] / den[static_cast<size_t>(p)];
    }
    std::vector<std::complex<Real>> buf(static_cast<size_t>(n));
    const Real inv_n = Real(1) / static_cast<Real>(n);
    for (int64_t f = 0; f < frames; ++f) {
        const Real* src = dacc.data() + f * cfg.hop;
        for (int64_t i = 0; i < n; ++i)
            buf[static_cast<size_t>(i)] =
                std::complex<Real>(src[i] * window[static_cast<size_t>(i)], 0);
        plan.forward(buf.data());
        std::complex<Real>* dst = dspec + f * bins;
        for (int64_t k = 0; k < bins; ++k) {
            Real c = (k == 0 || k == n / 2) ? Real(1) : Real(2);
            dst[k] = std::complex<Real>(buf[static_cast<size_t>(k)].real() * c * inv_n,
                                        buf[static_cast<size_t>(k)].imag() * c * inv_n);
        }
    }
}

// ---------------------------------------------------------------------------
// Fractional-delay resampling by linear interpolation.
// ---------------------------------------------------------------------------

// out[i] = (1-frac)*x[floor(idx[i])] + frac*x[floor(idx[i])+1], zeros outside.
// Read indices are always double: a 32-bit index loses sub-sample precision
// past a few thousand samples.
template <typename Real>
void fractional_resample(const Real* x, int64_t len, const double* idx, int64_t n, Real* out) {
    for (int64_t i = 0; i < n; ++i) {
        double t = idx[i];
        double fl = std::floor(t);
        int64_t f = static_cast<int64_t>(fl);
        Real frac = static_cast<Real>(t - fl);
        Real x0 = (f >= 0 && f < len) ? x[f] : Real(0);
        Real x1 = (f + 1 >= 0 && f + 1 < len) ? x[f + 1] : Real(0);
        out[i] = (Real(1) - frac) * x0 + frac * x1;
    }
}

template <typename Real>
std::vector<Real> fractional_resample(const std::vector<Real>& x, const std::vector<double>& idx) {
    std::vector<Real> out(idx.size());
    fractional_resample(x.data(), static_cast<int64_t>(x.size()), idx.data(),
                        static_cast<int64_t>(idx.size()), out.data());
    return out;
}

// Gradients wrt both the source samples (scatter) and the read indices
// (piecewise-linear slope x[f+1]-x[f]). dx is accumulated, didx overwritten.
template <typename Real>
void fractional_resample_backward(const Real* x, int64_t len, const double* idx, int64_t n,
                                  const Real* dout, Real* dx, Real* didx) {
    for (int64_t i = 0; i < n; ++i) {
        double t = idx[i];
        double fl = std::floor(t);
        int64_t f = static_cast<int64_t>(fl);
        Real frac = static_cast<Real>(t - fl);
        Real x0 = (f >= 0 && f < len) ? x[f] : Real(0);
        Real x1 = (f + 1 >= 0 && f + 1 < len) ? x[f + 1] : Real(0);
        if (didx) didx[i] = dout[i] * (x1 - x0);
        if (dx) {
            if (f >= 0 && f < len) dx[f] += dout[i] * (Real(1) - frac);
            if (f + 1 >= 0 && f + 1 < len) dx[f + 1] += dout[i] * frac;
        }
    }
}

}  // namespace linn
