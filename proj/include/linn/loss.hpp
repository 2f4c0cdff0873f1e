#pragma once

#include <cmath>
#include <cstdint>
#include <limits>

#include "linn/dsp.hpp"

namespace linn {

// wrap to (-pi, pi]
inline double wrap_pi(double x) {
    return x - 2.0 * kPi * std::ceil((x - kPi) / (2.0 * kPi));
}

struct LossWeights {
    double lambda1 = 1.0;   // waveform l2
    double lambda2 = 0.01;  // phase l1

    void validate() const {
        if (lambda1 < 0.0 || lambda2 < 0.0) throw ConfigError("loss weights must be non-negative");
    }
};

template <typename Real>
struct LossResult {
    double value = 0.0;
    double wave_term = 0.0;   // ||y - y*||_2 (unweighted)
    double phase_term = 0.0;  // mean |wrap(angle Y - angle Y*)| (unweighted)
};

namespace detail {
// bins quieter than this power carry no usable phase; their gradient is zero
template <typename Real>
constexpr double phase_grad_power_floor() {
    return std::is_same_v<Real, float> ? 1e-12 : 1e-24;
}
}  // namespace detail

// Total loss lambda1 * ||y - y*||_2 + lambda2 * mean |wrap(angle difference)|
// over all (channel, frame, bin). If d_y is non-null it receives d(loss)/dy,
// including the phase term routed through the STFT adjoint.
template <typename Real>
LossResult<Real> training_loss(const AudioBuffer<Real>& y, const AudioBuffer<Real>& y_ref,
                               const LossWeights& w, const StftConfig& cfg,
                               AudioBuffer<Real>* d_y = nullptr) {
    w.validate();
    y.validate();
    y_ref.validate();
    if (y.length() != y_ref.length() || y.channel_count() != y_ref.channel_count())
        throw ConfigError("training_loss: estimate and reference shapes differ");

    LossResult<Real> res;
    const int nch = y.channel_count();
    const int64_t len = y.length();

    double sq = 0.0;
    for (int ch = 0; ch < nch; ++ch) {
        const auto& a = y.channels[static_cast<size_t>(ch)];
        const auto& b = y_ref.channels[static_cast<size_t>(ch)];
        for (int64_t i = 0; i < len; ++i) {
            double d = static_cast<double>(a[static_cast<size_t>(i)]) - static_cast<double>(b[static_cast<size_t>(i)]);
            sq += d * d;
        }
    }
    res.wave_term = std::sqrt(sq);

    auto spec_y = stft(y, cfg);
    auto spec_ref = stft(y_ref, cfg);
    const int64_t total_bins = static_cast<int64_t>(nch) * spec_y.frames * spec_y.bins;

    if (d_y) {
        *d_y = AudioBuffer<Real>(y.sample_rate, nch, len);
        double inv_wave = res.wave_term > 0.0 ? w.lambda1 / res.wave_term : 0.0;
        for (int ch = 0; ch < nch; ++ch) {
            const auto& a = y.channels[static_cast<size_t>(ch)];
            const auto& b = y_ref.channels[static_cast<size_t>(ch)];
            auto& g = d_y->channels[static_cast<size_t>(ch)];
            for (int64_t i = 0; i < len; ++i)
                g[static_cast<size_t>(i)] = static_cast<Real>(
                    inv_wave * (static_cast<double>(a[static_cast<size_t>(i)]) -
                                static_cast<double>(b[static_cast<size_t>(i)])));
        }
    }

    const double power_floor = detail::phase_grad_power_floor<Real>();
    double phase_sum = 0.0;
    std::vector<std::complex<Real>> dspec;
    if (d_y) dspec.assign(static_cast<size_t>(spec_y.frames * spec_y.bins), std::complex<Real>(0, 0));
    auto window = hamming_window<Real>(cfg.window_len);
    FftPlan<Real> plan(cfg.window_len);

    for (int ch = 0; ch < nch; ++ch) {
        if (d_y) std::fill(dspec.begin(), dspec.end(), std::complex<Real>(0, 0));
        for (int64_t f = 0; f < spec_y.frames; ++f) {
            const std::complex<Real>* py = spec_y.frame_ptr(ch, f);
            const std::complex<Real>* pr = spec_ref.frame_ptr(ch, f);
            for (int64_t k = 0; k < spec_y.bins; ++k) {
                double re = py[k].real(), im = py[k].imag();
                double theta = std::atan2(im, re);
                double theta_ref = std::atan2(static_cast<double>(pr[k].imag()),
                                              static_cast<double>(pr[k].real()));
                double diff = wrap_pi(theta - theta_ref);
                phase_sum += std::abs(diff);
                if (d_y) {
                    double power = re * re + im * im;
                    if (power > power_floor && diff != 0.0) {
                        double s = (diff > 0.0 ? 1.0 : -1.0) * w.lambda2 /
                                   static_cast<double>(total_bins);
                        dspec[static_cast<size_t>(f * spec_y.bins + k)] +=
                            std::complex<Real>(static_cast<Real>(-s * im / power),
                                               static_cast<Real>(s * re / power));
                    }
                }
            }
        }
        if (d_y) {
            std::vector<Real> grad(static_cast<size_t>(len));
            stft_adjoint_channel(dspec.data(), spec_y.frames, window, cfg, plan, grad.data(), len);
            auto& g = d_y->channels[static_cast<size_t>(ch)];
            for (int64_t i = 0; i < len; ++i) g[static_cast<size_t>(i)] += grad[static_cast<size_t>(i)];
        }
    }
    res.phase_term = phase_sum / static_cast<double>(total_bins);
    res.value = w.lambda1 * res.wave_term + w.lambda2 * res.phase_term;
    return res;
}

// ---------------------------------------------------------------------------
// Objective evaluation metrics. All are MSE-based, zero on identical input,
// and invariant to adding 2 pi to any phase.
// ---------------------------------------------------------------------------

struct MetricConfig {
    StftConfig stft;
    double phase_floor_rel = 1e-4;  // reference-magnitude floor for phase metrics (0 = all bins)
};

struct MetricReport {
    double wave_l2 = 0.0;       // MSE over samples, reported x 1e3
    double amplitude_l2 = 0.0;  // MSE over |Y|
    double phase_l2 = 0.0;      // MSE of wrapped phase diff over active bins
    double ipd_l2 = 0.0;        // MSE of wrapped IPD diff over active bins
    MetricConfig cfg;           // config echo
};

template <typename Real>
void check_same_shape(const AudioBuffer<Real>& a, const AudioBuffer<Real>& b) {
    if (a.length() != b.length() || a.channel_count() != b.channel_count())
        throw ConfigError("metrics: estimate and reference shapes differ");
}

// mean squared sample error, scaled by 1e3
template <typename Real>
double wave_l2(const AudioBuffer<Real>& y, const AudioBuffer<Real>& y_ref) {
    check_same_shape(y, y_ref);
    double sq = 0.0;
    int64_t count = 0;
    for (int ch = 0; ch < y.channel_count(); ++ch) {
        const auto& a = y.channels[static_cast<size_t>(ch)];
        const auto& b = y_ref.channels[static_cast<size_t>(ch)];
        for (size_t i = 0; i < a.size(); ++i) {
            double d = static_cast<double>(a[i]) - static_cast<double>(b[i]);
            sq += d * d;
            ++count;
        }
    }
    return count > 0 ? 1e3 * sq / static_cast<double>(count) : 0.0;
}

template <typename Real>
double amplitude_l2(const AudioBuffer<Real>& y, const AudioBuffer<Real>& y_ref,
                    const StftConfig& cfg) {
    check_same_shape(y, y_ref);
    auto sy = stft(y, cfg);
    auto sr = stft(y_ref, cfg);
    double sq = 0.0;
    int64_t count = 0;
    for (size_t i = 0; i < sy.data.size(); ++i) {
        double d = std::abs(std::complex<double>(sy.data[i].real(), sy.data[i].imag())) -
                   std::abs(std::complex<double>(sr.data[i].real(), sr.data[i].imag()));
        sq += d * d;
        ++count;
    }
    return count > 0 ? sq / static_cast<double>(count) : 0.0;
}

namespace detail {
template <typename Real>
double max_magnitude(const ComplexSpectrogram<Real>& s) {
    double m = 0.0;
    for (const auto& v : s.data)
        m = std::max(m, std::abs(std::complex<double>(v.real(), v.imag())));
    return m;
}
}  // namespace detail

// MSE of wrapped per-bin phase difference; bins whose reference magnitude is
// below phase_floor_rel * max|Y*| are excluded.
template <typename Real>
double phase_l2(const AudioBuffer<Real>& y, const AudioBuffer<Real>& y_ref, const MetricConfig& mc) {
    check_same_shape(y, y_ref);
    auto sy = stft(y, mc.stft);
    auto sr = stft(y_ref, mc.stft);
    double floor = mc.phase_floor_rel * detail::max_magnitude(sr);
    double sq = 0.0;
    int64_t count = 0;
    for (size_t i = 0; i < sy.data.size(); ++i) {
        double mag_ref = std::abs(std::complex<double>(sr.data[i].real(), sr.data[i].imag()));
        if (mag_ref < floor) continue;
        double d = wrap_pi(std::atan2(static_cast<double>(sy.data[i].imag()),
                                      static_cast<double>(sy.data[i].real())) -
                           std::atan2(static_cast<double>(sr.data[i].imag()),
                                      static_cast<double>(sr.data[i].real())));
        sq += d * d;
        ++count;
    }
    return count > 0 ? sq / static_cast<double>(count) : 0.0;
}

// interaural phase difference of one stereo spectrogram pair
inline double ipd_of(std::complex<double> left, std::complex<double> right) {
    std::complex<double> cross = left * std::conj(right);
    return std::atan2(cross.imag(), cross.real());
}

// MSE of wrapped IPD difference over bins where both reference ears carry
// energy above the floor.
template <typename Real>
double ipd_l2(const AudioBuffer<Real>& y, const AudioBuffer<Real>& y_ref, const MetricConfig& mc) {
    check_same_shape(y, y_ref);
    if (y.channel_count() != 2) throw ConfigError("ipd_l2: stereo input required");
    auto sy = stft(y, mc.stft);
    auto sr = stft(y_ref, mc.stft);
    double floor = mc.phase_floor_rel * detail::max_magnitude(sr);
    double sq = 0.0;
    int64_t count = 0;
    for (int64_t f = 0; f < sy.frames; ++f) {
        const std::complex<Real>* yl = sy.frame_ptr(0, f);
        const std::complex<Real>* yr = sy.frame_ptr(1, f);
        const std::complex<Real>* rl = sr.frame_ptr(0, f);
        const std::complex<Real>* rr = sr.frame_ptr(1, f);
        for (int64_t k = 0; k < sy.bins; ++k) {
            std::complex<double> rl_d(rl[k].real(), rl[k].imag());
            std::complex<double> rr_d(rr[k].real(), rr[k].imag());
            if (std::abs(rl_d) < floor || std::abs(rr_d) < floor) continue;
            double ipd_est = ipd_of(std::complex<double>(yl[k].real(), yl[k].imag()),
                                    std::complex<double>(yr[k].real(), yr[k].imag()));
            double d = wrap_pi(ipd_est - ipd_of(rl_d, rr_d));
            sq += d * d;
            ++count;
        }
    }
    return count > 0 ? sq / static_cast<double>(count) : 0.0;
}

template <typename Real>
MetricReport compute_metrics(const AudioBuffer<Real>& y, const AudioBuffer<Real>& y_ref,
                             const MetricConfig& mc) {
    MetricReport rep;
    rep.cfg = mc;
    rep.wave_l2 = wave_l2(y, y_ref);
    rep.amplitude_l2 = amplitude_l2(y, y_ref, mc.stft);
    rep.phase_l2 = phase_l2(y, y_ref, mc);
    rep.ipd_l2 = ipd_l2(y, y_ref, mc);
    return rep;
}

}  // namespace linn
