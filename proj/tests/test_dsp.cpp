#include <doctest.h>

#include "linn/dsp.hpp"
#include "linn/gradcheck.hpp"

using namespace linn;

namespace {

template <typename Real>
AudioBuffer<Real> noise(int64_t len, uint64_t seed, int nch = 1) {
    Rng rng(seed);
    AudioBuffer<Real> a(48000, nch, len);
    for (auto& ch : a.channels)
        for (auto& v : ch) v = static_cast<Real>(rng.uniform(-1.0, 1.0));
    return a;
}

template <typename Real>
double roundtrip_error(int64_t len, uint64_t seed) {
    auto x = noise<Real>(len, seed);
    StftConfig cfg;
    auto rec = istft(stft(x, cfg), len);
    double peak = 0.0, err = 0.0;
    for (int64_t i = 0; i < len; ++i)
        peak = std::max(peak, std::abs(static_cast<double>(x.channels[0][i])));
    for (int64_t i = cfg.window_len; i < len - cfg.window_len; ++i)
        err = std::max(err, std::abs(static_cast<double>(rec.channels[0][i]) -
                                     static_cast<double>(x.channels[0][i])));
    return err / peak;
}

double inner(const std::vector<std::complex<double>>& a, const std::vector<std::complex<double>>& b) {
    double s = 0.0;
    for (size_t i = 0; i < a.size(); ++i) s += a[i].real() * b[i].real() + a[i].imag() * b[i].imag();
    return s;
}

}  // namespace

TEST_CASE("hamming window closed-form points") {
    auto w = hamming_window<double>(512);
    CHECK(w[0] == doctest::Approx(0.08).epsilon(1e-12));
    CHECK(w[256] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK_THROWS_AS(hamming_window<double>(1), ConfigError);
    CHECK_THROWS_AS(hamming_window<double>(0), ConfigError);
}

TEST_CASE("periodic hamming overlap-add sums are constant at hop n/2") {
    // direct summation over the two overlapping positions
    auto w = hamming_window<double>(512);
    for (int64_t i = 0; i < 256; ++i) {
        double s = w[static_cast<size_t>(i)] + w[static_cast<size_t>(i + 256)];
        CHECK(s == doctest::Approx(1.08).epsilon(1e-12));
    }
    // the squared-window sum is position-dependent, which is why istft
    // normalizes by the running sum of squared windows
    double sq0 = w[0] * w[0] + w[256] * w[256];
    double sq128 = w[128] * w[128] + w[384] * w[384];
    CHECK(std::abs(sq0 - sq128) > 0.1);
}

TEST_CASE("stft frame and bin counts") {
    auto x = noise<double>(48000, 1);
    StftConfig cfg;
    auto spec = stft(x, cfg);
    CHECK(spec.frames == 188);  // 48000/256 + 1
    CHECK(spec.bins == 257);
    CHECK(cfg.frame_count(48000) == 188);
}

TEST_CASE("stft of silence is zero and istft of zeros is silence") {
    AudioD zero(48000, 1, 4096);
    StftConfig cfg;
    auto spec = stft(zero, cfg);
    for (const auto& v : spec.data) {
        CHECK(v.real() == 0.0);
        CHECK(v.imag() == 0.0);
    }
    auto back = istft(spec, 4096);
    for (double v : back.channels[0]) CHECK(v == 0.0);
}

TEST_CASE("pure sinusoid concentrates at its bin") {
    StftConfig cfg;
    int64_t len = 8192;
    AudioD x(48000, 1, len);
    for (int64_t i = 0; i < len; ++i)
        x.channels[0][static_cast<size_t>(i)] = std::sin(2.0 * kPi * 17.0 * static_cast<double>(i) / 512.0);
    auto spec = stft(x, cfg);
    for (int64_t f = 4; f < spec.frames - 4; ++f) {
        int64_t best = 0;
        double best_mag = -1.0;
        for (int64_t b = 0; b < spec.bins; ++b) {
            double m = std::abs(spec.at(0, f, b));
            if (m > best_mag) {
                best_mag = m;
                best = b;
            }
        }
        CHECK(best == 17);
    }
}

TEST_CASE("istft(stft(x)) reconstructs interior samples") {
    for (uint64_t seed : {1ULL, 2ULL, 3ULL})
        CHECK(roundtrip_error<double>(48000, seed) < 1e-6);
    for (uint64_t seed : {4ULL, 5ULL})
        CHECK(roundtrip_error<float>(48000, seed) < 1e-4);
}

TEST_CASE("fft matches the direct reference dft on 512-point inputs") {
    Rng rng(9);
    int64_t n = 512;
    std::vector<std::complex<double>> x(static_cast<size_t>(n));
    for (auto& v : x) v = {rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
    std::vector<std::complex<double>> ref(static_cast<size_t>(n));
    dft_reference(x.data(), ref.data(), n, -1);
    auto fast = x;
    FftPlan<double> plan(n);
    plan.forward(fast.data());
    double err = 0.0;
    for (int64_t i = 0; i < n; ++i) err = std::max(err, std::abs(fast[static_cast<size_t>(i)] - ref[static_cast<size_t>(i)]));
    CHECK(err < 1e-9);

    // inverse round trip
    plan.inverse(fast.data());
    for (auto& v : fast) v /= static_cast<double>(n);
    err = 0.0;
    for (int64_t i = 0; i < n; ++i) err = std::max(err, std::abs(fast[static_cast<size_t>(i)] - x[static_cast<size_t>(i)]));
    CHECK(err < 1e-12);
}

TEST_CASE("stft is linear") {
    StftConfig cfg;
    auto x = noise<double>(4000, 21);
    auto y = noise<double>(4000, 22);
    AudioD z(48000, 1, 4000);
    double a = 1.7, b = -0.4;
    for (int64_t i = 0; i < 4000; ++i)
        z.channels[0][static_cast<size_t>(i)] = a * x.channels[0][static_cast<size_t>(i)] + b * y.channels[0][static_cast<size_t>(i)];
    auto sx = stft(x, cfg), sy = stft(y, cfg), sz = stft(z, cfg);
    double err = 0.0;
    for (size_t i = 0; i < sz.data.size(); ++i)
        err = std::max(err, std::abs(sz.data[i] - (a * sx.data[i] + b * sy.data[i])));
    CHECK(err < 1e-10 * 4000);
}

TEST_CASE("windowed frames satisfy parseval against their spectra") {
    StftConfig cfg;
    auto x = noise<double>(4000, 33);
    auto w = hamming_window<double>(cfg.window_len);
    auto spec = stft(x, cfg);
    // interior frame: reconstruct the windowed segment energy from bins
    int64_t f = 6;
    int64_t start = f * cfg.hop - cfg.window_len / 2;
    double time_energy = 0.0;
    for (int64_t i = 0; i < cfg.window_len; ++i) {
        double v = x.channels[0][static_cast<size_t>(start + i)] * w[static_cast<size_t>(i)];
        time_energy += v * v;
    }
    double freq_energy = std::norm(spec.at(0, f, 0)) + std::norm(spec.at(0, f, 256));
    for (int64_t k = 1; k < 256; ++k) freq_energy += 2.0 * std::norm(spec.at(0, f, k));
    freq_energy /= static_cast<double>(cfg.window_len);
    CHECK(time_energy == doctest::Approx(freq_energy).epsilon(1e-6));
}

TEST_CASE("stft and istft adjoints satisfy the inner-product identity") {
    StftConfig cfg;
    int64_t len = 3000;
    auto x = noise<double>(len, 41);
    auto window = hamming_window<double>(cfg.window_len);
    FftPlan<double> plan(cfg.window_len);
    int64_t frames = cfg.frame_count(len);
    int64_t bins = cfg.bins();

    Rng rng(42);
    std::vector<std::complex<double>> y(static_cast<size_t>(frames * bins));
    for (auto& v : y) v = {rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};

    // <stft(x), y> == <x, stft_adjoint(y)>
    std::vector<std::complex<double>> sx(static_cast<size_t>(frames * bins));
    stft_channel(x.channels[0].data(), len, window, cfg, plan, sx.data(), frames);
    std::vector<double> xadj(static_cast<size_t>(len));
    stft_adjoint_channel(y.data(), frames, window, cfg, plan, xadj.data(), len);
    double lhs = inner(sx, y);
    double rhs = 0.0;
    for (int64_t i = 0; i < len; ++i) rhs += x.channels[0][static_cast<size_t>(i)] * xadj[static_cast<size_t>(i)];
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-10));

    // <istft(y), g> == <y, istft_adjoint(g)>
    auto den = wola_denominator(window, frames, cfg.hop);
    std::vector<double> g(static_cast<size_t>(len));
    for (auto& v : g) v = rng.uniform(-1.0, 1.0);
    std::vector<double> rec(static_cast<size_t>(len));
    istft_channel(y.data(), frames, window, cfg, plan, den, rec.data(), len);
    std::vector<std::complex<double>> yadj(static_cast<size_t>(frames * bins));
    istft_adjoint_channel(g.data(), len, frames, window, cfg, plan, den, yadj.data());
    double lhs2 = 0.0;
    for (int64_t i = 0; i < len; ++i) lhs2 += rec[static_cast<size_t>(i)] * g[static_cast<size_t>(i)];
    double rhs2 = inner(y, yadj);
    CHECK(lhs2 == doctest::Approx(rhs2).epsilon(1e-10));
}

TEST_CASE("fractional resample interpolation and boundary rules") {
    std::vector<double> x{0, 1, 2, 3};
    CHECK(fractional_resample(x, {1.5})[0] == doctest::Approx(1.5));
    auto copy = fractional_resample(x, {0.0, 1.0, 2.0, 3.0});
    for (int i = 0; i < 4; ++i) CHECK(copy[static_cast<size_t>(i)] == x[static_cast<size_t>(i)]);
    CHECK(fractional_resample(x, {-0.5})[0] == 0.0);  // 0.5*0 + 0.5*x[0], x[0]=0
    std::vector<double> x2{2, 4};
    CHECK(fractional_resample(x2, {-0.5})[0] == doctest::Approx(1.0));  // zero-extension left
    CHECK(fractional_resample(x2, {1.5})[0] == doctest::Approx(2.0));   // zero-extension right
}

TEST_CASE("integer-shifted index ramp is an exact delay") {
    Rng rng(50);
    std::vector<double> x(200);
    for (auto& v : x) v = rng.uniform(-1.0, 1.0);
    int64_t d = 7;
    std::vector<double> idx(200);
    for (int64_t i = 0; i < 200; ++i) idx[static_cast<size_t>(i)] = static_cast<double>(i - d);
    auto y = fractional_resample(x, idx);
    for (int64_t i = 0; i < 200; ++i) {
        if (i < d)
            CHECK(y[static_cast<size_t>(i)] == 0.0);
        else
            CHECK(y[static_cast<size_t>(i)] == x[static_cast<size_t>(i - d)]);
    }
}

TEST_CASE("fractional resample gradients match finite differences") {
    Rng rng(60);
    int64_t n = 64;
    std::vector<double> x(static_cast<size_t>(n));
    for (auto& v : x) v = rng.uniform(-1.0, 1.0);
    std::vector<double> idx(static_cast<size_t>(n));
    for (int64_t i = 0; i < n; ++i)
        idx[static_cast<size_t>(i)] = static_cast<double>(i) - 3.3 + 0.4 * rng.uniform();  // stay off integers
    std::vector<double> r(static_cast<size_t>(n));
    for (auto& v : r) v = rng.uniform(-1.0, 1.0);

    auto loss_fn = [&] {
        std::vector<double> y(static_cast<size_t>(n));
        fractional_resample(x.data(), n, idx.data(), n, y.data());
        double s = 0.0;
        for (int64_t i = 0; i < n; ++i) s += r[static_cast<size_t>(i)] * y[static_cast<size_t>(i)];
        return s;
    };

    std::vector<double> dx(static_cast<size_t>(n), 0.0), didx(static_cast<size_t>(n), 0.0);
    fractional_resample_backward(x.data(), n, idx.data(), n, r.data(), dx.data(), didx.data());
    GradCheckOptions opt;
    opt.max_probes_per_tensor = 0;
    CHECK(grad_check_span(x.data(), dx.data(), n, loss_fn, opt) < 1e-6);
    CHECK(grad_check_span(idx.data(), didx.data(), n, loss_fn, opt) < 1e-6);
}

TEST_CASE("stft config validation") {
    StftConfig bad;
    bad.hop = 300;  // does not divide 512
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    StftConfig cfg;
    CHECK_THROWS_AS(cfg.frame_count(0), ConfigError);
}
