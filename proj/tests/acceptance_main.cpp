// Acceptance suite: one line per criterion, nonzero exit on any failure.

#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

#include "linn/bench.hpp"
#include "linn/data_io.hpp"
#include "linn/gradcheck.hpp"
#include "linn/model.hpp"
#include "linn/report.hpp"
#include "linn/train.hpp"

using namespace linn;
namespace fs = std::filesystem;

namespace {

struct Criterion {
    int id;
    std::string label;
    std::function<std::string()> run;  // returns detail text; throws on failure
};

void expect(bool ok, const std::string& what) {
    if (!ok) throw std::runtime_error(what);
}

AudioF noise_clip(int64_t len, uint64_t seed, double amp = 0.5) {
    Rng rng(seed);
    AudioF a(48000, 1, len);
    for (auto& v : a.channels[0]) v = static_cast<float>(amp * rng.uniform(-1.0, 1.0));
    return a;
}

PoseTrack arc_track(double seconds, uint64_t seed) {
    Rng rng(seed);
    PoseTrack t;
    t.rate = 120.0;
    int64_t knots = static_cast<int64_t>(std::ceil(seconds * 120.0)) + 2;
    double theta = rng.uniform(-0.5, 0.5);
    for (int64_t k = 0; k < knots; ++k) {
        theta += 0.008;
        t.poses.push_back(Pose::make({1.5 * std::cos(theta), 1.5 * std::sin(theta), 0.0},
                                     {0, 0, 0, 1}));
    }
    return t;
}

template <typename Real>
double interior_max_diff(const AudioBuffer<Real>& a, const AudioBuffer<Real>& b, int64_t margin) {
    double err = 0.0;
    for (int ch = 0; ch < a.channel_count(); ++ch)
        for (int64_t i = margin; i < a.length() - margin; ++i)
            err = std::max(err,
                           std::abs(static_cast<double>(a.channels[static_cast<size_t>(ch)][static_cast<size_t>(i)]) -
                                    static_cast<double>(b.channels[static_cast<size_t>(ch)][static_cast<size_t>(i)])));
    return err;
}

template <typename Real>
double peak_of(const AudioBuffer<Real>& a) {
    double p = 0.0;
    for (const auto& ch : a.channels)
        for (auto v : ch) p = std::max(p, std::abs(static_cast<double>(v)));
    return p;
}

std::string format_double(double v) {
    std::ostringstream ss;
    ss.precision(4);
    ss << v;
    return ss.str();
}

// ---------------------------------------------------------------------------

std::string criterion_param_count() {
    RunConfig cfg;
    LinnModel<float> model(cfg, 0);
    expect(model.ibc_param_count() == 144898,
           "ibc param count " + std::to_string(model.ibc_param_count()) + " != 144898");
    int64_t total = model.param_count();
    expect(total <= 160000, "full model exceeds 0.16 M parameters");
    double millions_2dp = std::round(static_cast<double>(total) / 1e6 * 100.0) / 100.0;
    expect(millions_2dp == 0.15, "parameter count does not round to 0.15 M");
    return "ibc=144898 total=" + std::to_string(total) + " (0.15 M at 2 decimals)";
}

std::string criterion_gain_bounds() {
    const double lo = std::exp(-0.8) * (1.0 - 1e-6);
    const double hi = std::exp(0.8) * (1.0 + 1e-6);
    const int n_models = 100;
    const int64_t coords_per_model = 10000;
    RunConfig cfg;
    Rng seed_rng(424242);
    int64_t checked = 0, violations = 0;
    for (int m = 0; m < n_models; ++m) {
        Rng init(seed_rng.next_u64());
        IbcMlp<float> mlp(cfg.enc.coord_width(), cfg.mlp, init);
        // exercise saturation regimes as well as near-linear ones
        double scale = std::pow(10.0, -1.5 + 3.0 * (m % 10) / 9.0);
        std::vector<ParamRef<float>> refs;
        mlp.collect("ibc", refs);
        for (auto& r : refs)
            for (auto& v : r.param->value.data) v *= static_cast<float>(scale);

        Rng crng(seed_rng.next_u64());
        TensorF coords({coords_per_model, cfg.enc.coord_width()});
        for (int64_t i = 0; i < coords_per_model; ++i) {
            Pose pose = Pose::make(
                {crng.uniform(-3, 3), crng.uniform(-3, 3), crng.uniform(-3, 3)},
                {crng.normal(), crng.normal(), crng.normal(), crng.normal()});
            assemble_coords(pose, static_cast<int>(crng.below(2)), crng.below(151),
                            crng.below(257), 151, 257, cfg.enc,
                            coords.ptr() + i * cfg.enc.coord_width());
        }
        auto raw = mlp.forward(coords);
        for (int64_t i = 0; i < coords_per_model; ++i) {
            float da, dp;
            scale_corrections(raw.at2(i, 0), raw.at2(i, 1), cfg.mlp.alpha, da, dp);
            auto g = build_gain(da, dp);
            double mag = std::abs(std::complex<double>(g.real(), g.imag()));
            double ang = std::arg(std::complex<double>(g.real(), g.imag()));
            if (!(mag >= lo && mag <= hi && ang > -kPi && ang < kPi)) ++violations;
            ++checked;
        }
    }
    expect(checked == 1000000, "expected 1e6 gain samples");
    expect(violations == 0, std::to_string(violations) + " bound violations");
    return "1e6 gains, 0 violations, |G| in [e^-0.8, e^0.8], arg in (-pi, pi)";
}

std::string criterion_stft_roundtrip() {
    StftConfig cfg;
    double worst64 = 0.0, worst32 = 0.0;
    for (uint64_t seed = 1; seed <= 10; ++seed) {
        Rng rng(seed);
        const int64_t len = 48000;
        AudioD x64(48000, 1, len);
        AudioF x32(48000, 1, len);
        for (int64_t i = 0; i < len; ++i) {
            double v = rng.uniform(-1.0, 1.0);
            x64.channels[0][static_cast<size_t>(i)] = v;
            x32.channels[0][static_cast<size_t>(i)] = static_cast<float>(v);
        }
        auto rec64 = istft(stft(x64, cfg), len);
        auto rec32 = istft(stft(x32, cfg), len);
        double peak64 = peak_of(x64), peak32 = peak_of(x32);
        for (int64_t i = cfg.window_len; i < len - cfg.window_len; ++i) {
            worst64 = std::max(worst64, std::abs(rec64.channels[0][static_cast<size_t>(i)] -
                                                 x64.channels[0][static_cast<size_t>(i)]) / peak64);
            worst32 = std::max(worst32,
                               std::abs(static_cast<double>(rec32.channels[0][static_cast<size_t>(i)]) -
                                        static_cast<double>(x32.channels[0][static_cast<size_t>(i)])) / peak32);
        }
    }
    expect(worst64 < 1e-6, "64-bit round trip error " + format_double(worst64));
    expect(worst32 < 1e-4, "32-bit round trip error " + format_double(worst32));
    return "10 clips: err64=" + format_double(worst64) + " err32=" + format_double(worst32);
}

std::string criterion_gradient_suite() {
    double worst = 0.0;
    GradCheckOptions opt;
    opt.eps = 1e-5;

    {  // linear
        Rng rng(1);
        Linear<double> layer(3, 4, rng);
        TensorD x({2, 3});
        for (auto& v : x.data) v = rng.uniform(-1, 1);
        std::vector<double> proj(8);
        for (auto& v : proj) v = rng.uniform(-1, 1);
        auto loss = [&] {
            auto y = layer.forward(x);
            double s = 0;
            for (int64_t i = 0; i < y.numel(); ++i) s += proj[static_cast<size_t>(i)] * y[i];
            return s;
        };
        TensorD dy({2, 4});
        for (int64_t i = 0; i < dy.numel(); ++i) dy[i] = proj[static_cast<size_t>(i)];
        layer.weight().zero_grad();
        layer.bias().zero_grad();
        layer.backward(x, dy);
        std::vector<ParamRef<double>> params;
        layer.collect("lin", params);
        opt.max_probes_per_tensor = 0;
        worst = std::max(worst, grad_check_params(params, loss, opt));
    }
    {  // conv
        Rng rng(2);
        Conv1d<double> conv(2, 3, 3, rng);
        TensorD x({2, 8});
        for (auto& v : x.data) v = rng.uniform(-1, 1);
        std::vector<double> proj(24);
        for (auto& v : proj) v = rng.uniform(-1, 1);
        auto loss = [&] {
            auto y = conv.forward(x);
            double s = 0;
            for (int64_t i = 0; i < y.numel(); ++i) s += proj[static_cast<size_t>(i)] * y[i];
            return s;
        };
        TensorD dy({3, 8});
        for (int64_t i = 0; i < dy.numel(); ++i) dy[i] = proj[static_cast<size_t>(i)];
        conv.kernels().zero_grad();
        conv.bias().zero_grad();
        conv.backward(x, dy);
        std::vector<ParamRef<double>> params;
        conv.collect("conv", params);
        worst = std::max(worst, grad_check_params(params, loss, opt));
    }
    {  // silu, tanh scaling, complex gain application
        Rng rng(3);
        for (int i = 0; i < 24; ++i) {
            double x = rng.uniform(-4, 4);
            double fd = (silu(x + 1e-6) - silu(x - 1e-6)) / 2e-6;
            worst = std::max(worst, std::abs(fd - silu_grad(x)) / std::max(1.0, std::abs(fd)));
        }
        for (int i = 0; i < 16; ++i) {
            double ra = rng.uniform(-2, 2), rp = rng.uniform(-2, 2);
            std::complex<double> x(rng.uniform(-1, 1), rng.uniform(-1, 1));
            std::complex<double> up(rng.uniform(-1, 1), rng.uniform(-1, 1));
            auto fwd = [&](double a, double p) {
                double da, dp;
                scale_corrections(a, p, 0.8, da, dp);
                auto z = x * build_gain(da, dp);
                return up.real() * z.real() + up.imag() * z.imag();
            };
            double da, dp;
            scale_corrections(ra, rp, 0.8, da, dp);
            auto g = build_gain(da, dp);
            std::complex<double> dx, dg;
            complex_mul_backward(x, g, up, dx, dg);
            double d_raw_a, d_raw_p;
            gain_backward(std::tanh(ra), std::tanh(rp), 0.8, g, dg, d_raw_a, d_raw_p);
            double fa = (fwd(ra + 1e-6, rp) - fwd(ra - 1e-6, rp)) / 2e-6;
            double fp = (fwd(ra, rp + 1e-6) - fwd(ra, rp - 1e-6)) / 2e-6;
            worst = std::max(worst, std::abs(fa - d_raw_a) / std::max(1.0, std::abs(fa)));
            worst = std::max(worst, std::abs(fp - d_raw_p) / std::max(1.0, std::abs(fp)));
            // gradient wrt the spectrogram value itself
            auto fwd_x = [&](double xr, double xi) {
                std::complex<double> z = std::complex<double>(xr, xi) * g;
                return up.real() * z.real() + up.imag() * z.imag();
            };
            double fxr = (fwd_x(x.real() + 1e-6, x.imag()) - fwd_x(x.real() - 1e-6, x.imag())) / 2e-6;
            double fxi = (fwd_x(x.real(), x.imag() + 1e-6) - fwd_x(x.real(), x.imag() - 1e-6)) / 2e-6;
            worst = std::max(worst, std::abs(fxr - dx.real()) / std::max(1.0, std::abs(fxr)));
            worst = std::max(worst, std::abs(fxi - dx.imag()) / std::max(1.0, std::abs(fxi)));
        }
    }
    {  // warp resampling
        Rng rng(4);
        int64_t n = 48;
        std::vector<double> x(static_cast<size_t>(n)), idx(static_cast<size_t>(n)), r(static_cast<size_t>(n));
        for (auto& v : x) v = rng.uniform(-1, 1);
        for (int64_t i = 0; i < n; ++i) idx[static_cast<size_t>(i)] = i - 2.6 + 0.3 * rng.uniform();
        for (auto& v : r) v = rng.uniform(-1, 1);
        auto loss = [&] {
            std::vector<double> y(static_cast<size_t>(n));
            fractional_resample(x.data(), n, idx.data(), n, y.data());
            double s = 0;
            for (int64_t i = 0; i < n; ++i) s += r[static_cast<size_t>(i)] * y[static_cast<size_t>(i)];
            return s;
        };
        std::vector<double> dx(static_cast<size_t>(n), 0), didx(static_cast<size_t>(n), 0);
        fractional_resample_backward(x.data(), n, idx.data(), n, r.data(), dx.data(), didx.data());
        worst = std::max(worst, grad_check_span(x.data(), dx.data(), n, loss, opt));
        worst = std::max(worst, grad_check_span(idx.data(), didx.data(), n, loss, opt));
    }
    {  // end-to-end loss through istft . gain . stft . warp, full architecture
        RunConfig cfg;
        cfg.chunk_len = 2048;
        LinnModel<double> model(cfg, 5);
        Rng rng(6);
        std::vector<double> mono(2048);
        for (int t = 0; t < 4; ++t) {
            double f = rng.uniform(300.0, 2500.0), amp = rng.uniform(0.1, 0.25);
            double ph = rng.uniform(0.0, 2 * kPi);
            for (int64_t i = 0; i < 2048; ++i)
                mono[static_cast<size_t>(i)] += amp * std::sin(2 * kPi * f * i / 48000.0 + ph);
        }
        auto knots = arc_track(2048 / 48000.0, 7);
        AudioD gt(48000, 2, 2048);
        for (auto& ch : gt.channels)
            for (auto& v : ch) v = 0.3 * rng.uniform(-1, 1);

        auto loss = [&] {
            auto trace = model.forward_chunk(mono, knots);
            return training_loss(trace.output, gt, cfg.loss, cfg.stft).value;
        };
        model.zero_grads();
        auto trace = model.forward_chunk(mono, knots);
        AudioD d_y;
        training_loss(trace.output, gt, cfg.loss, cfg.stft, &d_y);
        model.backward_chunk(trace, d_y);
        auto params = model.params();
        opt.max_probes_per_tensor = 5;
        // smaller step here: a parameter step of eps shifts every warp read
        // index, and the resampler is only piecewise linear in the indices
        opt.eps = 1e-6;
        worst = std::max(worst, grad_check_params(params, loss, opt));
    }
    expect(worst < 1e-4, "max relative gradient error " + format_double(worst));
    return "max rel err " + format_double(worst) + " (< 1e-4)";
}

std::string criterion_ablation_identities() {
    RunConfig cfg;
    auto mono = noise_clip(48000, 11, 0.4);
    auto track = arc_track(1.0, 12);

    RunConfig no_ibc = cfg;
    no_ibc.ibc_enabled = false;
    LinnModel<float> model(no_ibc, 13);
    auto rendered = model.render(mono, track);
    auto tdw = model.warp_stage(mono, track);
    double err = interior_max_diff(rendered, tdw, cfg.stft.window_len);
    expect(err < 1e-4 * peak_of(tdw), "--no-ibc render differs from TDW by " + format_double(err));

    // zero-initialized warp correction: TDW equals geometric warp exactly
    LinnModel<float> zero_warp(cfg, 14);
    zero_warp.warp_net().conv3().kernels().value.fill(0.0f);
    zero_warp.warp_net().conv3().bias().value.fill(0.0f);
    auto field = geometric_warp(track, mono.length(), cfg.warp);
    auto geo = apply_warp(mono, field);
    auto warped = zero_warp.warp_stage(mono, track);
    for (int ch = 0; ch < 2; ++ch)
        expect(std::memcmp(warped.channels[static_cast<size_t>(ch)].data(),
                           geo.channels[static_cast<size_t>(ch)].data(),
                           sizeof(float) * static_cast<size_t>(mono.length())) == 0,
               "zero-correction TDW is not bit-identical to the geometric warp");
    return "no-ibc err " + format_double(err) + "; zero-correction TDW bit-exact";
}

std::string criterion_synthetic_end_to_end(const fs::path& work) {
    RunConfig cfg;
    cfg.chunk_len = 10240;  // ~0.21 s desk-scale chunks (multiple of the hop)
    cfg.train.epochs = 30;
    cfg.train.batch_size = 16;
    cfg.train.lr_max = 5e-3;
    cfg.train.seed = 20250808;

    fs::path data_dir = work / "synth20";
    SynthSpec spec;
    spec.seed = 99;
    spec.n_items = 20;
    spec.duration_s = 1.2;
    synth_dataset(data_dir.string(), spec, cfg);
    Dataset ds = load_dataset(data_dir.string(), cfg);

    LinnModel<float> untrained(cfg, cfg.train.seed);
    LinnModel<float> model(cfg, cfg.train.seed);
    std::ofstream log(work / "train.log");
    auto result = train_model(model, ds, (work / "synth20.ckpt").string(), log);

    // held-out Wave-l2, trained vs untrained
    double wave_before = 0.0, wave_after = 0.0;
    for (const auto& id : ds.split.test) {
        const auto& item = ds.item_by_id(id);
        wave_before += wave_l2(untrained.render(item.mono, item.track), item.binaural);
        wave_after += wave_l2(model.render(item.mono, item.track), item.binaural);
    }
    wave_before /= static_cast<double>(ds.split.test.size());
    wave_after /= static_cast<double>(ds.split.test.size());
    expect(wave_after <= 0.5 * wave_before,
           "held-out wave_l2 dropped only from " + format_double(wave_before) + " to " +
               format_double(wave_after));
    expect(result.final_val_loss < 0.5 * result.first_val_loss,
           "validation loss dropped only from " + format_double(result.first_val_loss) +
               " (epoch 1) to " + format_double(result.final_val_loss));

    // lateral sweep sign pattern and median-plane near-symmetry
    auto asym = [&](double az_deg) {
        double az = az_deg * kPi / 180.0;
        Pose pose = Pose::make({1.5 * std::cos(az), 1.5 * std::sin(az), 0.0}, {0, 0, 0, 1});
        auto mean = model.probe_mean_corrections(pose);
        return mean[0].first - mean[1].first;  // left minus right mean dlogA
    };
    double a_plus = asym(60.0), a_minus = asym(-60.0), a_zero = asym(0.0);
    expect(a_plus > 0.0, "ipsilateral gain not raised at +60 deg (left)");
    expect(a_minus < 0.0, "ipsilateral gain not raised at -60 deg (right)");
    double lateral_scale = 0.5 * (std::abs(a_plus) + std::abs(a_minus));
    expect(std::abs(a_zero) < 0.3 * lateral_scale,
           "median-plane asymmetry " + format_double(a_zero) + " not small vs lateral " +
               format_double(lateral_scale));

    std::ostringstream detail;
    detail.precision(4);
    detail << "wave_l2 " << wave_before << " -> " << wave_after << " ("
           << format_double(100.0 * (1.0 - wave_after / wave_before)) << "% drop); asym(+60)="
           << a_plus << " asym(-60)=" << a_minus << " asym(0)=" << a_zero
           << " val_loss " << result.initial_val_loss << " -> " << result.final_val_loss;
    return detail.str();
}

std::string criterion_metric_sanity() {
    MetricConfig mc;
    Rng rng(21);
    AudioF x(48000, 2, 24000);
    for (auto& ch : x.channels)
        for (auto& v : ch) v = static_cast<float>(rng.uniform(-0.5, 0.5));
    auto rep = compute_metrics(x, x, mc);
    expect(rep.wave_l2 == 0.0 && rep.amplitude_l2 == 0.0 && rep.phase_l2 == 0.0 &&
               rep.ipd_l2 == 0.0,
           "metrics of identical signals are not all zero");

    for (int i = 0; i < 256; ++i) {
        double d = -15.0 + 30.0 * i / 255.0;
        expect(std::abs(wrap_pi(d + 2 * kPi) - wrap_pi(d)) < 1e-9, "2pi phase invariance broken");
    }

    AudioF same(48000, 2, 24000);
    for (int64_t i = 0; i < 24000; ++i) {
        float v = static_cast<float>(rng.uniform(-0.5, 0.5));
        same.channels[0][static_cast<size_t>(i)] = v;
        same.channels[1][static_cast<size_t>(i)] = v;
    }
    expect(ipd_l2(same, same, mc) == 0.0, "IPD of channel-identical signals is not zero");
    return "eval(x,x)=0 for all metrics; 2pi-invariant; identical-channel IPD=0";
}

std::string criterion_efficiency(const fs::path& work) {
    RunConfig cfg;
    LinnModel<float> model(cfg, 0);
    auto report = count_macs(cfg, 10.0);
    expect(report.param_count == 146132, "param count mismatch");
    measure_rtf(model, 10.0, 5, std::max(2u, std::thread::hardware_concurrency()), report);
    std::string text = efficiency_report_text(report);
    std::ofstream(work / "efficiency.txt") << text;
    expect(text.find("mac_basis=") != std::string::npos, "report does not state its basis");
    expect(report.rtf_single < 1.0,
           "single-thread RTF " + format_double(report.rtf_single) + " >= 1.0");
    // repeat-measurement stability of the methodology
    EfficiencyReport again = count_macs(cfg, 10.0);
    measure_rtf(model, 10.0, 5, 1, again);
    double rel = std::abs(again.rtf_single - report.rtf_single) /
                 std::max(report.rtf_single, 1e-9);
    expect(rel < 0.2, "repeat RTF differs by " + format_double(100 * rel) + "%");
    return "rtf_single=" + format_double(report.rtf_single) + " (repeat within " +
           format_double(100 * rel) + "%), macs/s=" + format_double(report.macs_per_second_audio) +
           ", basis stated in report";
}

std::string criterion_full_scale_statement(const fs::path& work) {
    // Published full-training error levels need the real two-hour dataset and
    // a 100-epoch run; criteria 4-6 stand in at desk scale. When the dataset
    // is present locally, run the full job without any pass/fail gate.
    const char* dataset_env = std::getenv("LINN_BINAURAL_DATASET");
    if (!dataset_env || !fs::is_directory(dataset_env)) {
        return "full-dataset training not reproducible at desk scale (documented); "
               "set LINN_BINAURAL_DATASET to run the optional ungated full job";
    }
    RunConfig cfg;  // full defaults: 100 epochs, batch 32, cosine 1e-3 -> 1e-6
    Dataset ds = load_dataset(dataset_env, cfg);
    LinnModel<float> model(cfg, cfg.train.seed);
    std::ofstream log(work / "full_train.log");
    train_model(model, ds, (work / "full.ckpt").string(), log);
    MetricConfig mc = cfg.metric_config();
    double wave = 0, amp = 0, phase = 0, ipd = 0;
    int64_t n = 0;
    for (const auto& id : ds.split.test) {
        const auto& item = ds.item_by_id(id);
        auto rep = compute_metrics(model.render(item.mono, item.track), item.binaural, mc);
        wave += rep.wave_l2;
        amp += rep.amplitude_l2;
        phase += rep.phase_l2;
        ipd += rep.ipd_l2;
        ++n;
    }
    std::ostringstream ss;
    ss.precision(4);
    ss << "ungated full run: wave=" << wave / n << " amp=" << amp / n << " phase=" << phase / n
       << " ipd=" << ipd / n
       << " (published references: 0.167 / 0.040 / 0.857 / 1.233, not a gate)";
    return ss.str();
}

std::string criterion_determinism(const fs::path& work) {
    RunConfig cfg;
    cfg.chunk_len = 10240;
    cfg.train.epochs = 3;
    cfg.train.batch_size = 4;
    cfg.train.seed = 777;

    fs::path data_dir = work / "synth_det";
    SynthSpec spec;
    spec.seed = 3;
    spec.n_items = 4;
    spec.duration_s = 0.4;
    synth_dataset(data_dir.string(), spec, cfg);
    Dataset ds = load_dataset(data_dir.string(), cfg);

    auto run_once = [&](const std::string& tag) {
        LinnModel<float> model(cfg, cfg.train.seed);
        std::ostringstream log;
        train_model(model, ds, (work / (tag + ".ckpt")).string(), log);
        auto mono = noise_clip(9600, 5, 0.4);
        auto track = arc_track(0.2, 6);
        return model.render(mono, track);
    };
    auto r1 = run_once("det_a");
    auto r2 = run_once("det_b");
    for (int ch = 0; ch < 2; ++ch)
        expect(std::memcmp(r1.channels[static_cast<size_t>(ch)].data(),
                           r2.channels[static_cast<size_t>(ch)].data(),
                           sizeof(float) * static_cast<size_t>(r1.length())) == 0,
               "rendered audio differs between identically seeded runs");

    std::ifstream a(work / "det_a.ckpt", std::ios::binary), b(work / "det_b.ckpt", std::ios::binary);
    std::stringstream sa, sb;
    sa << a.rdbuf();
    sb << b.rdbuf();
    expect(sa.str() == sb.str(), "checkpoints differ between identically seeded runs");
    expect(!sa.str().empty(), "checkpoint file is empty");
    return "two seeded runs: checkpoints and rendered audio byte-identical";
}

}  // namespace

int main() {
    tune_allocator();
    set_thread_count(1);
    fs::path work = fs::temp_directory_path() / "linn_acceptance";
    fs::remove_all(work);
    fs::create_directories(work);

    std::vector<Criterion> criteria = {
        {1, "parameter-count reproduction", criterion_param_count},
        {2, "gain-bound property (1e6 samples)", criterion_gain_bounds},
        {3, "stft round-trip", criterion_stft_roundtrip},
        {4, "gradient suite", criterion_gradient_suite},
        {5, "ablation identities", criterion_ablation_identities},
        {6, "synthetic-oracle end-to-end training", [&] { return criterion_synthetic_end_to_end(work); }},
        {7, "metric sanity", criterion_metric_sanity},
        {8, "efficiency reporting", [&] { return criterion_efficiency(work); }},
        {9, "full-scale results out of desk-scale reach", [&] { return criterion_full_scale_statement(work); }},
        {10, "seeded determinism", [&] { return criterion_determinism(work); }},
    };

    int failures = 0;
    for (auto& c : criteria) {
        try {
            std::string detail = c.run();
            std::cout << "criterion " << c.id << " PASS " << c.label << " -- " << detail << "\n"
                      << std::flush;
        } catch (const std::exception& e) {
            ++failures;
            std::cout << "criterion " << c.id << " FAIL " << c.label << " -- " << e.what() << "\n"
                      << std::flush;
        }
    }
    std::cout << (failures == 0 ? "acceptance: all criteria passed"
                                : "acceptance: " + std::to_string(failures) + " criteria failed")
              << "\n";
    return failures == 0 ? 0 : 1;
}
