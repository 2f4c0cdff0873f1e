#include "linn/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

namespace linn {

EfficiencyReport count_macs(const RunConfig& cfg, double seconds) {
    cfg.validate();
    if (seconds <= 0.0) throw ConfigError("count_macs: duration must be positive");
    EfficiencyReport r;
    const int64_t width = cfg.enc.coord_width();
    const int64_t h = cfg.mlp.hidden;
    const int64_t depth = cfg.mlp.depth;

    r.ibc_params = (width * h + h) + (depth - 1) * (h * h + h) + (h * 2 + 2);
    const int64_t ch = cfg.warp.neural_channels;
    const int64_t k = cfg.warp.kernel;
    r.warp_params = (ch * 7 * k + ch) + (ch * ch * k + ch) + (2 * ch * k + 2);
    if (!cfg.warp.neural_enabled) r.warp_params = 0;
    r.param_count = r.ibc_params + r.warp_params;

    r.macs_per_query = static_cast<double>(width * h + (depth - 1) * h * h + h * 2);
    r.queries_per_frame = 2.0 * static_cast<double>(cfg.stft.bins());
    r.frames_per_second = static_cast<double>(cfg.fs) / static_cast<double>(cfg.stft.hop);

    double ibc_per_s =
        cfg.ibc_enabled ? r.frames_per_second * r.queries_per_frame * r.macs_per_query : 0.0;
    double warp_per_s = 0.0;
    if (cfg.warp.neural_enabled) {
        double conv_macs_per_knot = static_cast<double>(7 * ch * k + ch * ch * k + ch * 2 * k);
        warp_per_s = cfg.pose_rate * conv_macs_per_knot;
    }
    // fractional resample: 2 multiplies per output sample per ear
    double resample_per_s = 4.0 * static_cast<double>(cfg.fs);
    r.macs_per_second_audio = ibc_per_s + warp_per_s + resample_per_s;

    // transforms, counted as 2 N log2(N) real MACs per FFT plus the window
    // multiply; one analysis and one synthesis pass per ear
    double log2n = std::log2(static_cast<double>(cfg.stft.window_len));
    double fft_macs = 2.0 * static_cast<double>(cfg.stft.window_len) * log2n +
                      static_cast<double>(cfg.stft.window_len);
    r.stft_macs_per_second = r.frames_per_second * 2.0 /*ears*/ * 2.0 /*fwd+inv*/ * fft_macs;

    r.segment_basis_s = seconds;
    r.total_macs = r.macs_per_second_audio * seconds;
    return r;
}

namespace {

double time_render(LinnModel<float>& model, const AudioF& mono, const PoseTrack& track) {
    auto t0 = std::chrono::steady_clock::now();
    volatile float sink = model.render(mono, track, true).channels[0][0];
    (void)sink;
    auto t1 = std::chrono::steady_clock::now();
    return std::chrono::duration<double>(t1 - t0).count();
}

}  // namespace

void measure_rtf(LinnModel<float>& model, double seconds, int reps, int threads,
                 EfficiencyReport& report) {
    if (seconds <= 0.0) throw ConfigError("measure_rtf: audio duration must be positive");
    if (reps < 1) throw ConfigError("measure_rtf: need at least one repetition");
    const RunConfig& cfg = model.config();
    const int64_t len = static_cast<int64_t>(seconds * cfg.fs);

    Rng rng(7);
    AudioF mono(cfg.fs, 1, len);
    for (auto& v : mono.channels[0]) v = static_cast<float>(rng.uniform(-0.5, 0.5));
    PoseTrack track;
    track.rate = cfg.pose_rate;
    int64_t knots = static_cast<int64_t>(std::ceil(seconds * cfg.pose_rate)) + 2;
    for (int64_t kn = 0; kn < knots; ++kn) {
        double th = 0.8 * static_cast<double>(kn) / cfg.pose_rate;
        track.poses.push_back(Pose::make({1.5 * std::cos(th), 1.5 * std::sin(th), 0.0}, {0, 0, 0, 1}));
    }

    int saved = thread_count();
    auto run_mode = [&](int nthreads) {
        set_thread_count(nthreads);
        time_render(model, mono, track);  // warm-up
        std::vector<double> times;
        for (int i = 0; i < reps; ++i) times.push_back(time_render(model, mono, track));
        std::sort(times.begin(), times.end());
        double median = times[times.size() / 2];
        if (times.size() % 2 == 0) median = 0.5 * (median + times[times.size() / 2 - 1]);
        return median / seconds;
    };
    report.rtf_single = run_mode(1);
    if (threads > 1) {
        report.rtf_parallel = run_mode(threads);
        report.threads_parallel = threads;
    } else {
        report.rtf_parallel = report.rtf_single;
        report.threads_parallel = 1;
    }
    report.repetitions = reps;
    set_thread_count(saved);
}

}  // namespace linn
