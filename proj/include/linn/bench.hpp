#pragma once

#include <cstdint>

#include "linn/config.hpp"
#include "linn/model.hpp"

namespace linn {

// Efficiency accounting. MAC counts are analytic from the configuration;
// the headline figure covers the networks (IBC queries, warp-net convs,
// warp resampling) while transform costs are reported separately, since
// network-only accounting is the usual comparison basis.
struct EfficiencyReport {
    int64_t param_count = 0;
    int64_t warp_params = 0;
    int64_t ibc_params = 0;

    double macs_per_query = 0;          // one IBC coordinate query
    double queries_per_frame = 0;       // 2 ears x bins
    double frames_per_second = 0;
    double macs_per_second_audio = 0;   // headline (networks only)
    double stft_macs_per_second = 0;    // analysis + synthesis transforms
    double segment_basis_s = 0;         // audio duration the totals refer to
    double total_macs = 0;

    double rtf_single = 0;
    double rtf_parallel = 0;
    int threads_parallel = 1;
    int repetitions = 0;
};

EfficiencyReport count_macs(const RunConfig& cfg, double seconds);

// Median wall-clock render time / audio duration over `reps` runs of the
// streaming render path, measured single-threaded and with `threads`
// workers. The model is warmed up once before timing.
void measure_rtf(LinnModel<float>& model, double seconds, int reps, int threads,
                 EfficiencyReport& report);

}  // namespace linn
