#pragma once

#include <sstream>
#include <string>

#include <json.hpp>

#include "linn/bench.hpp"
#include "linn/loss.hpp"

namespace linn {

// Stable name=value text form; field names are part of the tool contract.
inline std::string metric_report_text(const MetricReport& r) {
    std::ostringstream out;
    out.precision(10);
    out << "wave_l2=" << r.wave_l2 << '\n'
        << "amplitude_l2=" << r.amplitude_l2 << '\n'
        << "phase_l2=" << r.phase_l2 << '\n'
        << "ipd_l2=" << r.ipd_l2 << '\n'
        << "stft_window_len=" << r.cfg.stft.window_len << '\n'
        << "stft_hop=" << r.cfg.stft.hop << '\n'
        << "phase_floor_rel=" << r.cfg.phase_floor_rel << '\n';
    return out.str();
}

inline nlohmann::json metric_report_json(const MetricReport& r) {
    return nlohmann::json{
        {"wave_l2", r.wave_l2},
        {"amplitude_l2", r.amplitude_l2},
        {"phase_l2", r.phase_l2},
        {"ipd_l2", r.ipd_l2},
        {"config",
         {{"stft_window_len", r.cfg.stft.window_len},
          {"stft_hop", r.cfg.stft.hop},
          {"stft_centered", r.cfg.stft.centered},
          {"phase_floor_rel", r.cfg.phase_floor_rel}}},
    };
}

inline std::string efficiency_report_text(const EfficiencyReport& r) {
    std::ostringstream out;
    out.precision(10);
    out << "param_count=" << r.param_count << '\n'
        << "warp_params=" << r.warp_params << '\n'
        << "ibc_params=" << r.ibc_params << '\n'
        << "macs_per_query=" << r.macs_per_query << '\n'
        << "queries_per_frame=" << r.queries_per_frame << '\n'
        << "frames_per_second=" << r.frames_per_second << '\n'
        << "macs_per_second_audio=" << r.macs_per_second_audio << '\n'
        << "stft_macs_per_second=" << r.stft_macs_per_second << '\n'
        << "segment_basis_s=" << r.segment_basis_s << '\n'
        << "total_macs=" << r.total_macs << '\n'
        << "rtf_single=" << r.rtf_single << '\n'
        << "rtf_parallel=" << r.rtf_parallel << '\n'
        << "threads_parallel=" << r.threads_parallel << '\n'
        << "repetitions=" << r.repetitions << '\n'
        << "mac_basis=networks_only_transforms_reported_separately" << '\n';
    return out.str();
}

inline nlohmann::json efficiency_report_json(const EfficiencyReport& r) {
    return nlohmann::json{
        {"param_count", r.param_count},
        {"warp_params", r.warp_params},
        {"ibc_params", r.ibc_params},
        {"macs_per_query", r.macs_per_query},
        {"queries_per_frame", r.queries_per_frame},
        {"frames_per_second", r.frames_per_second},
        {"macs_per_second_audio", r.macs_per_second_audio},
        {"stft_macs_per_second", r.stft_macs_per_second},
        {"segment_basis_s", r.segment_basis_s},
        {"total_macs", r.total_macs},
        {"rtf_single", r.rtf_single},
        {"rtf_parallel", r.rtf_parallel},
        {"threads_parallel", r.threads_parallel},
        {"repetitions", r.repetitions},
        {"mac_basis", "networks only; transforms reported separately"},
    };
}

}  // namespace linn
