#pragma once

#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "linn/config.hpp"
#include "linn/dsp.hpp"
#include "linn/model.hpp"
#include "linn/pose.hpp"

namespace linn {

// ---------------------------------------------------------------------------
// WAV (PCM16 / float32). Saving always writes 32-bit float; integer PCM is
// normalized to [-1, 1] on load with scale 1/32768.
// ---------------------------------------------------------------------------

AudioF load_wav(const std::string& path, int expected_rate = 0);
void save_wav(const std::string& path, const AudioF& audio);

// ---------------------------------------------------------------------------
// Pose text files: one pose per line, 7 whitespace- or comma-separated reals.
// Column order is x y z + quaternion ("xyzw" or "wxyz"). Quaternions are
// normalized on load.
// ---------------------------------------------------------------------------

PoseTrack parse_pose_file(const std::string& path, const std::string& quat_order = "xyzw",
                          double rate = 120.0);
void save_pose_file(const std::string& path, const PoseTrack& track,
                    const std::string& quat_order = "xyzw");

// ---------------------------------------------------------------------------
// Dataset: one subdirectory per item holding mono.wav, binaural.wav, pose.txt.
// An optional index.txt lists item IDs under [train]/[val]/[test] sections;
// absent an index, a deterministic 8/1/1 split by sorted item order is used.
// ---------------------------------------------------------------------------

struct DatasetItem {
    std::string id;
    AudioF mono;
    AudioF binaural;
    PoseTrack track;

    void validate() const;
};

struct DatasetSplit {
    std::vector<std::string> train, val, test;
};

struct Dataset {
    std::vector<DatasetItem> items;
    DatasetSplit split;
    bool split_from_index = false;

    const DatasetItem& item_by_id(const std::string& id) const;
};

Dataset load_dataset(const std::string& dir, const RunConfig& cfg);

// Fixed-length training segment with a consistently resampled pose sub-track.
struct TrainingChunk {
    std::string item_id;
    int64_t start_sample = 0;
    std::vector<float> mono;
    std::vector<float> binaural_l, binaural_r;
    PoseTrack knots;  // re-timed so knot 0 is at the chunk start
};

// Non-overlapping by default (hop_between = 0 means chunk_len); the trailing
// remainder is dropped. chunk_len longer than the item yields no chunks.
std::vector<TrainingChunk> make_chunks(const DatasetItem& item, int64_t chunk_len,
                                       int64_t hop_between, const RunConfig& cfg);

// ---------------------------------------------------------------------------
// Synthetic oracle dataset. Ground truth binaural = per-ear geometric delay
// (same head model as the warp stage) plus a frequency-independent
// ipsilateral/contralateral gain 1 +- strength*sin(azimuth) applied per STFT
// frame. Training against it at desk scale exercises the whole pipeline.
// ---------------------------------------------------------------------------

struct SynthSpec {
    uint64_t seed = 0;
    int n_items = 20;
    double duration_s = 1.2;
    double gain_strength = 0.3;
    double ear_offset = 0.09;  // 0 disables the delay difference
};

// The analytic oracle itself, reusable for verification.
AudioF oracle_binaural(const AudioF& mono, const PoseTrack& track, const RunConfig& cfg,
                       const SynthSpec& spec);

void synth_dataset(const std::string& out_dir, const SynthSpec& spec, const RunConfig& cfg);

// ---------------------------------------------------------------------------
// Checkpoints: magic, format version, full config record, parameter blobs in
// declared order (32-bit little-endian), content checksum. Round trips are
// bit-exact.
// ---------------------------------------------------------------------------

struct CheckpointData {
    nlohmann::json config;
    std::vector<std::pair<std::string, TensorF>> params;
};

void write_checkpoint(const std::string& path, const nlohmann::json& config,
                      const std::vector<ParamRef<float>>& params);
CheckpointData read_checkpoint(const std::string& path);

void save_checkpoint(const std::string& path, LinnModel<float>& model);

// Builds the model from cfg and installs the checkpoint parameters; cfg's
// architecture fields must match the checkpoint's.
LinnModel<float> model_from_checkpoint(const CheckpointData& data, const RunConfig& cfg);
LinnModel<float> load_checkpoint(const std::string& path);

// Copy parameters across precisions (gradient-check mode runs in 64-bit).
template <typename A, typename B>
void copy_params(LinnModel<A>& src, LinnModel<B>& dst) {
    auto sp = src.params();
    auto dp = dst.params();
    if (sp.size() != dp.size()) throw InternalError("copy_params: model structure mismatch");
    for (size_t i = 0; i < sp.size(); ++i) {
        if (sp[i].param->numel() != dp[i].param->numel())
            throw InternalError("copy_params: parameter shape mismatch at " + sp[i].name);
        for (int64_t j = 0; j < sp[i].param->numel(); ++j)
            dp[i].param->value[j] = static_cast<B>(sp[i].param->value[j]);
    }
}

}  // namespace linn
