#pragma once

#include <cstdint>
#include <ostream>
#include <string>

#include <json.hpp>

#include "linn/dsp.hpp"
#include "linn/ibc.hpp"
#include "linn/loss.hpp"
#include "linn/optim.hpp"
#include "linn/warp.hpp"

namespace linn {

struct TrainConfig {
    int epochs = 100;
    int batch_size = 32;
    double lr_max = 1e-3;
    double lr_min = 1e-6;
    double weight_decay = 1e-2;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    uint64_t seed = 0;

    void validate() const {
        if (epochs < 1) throw ConfigError("train: epochs must be >= 1");
        if (batch_size < 1) throw ConfigError("train: batch_size must be >= 1");
    }
};

// Fully resolved run configuration. Merged as
// defaults <- checkpoint <- config file <- command-line flags, with the
// checkpoint's architecture fields authoritative once a checkpoint is loaded.
struct RunConfig {
    int fs = 48000;
    double pose_rate = 120.0;
    std::string quat_order = "xyzw";  // pose-file quaternion column order ("xyzw" or "wxyz")
    int64_t chunk_len = 38400;        // 0.8 s; the TimePE normalization domain

    StftConfig stft;
    WarpConfig warp;
    EncodingConfig enc;
    IbcMlpConfig mlp;
    LossWeights loss;
    double phase_floor_rel = 1e-4;
    TrainConfig train;

    bool ibc_enabled = true;  // --no-ibc forces a unity mask

    void validate() const {
        stft.validate();
        warp.validate();
        enc.validate();
        loss.validate();
        train.validate();
        if (fs <= 0) throw ConfigError("config: fs must be positive");
        if (chunk_len < stft.window_len) throw ConfigError("config: chunk_len below window_len");
        if (chunk_len % stft.hop != 0)
            throw ConfigError("config: chunk_len must be a multiple of the stft hop "
                              "(the render chunk grid and TimePE domain align to it)");
        if (quat_order != "xyzw" && quat_order != "wxyz")
            throw ConfigError("config: quat_order must be xyzw or wxyz");
        if (warp.fs != fs) throw ConfigError("config: warp fs does not match audio fs");
    }

    int64_t frames_per_chunk() const { return chunk_len / stft.hop + 1; }

    MetricConfig metric_config() const { return MetricConfig{stft, phase_floor_rel}; }

    LrSchedule lr_schedule() const { return LrSchedule{train.lr_max, train.lr_min, train.epochs}; }

    AdamwConfig adamw_config() const {
        return AdamwConfig{train.beta1, train.beta2, train.eps, train.weight_decay};
    }
};

inline nlohmann::json to_json(const RunConfig& c) {
    return nlohmann::json{
        {"fs", c.fs},
        {"pose_rate", c.pose_rate},
        {"quat_order", c.quat_order},
        {"chunk_len", c.chunk_len},
        {"stft", {{"window_len", c.stft.window_len}, {"hop", c.stft.hop}, {"centered", c.stft.centered}}},
        {"warp",
         {{"ear_offset", c.warp.ear_offset},
          {"speed_of_sound", c.warp.speed_of_sound},
          {"neural_enabled", c.warp.neural_enabled},
          {"w_max", c.warp.w_max},
          {"neural_channels", c.warp.neural_channels},
          {"neural_layers", c.warp.neural_layers},
          {"kernel", c.warp.kernel}}},
        {"encoding",
         {{"n_f", c.enc.n_f},
          {"n_t", c.enc.n_t},
          {"use_freqpe", c.enc.use_freqpe},
          {"use_timepe", c.enc.use_timepe}}},
        {"mlp", {{"hidden", c.mlp.hidden}, {"depth", c.mlp.depth}, {"alpha", c.mlp.alpha}}},
        {"loss", {{"lambda1", c.loss.lambda1}, {"lambda2", c.loss.lambda2}}},
        {"phase_floor_rel", c.phase_floor_rel},
        {"train",
         {{"epochs", c.train.epochs},
          {"batch_size", c.train.batch_size},
          {"lr_max", c.train.lr_max},
          {"lr_min", c.train.lr_min},
          {"weight_decay", c.train.weight_decay},
          {"beta1", c.train.beta1},
          {"beta2", c.train.beta2},
          {"eps", c.train.eps},
          {"seed", c.train.seed}}},
        {"ibc_enabled", c.ibc_enabled},
    };
}

inline RunConfig config_from_json(const nlohmann::json& j) {
    RunConfig c;
    c.fs = j.value("fs", c.fs);
    c.pose_rate = j.value("pose_rate", c.pose_rate);
    c.quat_order = j.value("quat_order", c.quat_order);
    c.chunk_len = j.value("chunk_len", c.chunk_len);
    if (j.contains("stft")) {
        const auto& s = j.at("stft");
        c.stft.window_len = s.value("window_len", c.stft.window_len);
        c.stft.hop = s.value("hop", c.stft.hop);
        c.stft.centered = s.value("centered", c.stft.centered);
    }
    if (j.contains("warp")) {
        const auto& w = j.at("warp");
        c.warp.ear_offset = w.value("ear_offset", c.warp.ear_offset);
        c.warp.speed_of_sound = w.value("speed_of_sound", c.warp.speed_of_sound);
        c.warp.neural_enabled = w.value("neural_enabled", c.warp.neural_enabled);
        c.warp.w_max = w.value("w_max", c.warp.w_max);
        c.warp.neural_channels = w.value("neural_channels", c.warp.neural_channels);
        c.warp.neural_layers = w.value("neural_layers", c.warp.neural_layers);
        c.warp.kernel = w.value("kernel", c.warp.kernel);
    }
    if (j.contains("encoding")) {
        const auto& e = j.at("encoding");
        c.enc.n_f = e.value("n_f", c.enc.n_f);
        c.enc.n_t = e.value("n_t", c.enc.n_t);
        c.enc.use_freqpe = e.value("use_freqpe", c.enc.use_freqpe);
        c.enc.use_timepe = e.value("use_timepe", c.enc.use_timepe);
    }
    if (j.contains("mlp")) {
        const auto& m = j.at("mlp");
        c.mlp.hidden = m.value("hidden", c.mlp.hidden);
        c.mlp.depth = m.value("depth", c.mlp.depth);
        c.mlp.alpha = m.value("alpha", c.mlp.alpha);
    }
    if (j.contains("loss")) {
        const auto& l = j.at("loss");
        c.loss.lambda1 = l.value("lambda1", c.loss.lambda1);
        c.loss.lambda2 = l.value("lambda2", c.loss.lambda2);
    }
    c.phase_floor_rel = j.value("phase_floor_rel", c.phase_floor_rel);
    if (j.contains("train")) {
        const auto& t = j.at("train");
        c.train.epochs = t.value("epochs", c.train.epochs);
        c.train.batch_size = t.value("batch_size", c.train.batch_size);
        c.train.lr_max = t.value("lr_max", c.train.lr_max);
        c.train.lr_min = t.value("lr_min", c.train.lr_min);
        c.train.weight_decay = t.value("weight_decay", c.train.weight_decay);
        c.train.beta1 = t.value("beta1", c.train.beta1);
        c.train.beta2 = t.value("beta2", c.train.beta2);
        c.train.eps = t.value("eps", c.train.eps);
        c.train.seed = t.value("seed", c.train.seed);
    }
    c.ibc_enabled = j.value("ibc_enabled", c.ibc_enabled);
    c.warp.fs = c.fs;
    return c;
}

// Fields that define parameter shapes or the trained representation; they
// follow the checkpoint when one is loaded.
inline const std::vector<std::string>& architecture_pointers() {
    static const std::vector<std::string> keys = {
        "/stft/window_len", "/stft/hop",      "/stft/centered",      "/chunk_len",
        "/encoding/n_f",    "/encoding/n_t",  "/encoding/use_freqpe", "/encoding/use_timepe",
        "/mlp/hidden",      "/mlp/depth",     "/mlp/alpha",          "/warp/neural_enabled",
        "/warp/neural_channels", "/warp/neural_layers", "/warp/kernel", "/warp/w_max"};
    return keys;
}

// defaults <- checkpoint <- config file <- flags (rightmost wins), except
// that a loaded checkpoint's architecture fields are authoritative; clashes
// are reported through `warnings`.
inline RunConfig resolve_config(const nlohmann::json* checkpoint_cfg,
                                const nlohmann::json& file_cfg, const nlohmann::json& flag_patch,
                                std::ostream* warnings = nullptr) {
    nlohmann::json j = to_json(RunConfig{});
    if (checkpoint_cfg) j.merge_patch(*checkpoint_cfg);
    if (!file_cfg.is_null()) j.merge_patch(file_cfg);
    if (!flag_patch.is_null()) j.merge_patch(flag_patch);
    if (checkpoint_cfg) {
        for (const auto& key : architecture_pointers()) {
            nlohmann::json::json_pointer ptr(key);
            if (!checkpoint_cfg->contains(ptr)) continue;
            if (j.at(ptr) != checkpoint_cfg->at(ptr)) {
                if (warnings)
                    *warnings << "warning: " << key << " override ignored; checkpoint value "
                              << checkpoint_cfg->at(ptr).dump() << " wins\n";
                j[ptr] = checkpoint_cfg->at(ptr);
            }
        }
    }
    RunConfig cfg = config_from_json(j);
    cfg.validate();
    return cfg;
}

}  // namespace linn
