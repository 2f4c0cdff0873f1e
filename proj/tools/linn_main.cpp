#include <cstdlib>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "linn/bench.hpp"
#include "linn/config.hpp"
#include "linn/data_io.hpp"
#include "linn/model.hpp"
#include "linn/report.hpp"
#include "linn/train.hpp"

namespace {

using linn::RunConfig;

int default_threads() {
    if (const char* env = std::getenv("LINN_THREADS")) {
        int n = std::atoi(env);
        if (n > 0) return n;
    }
    return 1;
}

RunConfig resolve_config(const linn::CheckpointData* ckpt, const std::string& config_file,
                         const nlohmann::json& flag_patch) {
    nlohmann::json file_json;
    if (!config_file.empty()) {
        std::ifstream in(config_file);
        if (!in) throw linn::IoError("cannot open config file " + config_file);
        file_json = nlohmann::json::parse(in);
    }
    return linn::resolve_config(ckpt ? &ckpt->config : nullptr, file_json, flag_patch, &std::cerr);
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    if (!out) throw linn::IoError("cannot write " + path);
    out << content;
}

struct AblationFlags {
    bool no_tdw_neural = false;
    bool no_ibc = false;
    bool no_freqpe = false;
    bool no_timepe = false;

    void add_to(CLI::App* cmd) {
        cmd->add_flag("--no-tdw-neural", no_tdw_neural, "disable the learned warp correction");
        cmd->add_flag("--no-ibc", no_ibc, "force a unity gain mask (warp stage only)");
        cmd->add_flag("--no-freqpe", no_freqpe, "zero the frequency positional encoding block");
        cmd->add_flag("--no-timepe", no_timepe, "zero the time positional encoding block");
    }

    void apply(nlohmann::json& patch) const {
        if (no_tdw_neural) patch["warp"]["neural_enabled"] = false;
        if (no_ibc) patch["ibc_enabled"] = false;
        if (no_freqpe) patch["encoding"]["use_freqpe"] = false;
        if (no_timepe) patch["encoding"]["use_timepe"] = false;
    }
};

}  // namespace

int main(int argc, char** argv) {
    linn::tune_allocator();
    CLI::App app{"LINN: lightweight two-stage neural binaural audio synthesis"};
    app.require_subcommand(1);
    app.fallthrough();  // global --threads/--config may follow the subcommand

    int threads = default_threads();
    app.add_option("--threads", threads, "worker threads (1 = deterministic baseline)")
        ->envname("LINN_THREADS");

    std::string config_file;
    app.add_option("--config", config_file, "JSON config file overlay");

    // ---- train ----
    auto* train_cmd = app.add_subcommand("train", "train a model on a dataset directory");
    std::string train_data, train_out = "linn.ckpt", train_log;
    uint64_t seed = 0;
    int epochs = -1, batch = -1;
    int64_t chunk_len_opt = -1;
    AblationFlags train_abl;
    train_cmd->add_option("--data", train_data, "dataset directory")->required();
    train_cmd->add_option("--out", train_out, "output checkpoint path");
    train_cmd->add_option("--log", train_log, "training log path (default <out>.log)");
    train_cmd->add_option("--seed", seed, "RNG seed");
    train_cmd->add_option("--epochs", epochs, "training epochs");
    train_cmd->add_option("--batch", batch, "batch size (chunks)");
    train_cmd->add_option("--chunk-len", chunk_len_opt, "training chunk length, samples");
    train_abl.add_to(train_cmd);

    // ---- render ----
    auto* render_cmd = app.add_subcommand("render", "binauralize a mono file along a pose track");
    std::string render_in, render_pose, render_ckpt, render_out;
    bool whole_file = false;
    AblationFlags render_abl;
    render_cmd->add_option("--input", render_in, "mono wav")->required();
    render_cmd->add_option("--pose", render_pose, "pose track file")->required();
    render_cmd->add_option("--checkpoint", render_ckpt, "model checkpoint")->required();
    render_cmd->add_option("--out", render_out, "output stereo wav")->required();
    render_cmd->add_flag("--whole-file", whole_file,
                         "process in one pass instead of streaming chunks");
    render_abl.add_to(render_cmd);

    // ---- eval ----
    auto* eval_cmd = app.add_subcommand("eval", "objective metrics between estimate and reference");
    std::string eval_est, eval_ref, eval_report, eval_json;
    eval_cmd->add_option("--estimate", eval_est, "estimate wav (stereo)")->required();
    eval_cmd->add_option("--reference", eval_ref, "reference wav (stereo)")->required();
    eval_cmd->add_option("--report", eval_report, "write name=value report here");
    eval_cmd->add_option("--json", eval_json, "write JSON report here");

    // ---- bench ----
    auto* bench_cmd = app.add_subcommand("bench", "parameter/MAC accounting and real-time factor");
    std::string bench_ckpt, bench_report, bench_json;
    double bench_seconds = 10.0;
    int bench_reps = 5;
    AblationFlags bench_abl;
    bench_abl.add_to(bench_cmd);
    bench_cmd->add_option("--checkpoint", bench_ckpt, "model checkpoint (default-config model if omitted)");
    bench_cmd->add_option("--seconds", bench_seconds, "audio duration per timed render");
    bench_cmd->add_option("--reps", bench_reps, "timed repetitions (median reported)");
    bench_cmd->add_option("--report", bench_report, "write name=value report here");
    bench_cmd->add_option("--json", bench_json, "write JSON report here");

    // ---- probe ----
    auto* probe_cmd = app.add_subcommand("probe", "sweep source positions and dump mean corrections");
    std::string probe_ckpt, probe_out, probe_sweep = "lateral";
    int probe_points = 37;
    double probe_radius = 1.5;
    double probe_az_min = -90.0, probe_az_max = 90.0;
    probe_cmd->add_option("--checkpoint", probe_ckpt, "model checkpoint")->required();
    probe_cmd->add_option("--out", probe_out, "output CSV")->required();
    probe_cmd->add_option("--sweep", probe_sweep, "lateral (azimuth arc) or median (front-back)")
        ->check(CLI::IsMember({"lateral", "median"}));
    probe_cmd->add_option("--points", probe_points, "grid positions");
    probe_cmd->add_option("--radius", probe_radius, "arc radius / reference distance, meters");
    probe_cmd->add_option("--azimuth-min", probe_az_min, "lateral sweep start, degrees");
    probe_cmd->add_option("--azimuth-max", probe_az_max, "lateral sweep end, degrees");

    // ---- synth-data ----
    auto* synth_cmd = app.add_subcommand("synth-data", "generate a synthetic oracle dataset");
    std::string synth_out;
    uint64_t synth_seed = 0;
    int synth_items = 20;
    double synth_duration = 1.2, synth_gain = 0.3, synth_ear_offset = 0.09;
    synth_cmd->add_option("--out", synth_out, "output dataset directory")->required();
    synth_cmd->add_option("--seed", synth_seed, "RNG seed");
    synth_cmd->add_option("--items", synth_items, "number of items");
    synth_cmd->add_option("--duration", synth_duration, "item duration, seconds");
    synth_cmd->add_option("--gain-strength", synth_gain, "oracle ILD strength");
    synth_cmd->add_option("--ear-offset", synth_ear_offset, "oracle ear offset, meters (0 = none)");

    CLI11_PARSE(app, argc, argv);

    try {
        linn::set_thread_count(threads);

        if (*train_cmd) {
            nlohmann::json patch;
            if (train_cmd->count("--seed")) patch["train"]["seed"] = seed;
            if (epochs > 0) patch["train"]["epochs"] = epochs;
            if (batch > 0) patch["train"]["batch_size"] = batch;
            if (chunk_len_opt > 0) patch["chunk_len"] = chunk_len_opt;
            train_abl.apply(patch);
            RunConfig cfg = resolve_config(nullptr, config_file, patch);

            linn::Dataset ds = linn::load_dataset(train_data, cfg);
            if (!ds.split_from_index)
                std::cerr << "note: no index.txt, using deterministic 8/1/1 split ("
                          << ds.split.train.size() << "/" << ds.split.val.size() << "/"
                          << ds.split.test.size() << ")\n";
            linn::LinnModel<float> model(cfg, cfg.train.seed);

            std::string log_path = train_log.empty() ? train_out + ".log" : train_log;
            std::ofstream log(log_path);
            if (!log) throw linn::IoError("cannot write " + log_path);
            log << "config=" << linn::to_json(cfg).dump() << "\n";
            auto result = linn::train_model(model, ds, train_out, log);
            std::cout << "final_val_loss=" << result.final_val_loss
                      << " best_val_loss=" << result.best_val_loss
                      << " best_epoch=" << result.best_epoch << "\n"
                      << "checkpoint=" << result.final_path << "\n"
                      << "checkpoint_best=" << result.best_path << "\n"
                      << "log=" << log_path << "\n";
        } else if (*render_cmd) {
            auto ckpt = linn::read_checkpoint(render_ckpt);
            nlohmann::json patch;
            render_abl.apply(patch);
            RunConfig cfg = resolve_config(&ckpt, config_file, patch);
            auto model = linn::model_from_checkpoint(ckpt, cfg);

            linn::AudioF mono = linn::load_wav(render_in, cfg.fs);
            if (mono.channel_count() != 1)
                throw linn::ConfigError("render: input wav must be mono");
            linn::PoseTrack track = linn::parse_pose_file(render_pose, cfg.quat_order, cfg.pose_rate);
            auto out = model.render(mono, track, !whole_file);
            linn::save_wav(render_out, out);
            std::cout << "rendered=" << render_out << " samples=" << out.length() << "\n";
        } else if (*eval_cmd) {
            RunConfig cfg = resolve_config(nullptr, config_file, {});
            linn::AudioF est = linn::load_wav(eval_est, cfg.fs);
            linn::AudioF ref = linn::load_wav(eval_ref, cfg.fs);
            if (est.channel_count() != 2 || ref.channel_count() != 2)
                throw linn::ConfigError("eval: both inputs must be stereo");
            auto report = linn::compute_metrics(est, ref, cfg.metric_config());
            std::string text = linn::metric_report_text(report);
            std::cout << text;
            if (!eval_report.empty()) write_text_file(eval_report, text);
            if (!eval_json.empty()) {
                auto j = linn::metric_report_json(report);
                j["config_full"] = linn::to_json(cfg);
                write_text_file(eval_json, j.dump(2) + "\n");
            }
        } else if (*bench_cmd) {
            std::optional<linn::CheckpointData> ckpt;
            if (!bench_ckpt.empty()) ckpt = linn::read_checkpoint(bench_ckpt);
            nlohmann::json patch;
            bench_abl.apply(patch);
            RunConfig cfg = resolve_config(ckpt ? &*ckpt : nullptr, config_file, patch);
            linn::LinnModel<float> model =
                ckpt ? linn::model_from_checkpoint(*ckpt, cfg) : linn::LinnModel<float>(cfg, 0);

            auto report = linn::count_macs(cfg, bench_seconds);
            if (model.param_count() != report.param_count)
                throw linn::InternalError("bench: analytic and instantiated parameter counts differ");
            linn::measure_rtf(model, bench_seconds, bench_reps, threads, report);
            std::string text = linn::efficiency_report_text(report);
            std::cout << text;
            if (!bench_report.empty()) write_text_file(bench_report, text);
            if (!bench_json.empty()) {
                auto j = linn::efficiency_report_json(report);
                j["config_full"] = linn::to_json(cfg);
                write_text_file(bench_json, j.dump(2) + "\n");
            }
        } else if (*probe_cmd) {
            auto ckpt = linn::read_checkpoint(probe_ckpt);
            RunConfig cfg = resolve_config(&ckpt, config_file, {});
            auto model = linn::model_from_checkpoint(ckpt, cfg);
            if (probe_points < 1) throw linn::ConfigError("probe: empty grid");

            std::ofstream csv(probe_out);
            if (!csv) throw linn::IoError("cannot write " + probe_out);
            csv << "index,x,y,z,azimuth_deg,ear,mean_dlog_a,mean_dphi\n";
            csv.precision(8);
            for (int i = 0; i < probe_points; ++i) {
                double frac = probe_points > 1
                                  ? static_cast<double>(i) / static_cast<double>(probe_points - 1)
                                  : 0.5;
                double x, y, az_deg;
                if (probe_sweep == "lateral") {
                    az_deg = probe_az_min + frac * (probe_az_max - probe_az_min);
                    double az = az_deg * linn::kPi / 180.0;
                    x = probe_radius * std::cos(az);
                    y = probe_radius * std::sin(az);
                } else {
                    x = 0.3 + frac * (2.0 * probe_radius - 0.3);
                    y = 0.0;
                    az_deg = 0.0;
                }
                linn::Pose pose = linn::Pose::make({x, y, 0.0}, {0, 0, 0, 1});
                auto mean = model.probe_mean_corrections(pose);
                for (int ear = 0; ear < 2; ++ear)
                    csv << i << ',' << x << ',' << y << ',' << 0.0 << ',' << az_deg << ',' << ear
                        << ',' << mean[static_cast<size_t>(ear)].first << ','
                        << mean[static_cast<size_t>(ear)].second << '\n';
            }
            std::cout << "probe_rows=" << probe_points * 2 << " out=" << probe_out << "\n";
        } else if (*synth_cmd) {
            RunConfig cfg = resolve_config(nullptr, config_file, {});
            linn::SynthSpec spec;
            spec.seed = synth_seed;
            spec.n_items = synth_items;
            spec.duration_s = synth_duration;
            spec.gain_strength = synth_gain;
            spec.ear_offset = synth_ear_offset;
            linn::synth_dataset(synth_out, spec, cfg);
            std::cout << "dataset=" << synth_out << " items=" << synth_items << "\n";
        }
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
