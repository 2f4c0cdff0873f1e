#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "linn/bench.hpp"
#include "linn/config.hpp"
#include "linn/data_io.hpp"
#include "linn/model.hpp"

namespace py = pybind11;
using namespace linn;

namespace {

PoseTrack track_from_array(py::array_t<double, py::array::c_style | py::array::forcecast> poses,
                           double rate) {
    auto buf = poses.unchecked<2>();
    if (buf.shape(1) != 7) throw ConfigError("poses must be [n, 7]: x y z qx qy qz qw");
    PoseTrack track;
    track.rate = rate;
    for (py::ssize_t i = 0; i < buf.shape(0); ++i)
        track.poses.push_back(Pose::make({buf(i, 0), buf(i, 1), buf(i, 2)},
                                         {buf(i, 3), buf(i, 4), buf(i, 5), buf(i, 6)}));
    return track;
}

AudioF mono_from_array(py::array_t<float, py::array::c_style | py::array::forcecast> x, int fs) {
    auto buf = x.unchecked<1>();
    AudioF audio(fs, 1, buf.shape(0));
    for (py::ssize_t i = 0; i < buf.shape(0); ++i) audio.channels[0][static_cast<size_t>(i)] = buf(i);
    return audio;
}

AudioF stereo_from_array(py::array_t<float, py::array::c_style | py::array::forcecast> x, int fs) {
    auto buf = x.unchecked<2>();
    if (buf.shape(0) != 2) throw ConfigError("stereo array must be [2, n]");
    AudioF audio(fs, 2, buf.shape(1));
    for (int ch = 0; ch < 2; ++ch)
        for (py::ssize_t i = 0; i < buf.shape(1); ++i)
            audio.channels[static_cast<size_t>(ch)][static_cast<size_t>(i)] = buf(ch, i);
    return audio;
}

py::array_t<float> stereo_to_array(const AudioF& audio) {
    py::array_t<float> out({py::ssize_t(2), py::ssize_t(audio.length())});
    auto buf = out.mutable_unchecked<2>();
    for (int ch = 0; ch < 2; ++ch)
        for (int64_t i = 0; i < audio.length(); ++i)
            buf(ch, i) = audio.channels[static_cast<size_t>(ch)][static_cast<size_t>(i)];
    return out;
}

class PyModel {
public:
    PyModel(const std::string& config_json, uint64_t seed) {
        RunConfig cfg = config_json.empty()
                            ? RunConfig{}
                            : config_from_json(nlohmann::json::parse(config_json));
        model_ = std::make_unique<LinnModel<float>>(cfg, seed);
    }

    explicit PyModel(std::unique_ptr<LinnModel<float>> m) : model_(std::move(m)) {}

    static PyModel load(const std::string& path) {
        return PyModel(std::make_unique<LinnModel<float>>(load_checkpoint(path)));
    }

    void save(const std::string& path) { save_checkpoint(path, *model_); }

    py::array_t<float> render(py::array_t<float, py::array::c_style | py::array::forcecast> mono,
                              py::array_t<double, py::array::c_style | py::array::forcecast> poses,
                              double pose_rate, bool streaming) {
        AudioF audio = mono_from_array(mono, model_->config().fs);
        PoseTrack track = track_from_array(poses, pose_rate);
        return stereo_to_array(model_->render(audio, track, streaming));
    }

    py::array_t<float> warp_only(py::array_t<float, py::array::c_style | py::array::forcecast> mono,
                                 py::array_t<double, py::array::c_style | py::array::forcecast> poses,
                                 double pose_rate) {
        AudioF audio = mono_from_array(mono, model_->config().fs);
        PoseTrack track = track_from_array(poses, pose_rate);
        return stereo_to_array(model_->warp_stage(audio, track));
    }

    py::dict probe(double x, double y, double z) {
        auto mean = model_->probe_mean_corrections(Pose::make({x, y, z}, {0, 0, 0, 1}));
        py::dict out;
        out["left"] = py::make_tuple(mean[0].first, mean[0].second);
        out["right"] = py::make_tuple(mean[1].first, mean[1].second);
        return out;
    }

    int64_t param_count() const { return model_->param_count(); }
    std::string config_json() const { return to_json(model_->config()).dump(); }

private:
    std::unique_ptr<LinnModel<float>> model_;
};

}  // namespace

PYBIND11_MODULE(_linn, m) {
    tune_allocator();
    m.doc() = "Lightweight two-stage neural binaural audio synthesis";

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<IoError>(m, "IoError", PyExc_IOError);

    m.def(
        "stft",
        [](py::array_t<double, py::array::c_style | py::array::forcecast> x, int64_t window_len,
           int64_t hop, bool centered) {
            auto buf = x.unchecked<1>();
            AudioD audio(48000, 1, buf.shape(0));
            for (py::ssize_t i = 0; i < buf.shape(0); ++i)
                audio.channels[0][static_cast<size_t>(i)] = buf(i);
            StftConfig cfg{window_len, hop, centered};
            auto spec = stft(audio, cfg);
            py::array_t<std::complex<double>> out({py::ssize_t(spec.frames), py::ssize_t(spec.bins)});
            auto ob = out.mutable_unchecked<2>();
            for (int64_t f = 0; f < spec.frames; ++f)
                for (int64_t b = 0; b < spec.bins; ++b) ob(f, b) = spec.at(0, f, b);
            return out;
        },
        py::arg("x"), py::arg("window_len") = 512, py::arg("hop") = 256, py::arg("centered") = true,
        "Windowed STFT of a 1-D signal; returns [frames, bins] complex bins");

    m.def(
        "istft",
        [](py::array_t<std::complex<double>, py::array::c_style | py::array::forcecast> spec,
           int64_t out_len, int64_t window_len, int64_t hop, bool centered) {
            auto buf = spec.unchecked<2>();
            StftConfig cfg{window_len, hop, centered};
            if (buf.shape(1) != cfg.bins()) throw ConfigError("spectrogram bin count mismatch");
            ComplexSpectrogram<double> s(1, buf.shape(0), cfg.bins(), cfg);
            for (py::ssize_t f = 0; f < buf.shape(0); ++f)
                for (py::ssize_t b = 0; b < buf.shape(1); ++b) s.at(0, f, b) = buf(f, b);
            auto audio = istft(s, out_len);
            py::array_t<double> out(static_cast<py::ssize_t>(out_len));
            auto ob = out.mutable_unchecked<1>();
            for (int64_t i = 0; i < out_len; ++i) ob(i) = audio.channels[0][static_cast<size_t>(i)];
            return out;
        },
        py::arg("spec"), py::arg("out_len"), py::arg("window_len") = 512, py::arg("hop") = 256,
        py::arg("centered") = true,
        "Weighted overlap-add inverse STFT normalized by the running squared-window sum");

    m.def(
        "metrics",
        [](py::array_t<float, py::array::c_style | py::array::forcecast> est,
           py::array_t<float, py::array::c_style | py::array::forcecast> ref, int fs) {
            MetricConfig mc;
            auto rep = compute_metrics(stereo_from_array(est, fs), stereo_from_array(ref, fs), mc);
            py::dict out;
            out["wave_l2"] = rep.wave_l2;
            out["amplitude_l2"] = rep.amplitude_l2;
            out["phase_l2"] = rep.phase_l2;
            out["ipd_l2"] = rep.ipd_l2;
            return out;
        },
        py::arg("estimate"), py::arg("reference"), py::arg("fs") = 48000,
        "Waveform/amplitude/phase/IPD mean-squared-error metrics for stereo pairs");

    m.def(
        "synth_dataset",
        [](const std::string& out_dir, uint64_t seed, int n_items, double duration_s,
           double gain_strength, double ear_offset) {
            RunConfig cfg;
            SynthSpec spec;
            spec.seed = seed;
            spec.n_items = n_items;
            spec.duration_s = duration_s;
            spec.gain_strength = gain_strength;
            spec.ear_offset = ear_offset;
            synth_dataset(out_dir, spec, cfg);
        },
        py::arg("out_dir"), py::arg("seed") = 0, py::arg("n_items") = 20,
        py::arg("duration_s") = 1.2, py::arg("gain_strength") = 0.3, py::arg("ear_offset") = 0.09,
        "Generate a synthetic oracle dataset (mono.wav / binaural.wav / pose.txt per item)");

    m.def(
        "count_macs",
        [](double seconds) {
            auto r = count_macs(RunConfig{}, seconds);
            py::dict out;
            out["param_count"] = r.param_count;
            out["macs_per_query"] = r.macs_per_query;
            out["macs_per_second_audio"] = r.macs_per_second_audio;
            out["stft_macs_per_second"] = r.stft_macs_per_second;
            out["total_macs"] = r.total_macs;
            return out;
        },
        py::arg("seconds") = 1.0, "Analytic MAC accounting for the default configuration");

    m.def("default_config", [] { return to_json(RunConfig{}).dump(); },
          "Default configuration as a JSON string");

    m.def("set_threads", [](int n) { set_thread_count(n); }, py::arg("n"),
          "Worker thread count (results are identical for any value)");

    py::class_<PyModel>(m, "Model")
        .def(py::init<const std::string&, uint64_t>(), py::arg("config_json") = std::string(),
             py::arg("seed") = 0)
        .def_static("load", &PyModel::load, py::arg("path"))
        .def("save", &PyModel::save, py::arg("path"))
        .def("render", &PyModel::render, py::arg("mono"), py::arg("poses"),
             py::arg("pose_rate") = 120.0, py::arg("streaming") = true,
             "Binauralize mono audio along a pose track; returns [2, n] float32")
        .def("warp_only", &PyModel::warp_only, py::arg("mono"), py::arg("poses"),
             py::arg("pose_rate") = 120.0, "Stage-1 output only (time-domain warp)")
        .def("probe", &PyModel::probe, py::arg("x"), py::arg("y"), py::arg("z"),
             "Mean (dlogA, dphi) per ear over frequency bins at a source position")
        .def("param_count", &PyModel::param_count)
        .def("config_json", &PyModel::config_json);
}
