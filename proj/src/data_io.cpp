#include "linn/data_io.hpp"

#include <algorithm>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace fs = std::filesystem;

namespace linn {

namespace {

template <typename T>
void write_le(std::ostream& out, T v) {
    unsigned char buf[sizeof(T)];
    std::memcpy(buf, &v, sizeof(T));
    out.write(reinterpret_cast<const char*>(buf), sizeof(T));
}

template <typename T>
T read_le(std::istream& in, const std::string& what) {
    unsigned char buf[sizeof(T)];
    in.read(reinterpret_cast<char*>(buf), sizeof(T));
    if (!in) throw IoError("truncated file while reading " + what);
    T v;
    std::memcpy(&v, buf, sizeof(T));
    return v;
}

}  // namespace

// ---------------------------------------------------------------------------
// WAV
// ---------------------------------------------------------------------------

AudioF load_wav(const std::string& path, int expected_rate) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);

    char tag[4];
    in.read(tag, 4);
    if (!in || std::memcmp(tag, "RIFF", 4) != 0) throw IoError(path + ": not a RIFF file");
    read_le<uint32_t>(in, "riff size");
    in.read(tag, 4);
    if (!in || std::memcmp(tag, "WAVE", 4) != 0) throw IoError(path + ": not a WAVE file");

    uint16_t format = 0, channels = 0, bits = 0;
    uint32_t rate = 0;
    bool have_fmt = false;
    std::vector<char> payload;

    while (in.read(tag, 4)) {
        uint32_t size = read_le<uint32_t>(in, "chunk size");
        if (std::memcmp(tag, "fmt ", 4) == 0) {
            format = read_le<uint16_t>(in, "format");
            channels = read_le<uint16_t>(in, "channels");
            rate = read_le<uint32_t>(in, "sample rate");
            read_le<uint32_t>(in, "byte rate");
            read_le<uint16_t>(in, "block align");
            bits = read_le<uint16_t>(in, "bits");
            if (size > 16) in.seekg(size - 16, std::ios::cur);
            have_fmt = true;
        } else if (std::memcmp(tag, "data", 4) == 0) {
            payload.resize(size);
            in.read(payload.data(), size);
            if (!in) throw IoError(path + ": truncated data chunk");
            break;
        } else {
            in.seekg(size + (size & 1), std::ios::cur);
        }
    }
    if (!have_fmt) throw IoError(path + ": missing fmt chunk");
    if (payload.empty()) throw IoError(path + ": missing data chunk");
    if (channels < 1) throw IoError(path + ": no channels");
    if (expected_rate > 0 && static_cast<int>(rate) != expected_rate)
        throw IoError(path + ": unsupported sample rate " + std::to_string(rate) + " (expected " +
                      std::to_string(expected_rate) + ")");

    AudioF audio;
    audio.sample_rate = static_cast<int>(rate);
    const size_t nch = channels;
    if (format == 1 && bits == 16) {
        size_t n = payload.size() / 2 / nch;
        audio.channels.assign(nch, std::vector<float>(n));
        const int16_t* src = reinterpret_cast<const int16_t*>(payload.data());
        for (size_t i = 0; i < n; ++i)
            for (size_t c = 0; c < nch; ++c)
                audio.channels[c][i] = static_cast<float>(src[i * nch + c]) / 32768.0f;
    } else if (format == 3 && bits == 32) {
        size_t n = payload.size() / 4 / nch;
        audio.channels.assign(nch, std::vector<float>(n));
        const float* src = reinterpret_cast<const float*>(payload.data());
        for (size_t i = 0; i < n; ++i)
            for (size_t c = 0; c < nch; ++c) audio.channels[c][i] = src[i * nch + c];
    } else {
        throw IoError(path + ": unsupported encoding (format " + std::to_string(format) + ", " +
                      std::to_string(bits) + " bit); expected PCM16 or float32");
    }
    return audio;
}

void save_wav(const std::string& path, const AudioF& audio) {
    audio.validate();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    const uint16_t nch = static_cast<uint16_t>(audio.channel_count());
    const uint32_t rate = static_cast<uint32_t>(audio.sample_rate);
    const uint32_t n = static_cast<uint32_t>(audio.length());
    const uint32_t data_size = n * nch * 4;

    out.write("RIFF", 4);
    write_le<uint32_t>(out, 36 + data_size);
    out.write("WAVE", 4);
    out.write("fmt ", 4);
    write_le<uint32_t>(out, 16);
    write_le<uint16_t>(out, 3);  // IEEE float
    write_le<uint16_t>(out, nch);
    write_le<uint32_t>(out, rate);
    write_le<uint32_t>(out, rate * nch * 4);
    write_le<uint16_t>(out, static_cast<uint16_t>(nch * 4));
    write_le<uint16_t>(out, 32);
    out.write("data", 4);
    write_le<uint32_t>(out, data_size);
    for (uint32_t i = 0; i < n; ++i)
        for (uint16_t c = 0; c < nch; ++c) write_le<float>(out, audio.channels[c][i]);
    if (!out) throw IoError("failed writing " + path);
}

// ---------------------------------------------------------------------------
// Pose files
// ---------------------------------------------------------------------------

PoseTrack parse_pose_file(const std::string& path, const std::string& quat_order, double rate) {
    if (quat_order != "xyzw" && quat_order != "wxyz")
        throw ConfigError("pose file: quat_order must be xyzw or wxyz");
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    PoseTrack track;
    track.rate = rate;
    std::string line;
    int64_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        for (auto& c : line)
            if (c == ',') c = ' ';
        std::istringstream ss(line);
        std::vector<double> vals;
        double v;
        while (ss >> v) vals.push_back(v);
        if (vals.empty()) {
            std::istringstream probe(line);
            std::string tok;
            if (probe >> tok)
                throw IoError(path + ":" + std::to_string(line_no) + ": non-numeric token '" + tok + "'");
            continue;  // blank line
        }
        ss.clear();
        std::string trailing;
        if (ss >> trailing)
            throw IoError(path + ":" + std::to_string(line_no) + ": non-numeric token '" + trailing + "'");
        if (vals.size() != 7)
            throw IoError(path + ":" + std::to_string(line_no) + ": expected 7 fields, got " +
                          std::to_string(vals.size()));
        std::array<double, 3> p{vals[0], vals[1], vals[2]};
        std::array<double, 4> q{};
        if (quat_order == "xyzw") {
            q = {vals[3], vals[4], vals[5], vals[6]};
        } else {
            q = {vals[4], vals[5], vals[6], vals[3]};
        }
        track.poses.push_back(Pose::make(p, q));
    }
    if (track.poses.empty()) throw IoError(path + ": empty pose file");
    return track;
}

void save_pose_file(const std::string& path, const PoseTrack& track, const std::string& quat_order) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    out.precision(17);
    for (const auto& pose : track.poses) {
        const auto& p = pose.position;
        const auto& q = pose.orientation;
        out << p[0] << ' ' << p[1] << ' ' << p[2] << ' ';
        if (quat_order == "xyzw")
            out << q[0] << ' ' << q[1] << ' ' << q[2] << ' ' << q[3] << '\n';
        else
            out << q[3] << ' ' << q[0] << ' ' << q[1] << ' ' << q[2] << '\n';
    }
}

// ---------------------------------------------------------------------------
// Dataset
// ---------------------------------------------------------------------------

void DatasetItem::validate() const {
    mono.validate();
    binaural.validate();
    track.validate();
    if (mono.channel_count() != 1) throw ConfigError("dataset item " + id + ": mono.wav is not mono");
    if (binaural.channel_count() != 2)
        throw ConfigError("dataset item " + id + ": binaural.wav is not stereo");
    if (mono.length() != binaural.length())
        throw ConfigError("dataset item " + id + ": mono and binaural lengths differ");
    double audio_dur = static_cast<double>(mono.length()) / mono.sample_rate;
    if (track.duration() + 1.0 / track.rate < audio_dur)
        throw ConfigError("dataset item " + id + ": pose track shorter than audio");
}

const DatasetItem& Dataset::item_by_id(const std::string& id) const {
    for (const auto& it : items)
        if (it.id == id) return it;
    throw ConfigError("dataset: unknown item id " + id);
}

namespace {

DatasetSplit default_split(const std::vector<std::string>& ids) {
    DatasetSplit split;
    size_t n = ids.size();
    size_t n_val = std::max<size_t>(1, n / 10);
    size_t n_test = std::max<size_t>(1, n / 10);
    if (n_val + n_test >= n) {  // tiny dataset: keep at least one training item
        n_val = n > 1 ? 1 : 0;
        n_test = n > 2 ? 1 : 0;
    }
    size_t n_train = n - n_val - n_test;
    for (size_t i = 0; i < n; ++i) {
        if (i < n_train)
            split.train.push_back(ids[i]);
        else if (i < n_train + n_val)
            split.val.push_back(ids[i]);
        else
            split.test.push_back(ids[i]);
    }
    return split;
}

DatasetSplit parse_index(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    DatasetSplit split;
    std::vector<std::string>* section = nullptr;
    std::string line;
    while (std::getline(in, line)) {
        auto start = line.find_first_not_of(" \t\r");
        if (start == std::string::npos) continue;
        auto stop = line.find_last_not_of(" \t\r");
        std::string tok = line.substr(start, stop - start + 1);
        if (tok == "[train]")
            section = &split.train;
        else if (tok == "[val]" || tok == "[validation]")
            section = &split.val;
        else if (tok == "[test]")
            section = &split.test;
        else if (tok[0] == '#')
            continue;
        else if (section)
            section->push_back(tok);
        else
            throw IoError(path + ": item '" + tok + "' appears before any split section");
    }
    return split;
}

}  // namespace

Dataset load_dataset(const std::string& dir, const RunConfig& cfg) {
    if (!fs::is_directory(dir)) throw IoError("dataset directory not found: " + dir);
    std::vector<std::string> ids;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (!entry.is_directory()) continue;
        if (fs::exists(entry.path() / "mono.wav")) ids.push_back(entry.path().filename().string());
    }
    std::sort(ids.begin(), ids.end());
    if (ids.empty()) throw IoError("dataset directory has no items: " + dir);

    Dataset ds;
    for (const auto& id : ids) {
        fs::path base = fs::path(dir) / id;
        DatasetItem item;
        item.id = id;
        item.mono = load_wav((base / "mono.wav").string(), cfg.fs);
        item.binaural = load_wav((base / "binaural.wav").string(), cfg.fs);
        item.track = parse_pose_file((base / "pose.txt").string(), cfg.quat_order, cfg.pose_rate);
        item.validate();
        ds.items.push_back(std::move(item));
    }

    fs::path index = fs::path(dir) / "index.txt";
    if (fs::exists(index)) {
        ds.split = parse_index(index.string());
        ds.split_from_index = true;
        for (const auto& section : {ds.split.train, ds.split.val, ds.split.test})
            for (const auto& id : section) ds.item_by_id(id);  // referenced items must exist
    } else {
        ds.split = default_split(ids);
    }
    return ds;
}

std::vector<TrainingChunk> make_chunks(const DatasetItem& item, int64_t chunk_len,
                                       int64_t hop_between, const RunConfig& cfg) {
    if (chunk_len <= 0) throw ConfigError("make_chunks: chunk_len must be positive");
    if (hop_between <= 0) hop_between = chunk_len;
    std::vector<TrainingChunk> chunks;
    const int64_t len = item.mono.length();
    const double fs = static_cast<double>(cfg.fs);
    for (int64_t start = 0; start + chunk_len <= len; start += hop_between) {
        TrainingChunk c;
        c.item_id = item.id;
        c.start_sample = start;
        const auto& m = item.mono.channels[0];
        c.mono.assign(m.begin() + start, m.begin() + start + chunk_len);
        const auto& l = item.binaural.channels[0];
        const auto& r = item.binaural.channels[1];
        c.binaural_l.assign(l.begin() + start, l.begin() + start + chunk_len);
        c.binaural_r.assign(r.begin() + start, r.begin() + start + chunk_len);
        c.knots = track_window(item.track, static_cast<double>(start) / fs,
                               static_cast<double>(chunk_len) / fs);
        chunks.push_back(std::move(c));
    }
    return chunks;
}

// ---------------------------------------------------------------------------
// Synthetic oracle dataset
// ---------------------------------------------------------------------------

AudioF oracle_binaural(const AudioF& mono, const PoseTrack& track, const RunConfig& cfg,
                       const SynthSpec& spec) {
    mono.validate();
    const int64_t len = mono.length();

    AudioF warped(mono.sample_rate, 2, len);
    if (spec.ear_offset > 0.0) {
        WarpConfig wcfg = cfg.warp;
        wcfg.ear_offset = spec.ear_offset;
        wcfg.neural_enabled = false;
        auto field = geometric_warp(track, len, wcfg);
        warped = apply_warp(mono, field);
    } else {
        warped.channels[0] = mono.channels[0];
        warped.channels[1] = mono.channels[0];
    }

    auto spec_init = stft(warped, cfg.stft);
    for (int64_t f = 0; f < spec_init.frames; ++f) {
        double t = static_cast<double>(f * cfg.stft.hop) / cfg.fs;
        Pose pose = track_sample(track, t);
        double azimuth = std::atan2(pose.position[1], pose.position[0]);
        double g_left = 1.0 + spec.gain_strength * std::sin(azimuth);
        double g_right = 1.0 - spec.gain_strength * std::sin(azimuth);
        for (int64_t b = 0; b < spec_init.bins; ++b) {
            spec_init.at(0, f, b) *= static_cast<float>(g_left);
            spec_init.at(1, f, b) *= static_cast<float>(g_right);
        }
    }
    return istft(spec_init, len, mono.sample_rate);
}

namespace {

AudioF synth_mono(Rng& rng, int fs, int64_t len) {
    AudioF audio(fs, 1, len);
    auto& x = audio.channels[0];
    // filtered noise bed
    double lp = 0.0;
    double a = 0.92 + 0.05 * rng.uniform();
    double noise_amp = 0.15 + 0.15 * rng.uniform();
    for (int64_t i = 0; i < len; ++i) {
        lp = a * lp + (1.0 - a) * rng.uniform(-1.0, 1.0);
        x[static_cast<size_t>(i)] = static_cast<float>(noise_amp * lp * 6.0);
    }
    // tone mixture
    int tones = 3 + static_cast<int>(rng.below(3));
    for (int t = 0; t < tones; ++t) {
        double freq = rng.uniform(200.0, 4000.0);
        double amp = rng.uniform(0.05, 0.25);
        double phase = rng.uniform(0.0, 2.0 * kPi);
        double w = 2.0 * kPi * freq / fs;
        for (int64_t i = 0; i < len; ++i)
            x[static_cast<size_t>(i)] += static_cast<float>(amp * std::sin(w * i + phase));
    }
    float peak = 0.0f;
    for (float v : x) peak = std::max(peak, std::abs(v));
    if (peak > 0.0f)
        for (auto& v : x) v *= 0.6f / peak;
    return audio;
}

PoseTrack synth_track(Rng& rng, int item_index, double duration, double rate) {
    PoseTrack track;
    track.rate = rate;
    int64_t knots = static_cast<int64_t>(std::ceil(duration * rate)) + 2;
    bool circular = item_index % 2 == 0;
    double radius = rng.uniform(1.2, 2.0);
    if (circular) {
        double theta0 = rng.uniform(-kPi / 2, kPi / 2);
        double omega = rng.uniform(0.6, 1.4) * (rng.below(2) == 0 ? 1.0 : -1.0);
        for (int64_t k = 0; k < knots; ++k) {
            double t = static_cast<double>(k) / rate;
            double th = theta0 + omega * t;
            track.poses.push_back(Pose::make(
                {radius * std::cos(th), radius * std::sin(th), 0.0}, {0, 0, 0, 1}));
        }
    } else {
        // lateral sweep at fixed distance in front
        double x0 = rng.uniform(1.0, 1.8);
        double span = rng.uniform(1.0, 1.8);
        double phase = rng.uniform(0.0, 2.0 * kPi);
        double omega = rng.uniform(1.0, 2.2);
        for (int64_t k = 0; k < knots; ++k) {
            double t = static_cast<double>(k) / rate;
            double y = span * std::sin(omega * t + phase);
            track.poses.push_back(Pose::make({x0, y, 0.0}, {0, 0, 0, 1}));
        }
    }
    return track;
}

}  // namespace

void synth_dataset(const std::string& out_dir, const SynthSpec& spec, const RunConfig& cfg) {
    fs::create_directories(out_dir);
    Rng rng(spec.seed);
    int64_t len = static_cast<int64_t>(spec.duration_s * cfg.fs);
    for (int i = 0; i < spec.n_items; ++i) {
        Rng item_rng = rng.fork(static_cast<uint64_t>(i) + 1);
        char name[32];
        std::snprintf(name, sizeof(name), "item_%03d", i);
        fs::path base = fs::path(out_dir) / name;
        fs::create_directories(base);

        AudioF mono = synth_mono(item_rng, cfg.fs, len);
        PoseTrack track = synth_track(item_rng, i, spec.duration_s, cfg.pose_rate);
        AudioF binaural = oracle_binaural(mono, track, cfg, spec);

        save_wav((base / "mono.wav").string(), mono);
        save_wav((base / "binaural.wav").string(), binaural);
        save_pose_file((base / "pose.txt").string(), track, cfg.quat_order);
    }
    nlohmann::json oracle{{"seed", spec.seed},
                          {"n_items", spec.n_items},
                          {"duration_s", spec.duration_s},
                          {"gain_strength", spec.gain_strength},
                          {"ear_offset", spec.ear_offset},
                          {"gain_rule", "g_ear = 1 -+ strength*sin(azimuth), left +, right -"},
                          {"delay_rule", "geometric per-ear propagation delay"}};
    std::ofstream out(fs::path(out_dir) / "oracle.json");
    out << oracle.dump(2) << '\n';
}

// ---------------------------------------------------------------------------
// Checkpoints
// ---------------------------------------------------------------------------

namespace {

constexpr char kMagic[8] = {'L', 'I', 'N', 'N', 'C', 'K', 'P', '\0'};
constexpr uint32_t kVersion = 1;

uint64_t fnv1a64(const unsigned char* data, size_t n, uint64_t h = 0xcbf29ce484222325ULL) {
    for (size_t i = 0; i < n; ++i) {
        h ^= data[i];
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace

void write_checkpoint(const std::string& path, const nlohmann::json& config,
                      const std::vector<ParamRef<float>>& params) {
    std::ostringstream body;
    body.write(kMagic, 8);
    write_le<uint32_t>(body, kVersion);
    std::string cfg_str = config.dump();
    write_le<uint64_t>(body, cfg_str.size());
    body.write(cfg_str.data(), static_cast<std::streamsize>(cfg_str.size()));
    write_le<uint64_t>(body, params.size());
    for (const auto& ref : params) {
        write_le<uint64_t>(body, ref.name.size());
        body.write(ref.name.data(), static_cast<std::streamsize>(ref.name.size()));
        const auto& t = ref.param->value;
        write_le<uint64_t>(body, t.shape.size());
        for (int64_t e : t.shape) write_le<uint64_t>(body, static_cast<uint64_t>(e));
        for (float v : t.data) write_le<float>(body, v);
    }
    std::string blob = body.str();
    uint64_t checksum = fnv1a64(reinterpret_cast<const unsigned char*>(blob.data()), blob.size());

    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    out.write(blob.data(), static_cast<std::streamsize>(blob.size()));
    write_le<uint64_t>(out, checksum);
    if (!out) throw IoError("failed writing " + path);
}

CheckpointData read_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    std::string all = ss.str();
    if (all.size() < 8 + 4 + 8) throw IoError(path + ": truncated checkpoint");

    std::string blob = all.substr(0, all.size() - 8);
    uint64_t stored;
    std::memcpy(&stored, all.data() + all.size() - 8, 8);
    uint64_t computed = fnv1a64(reinterpret_cast<const unsigned char*>(blob.data()), blob.size());
    if (stored != computed) throw IoError(path + ": checksum mismatch, file corrupt");

    std::istringstream body(blob);
    char magic[8];
    body.read(magic, 8);
    if (!body || std::memcmp(magic, kMagic, 8) != 0) throw IoError(path + ": not a checkpoint file");
    uint32_t version = read_le<uint32_t>(body, "version");
    if (version != kVersion)
        throw IoError(path + ": unknown checkpoint version " + std::to_string(version));

    CheckpointData data;
    uint64_t cfg_len = read_le<uint64_t>(body, "config length");
    std::string cfg_str(cfg_len, '\0');
    body.read(cfg_str.data(), static_cast<std::streamsize>(cfg_len));
    if (!body) throw IoError(path + ": truncated config record");
    data.config = nlohmann::json::parse(cfg_str);

    uint64_t count = read_le<uint64_t>(body, "param count");
    for (uint64_t i = 0; i < count; ++i) {
        uint64_t name_len = read_le<uint64_t>(body, "param name length");
        std::string name(name_len, '\0');
        body.read(name.data(), static_cast<std::streamsize>(name_len));
        uint64_t ndim = read_le<uint64_t>(body, "param rank");
        std::vector<int64_t> shape;
        for (uint64_t d = 0; d < ndim; ++d)
            shape.push_back(static_cast<int64_t>(read_le<uint64_t>(body, "param extent")));
        TensorF t(shape);
        for (auto& v : t.data) v = read_le<float>(body, "param data");
        data.params.emplace_back(std::move(name), std::move(t));
    }
    return data;
}

void save_checkpoint(const std::string& path, LinnModel<float>& model) {
    auto params = model.params();
    write_checkpoint(path, to_json(model.config()), params);
}

LinnModel<float> model_from_checkpoint(const CheckpointData& data, const RunConfig& cfg) {
    LinnModel<float> model(cfg, 0);
    auto params = model.params();
    if (params.size() != data.params.size())
        throw ConfigError("checkpoint: parameter list does not match architecture (" +
                          std::to_string(data.params.size()) + " stored, " +
                          std::to_string(params.size()) + " expected)");
    for (size_t i = 0; i < params.size(); ++i) {
        if (params[i].name != data.params[i].first)
            throw ConfigError("checkpoint: parameter order mismatch at " + params[i].name);
        if (params[i].param->value.shape != data.params[i].second.shape)
            throw ConfigError("checkpoint: shape mismatch at " + params[i].name);
        params[i].param->value = data.params[i].second;
    }
    return model;
}

LinnModel<float> load_checkpoint(const std::string& path) {
    CheckpointData data = read_checkpoint(path);
    RunConfig cfg = config_from_json(data.config);
    return model_from_checkpoint(data, cfg);
}

}  // namespace linn
