#pragma once

#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "thermonu/frameio.hpp"
#include "thermonu/parallel.hpp"
#include "thermonu/rng.hpp"
#include "thermonu/simulate.hpp"
#include "thermonu/types.hpp"

namespace thermonu {

/// Normalization bounds shared by a whole dataset.
struct NormBounds {
    double i_min = 0.0;
    double i_max = kGrayLevelMax;
    double t_min = kDefaultTempMin;
    double t_max = kDefaultTempMax;
};

inline void validate_bounds(const NormBounds& b) {
    if (!(b.i_min < b.i_max) || !(b.t_min < b.t_max))
        throw DomainError("normalization bounds must be strictly ordered");
}

/// (x - I_min) / (I_max - I_min). Values outside [0, 1] are preserved.
inline Grid normalize_gl(const Grid& frame, const NormBounds& b) {
    validate_bounds(b);
    return (frame - b.i_min) / (b.i_max - b.i_min);
}

inline Grid denormalize_gl(const Grid& frame, const NormBounds& b) {
    validate_bounds(b);
    return frame * (b.i_max - b.i_min) + b.i_min;
}

inline Grid normalize_temp(const Grid& map, const NormBounds& b) {
    validate_bounds(b);
    return (map - b.t_min) / (b.t_max - b.t_min);
}

inline Grid denormalize_temp(const Grid& map, const NormBounds& b) {
    validate_bounds(b);
    return map * (b.t_max - b.t_min) + b.t_min;
}

enum class DatasetMode { Train, Val };

/// Augmentation policy. Train mode draws the crop offset, flips and the
/// number of quarter turns from the sample's stream; val mode always takes
/// the exact center crop with no flips or rotations.
struct AugmentSpec {
    Eigen::Index crop_h = 256;
    Eigen::Index crop_w = 256;
    bool allow_flips = true;
    bool allow_rot90 = true;
    DatasetMode mode = DatasetMode::Train;
};

struct AugmentRecord {
    Eigen::Index crop_row = 0;
    Eigen::Index crop_col = 0;
    bool flip_h = false;  // mirror columns
    bool flip_v = false;  // mirror rows
    int rot90 = 0;        // quarter turns, counter-clockwise
};

namespace detail {

inline Grid rotate90_ccw(const Grid& g, int turns) {
    Grid out = g;
    for (int t = 0; t < (turns % 4 + 4) % 4; ++t) {
        Grid next(out.cols(), out.rows());
        for (Eigen::Index i = 0; i < next.rows(); ++i)
            for (Eigen::Index c = 0; c < next.cols(); ++c) next(i, c) = out(c, out.cols() - 1 - i);
        out = std::move(next);
    }
    return out;
}

inline Grid apply_augment(const Grid& src, const AugmentSpec& spec, const AugmentRecord& rec) {
    Grid out = src.block(rec.crop_row, rec.crop_col, spec.crop_h, spec.crop_w);
    if (rec.flip_h) out = out.rowwise().reverse().eval();
    if (rec.flip_v) out = out.colwise().reverse().eval();
    if (rec.rot90 != 0) out = rotate90_ccw(out, rec.rot90);
    return out;
}

}  // namespace detail

struct AugmentResult {
    TemperatureMap map;
    AugmentRecord record;
};

/// Crops and optionally flips/rotates a temperature map. Deterministic for a
/// given (spec, seed); val mode ignores the seed entirely.
inline AugmentResult augment(const TemperatureMap& map, const AugmentSpec& spec,
                             std::uint64_t seed) {
    const Eigen::Index h = map.height();
    const Eigen::Index w = map.width();
    if (spec.crop_h > h || spec.crop_w > w)
        throw GeometryError("augment: crop " + std::to_string(spec.crop_h) + "x" +
                            std::to_string(spec.crop_w) + " exceeds frame " + std::to_string(h) +
                            "x" + std::to_string(w));
    AugmentRecord rec;
    if (spec.mode == DatasetMode::Val) {
        rec.crop_row = (h - spec.crop_h) / 2;
        rec.crop_col = (w - spec.crop_w) / 2;
    } else {
        CounterRng rng(derive_stream(seed, stream::kAugment));
        rec.crop_row = static_cast<Eigen::Index>(rng.next_u64() % (h - spec.crop_h + 1));
        rec.crop_col = static_cast<Eigen::Index>(rng.next_u64() % (w - spec.crop_w + 1));
        if (spec.allow_flips) {
            rec.flip_h = rng.next_unit() < 0.5;
            rec.flip_v = rng.next_unit() < 0.5;
        }
        if (spec.allow_rot90) {
            // Odd quarter turns would swap the crop's sides.
            rec.rot90 = spec.crop_h == spec.crop_w ? static_cast<int>(rng.next_u64() % 4)
                                                   : static_cast<int>(rng.next_u64() % 2) * 2;
        }
    }
    return {TemperatureMap{detail::apply_augment(map.values, spec, rec)}, rec};
}

/// One generated pair plus everything needed to regenerate it.
struct SampleRecord {
    std::string input_path;   // relative to the manifest directory
    std::string target_path;  // relative to the manifest directory
    double t_amb = 0.0;
    std::uint64_t seed = 0;
    AugmentRecord aug;
};

struct DatasetManifest {
    std::string split;  // "train" | "val"
    NormBounds bounds;
    std::uint64_t seed = 0;
    std::vector<SampleRecord> samples;
};

/// Manifest file: JSON lines. The first line carries the dataset-level
/// fields (split, bounds, seed, count); each following line is one sample.
inline void write_manifest(const DatasetManifest& m, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("write_manifest: cannot open '" + path + "'");
    nlohmann::json meta;
    meta["split"] = m.split;
    meta["gl_bounds"] = {m.bounds.i_min, m.bounds.i_max};
    meta["temp_bounds"] = {m.bounds.t_min, m.bounds.t_max};
    meta["seed"] = m.seed;
    meta["count"] = m.samples.size();
    out << meta.dump() << '\n';
    for (const auto& s : m.samples) {
        nlohmann::json j;
        j["input"] = s.input_path;
        j["target"] = s.target_path;
        j["t_amb"] = s.t_amb;
        j["seed"] = s.seed;
        j["aug"] = {{"crop_row", s.aug.crop_row}, {"crop_col", s.aug.crop_col},
                    {"flip_h", s.aug.flip_h},     {"flip_v", s.aug.flip_v},
                    {"rot90", s.aug.rot90}};
        out << j.dump() << '\n';
    }
    if (!out) throw IoError("write_manifest: write failed for '" + path + "'");
}

inline DatasetManifest read_manifest(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("read_manifest: cannot open '" + path + "'");
    std::string line;
    if (!std::getline(in, line)) throw ParseError("read_manifest: '" + path + "' is empty");
    DatasetManifest m;
    try {
        const auto meta = nlohmann::json::parse(line);
        m.split = meta.at("split").get<std::string>();
        m.bounds.i_min = meta.at("gl_bounds")[0].get<double>();
        m.bounds.i_max = meta.at("gl_bounds")[1].get<double>();
        m.bounds.t_min = meta.at("temp_bounds")[0].get<double>();
        m.bounds.t_max = meta.at("temp_bounds")[1].get<double>();
        m.seed = meta.at("seed").get<std::uint64_t>();
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            const auto j = nlohmann::json::parse(line);
            SampleRecord s;
            s.input_path = j.at("input").get<std::string>();
            s.target_path = j.at("target").get<std::string>();
            s.t_amb = j.at("t_amb").get<double>();
            s.seed = j.at("seed").get<std::uint64_t>();
            const auto& a = j.at("aug");
            s.aug.crop_row = a.at("crop_row").get<Eigen::Index>();
            s.aug.crop_col = a.at("crop_col").get<Eigen::Index>();
            s.aug.flip_h = a.at("flip_h").get<bool>();
            s.aug.flip_v = a.at("flip_v").get<bool>();
            s.aug.rot90 = a.at("rot90").get<int>();
            m.samples.push_back(std::move(s));
        }
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("read_manifest: '" + path + "' is malformed: " + e.what());
    }
    return m;
}

/// Generates count supervised pairs under out_dir and returns the manifest
/// (also written to out_dir/manifest.jsonl). Sample i draws from source map
/// i mod n. Pipeline per sample: augment, simulate at a t_amb drawn
/// uniformly from the model's validity range, normalize, then degrade the
/// normalized response; the target is the normalized augmented map.
///
/// Train mode derives one stream per sample index; val mode derives streams
/// from the source-frame index, so noise, FPN, crop and t_amb are generated
/// once per source frame and reruns are byte-identical.
///
/// The model's radial coefficients are geometry free, so the model is
/// rebound to the crop geometry when they differ.
inline DatasetManifest generate_dataset(const CameraModel& model,
                                        const std::vector<TemperatureMap>& maps,
                                        const AugmentSpec& spec, const NoiseSpec& noise,
                                        const NormBounds& bounds, const std::string& out_dir,
                                        std::int64_t count, std::uint64_t seed) {
    validate_bounds(bounds);
    validate_noise_spec(noise);
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);

    DatasetManifest manifest;
    manifest.split = spec.mode == DatasetMode::Val ? "val" : "train";
    manifest.bounds = bounds;
    manifest.seed = seed;

    if (maps.empty() || count <= 0) {
        write_manifest(manifest, (fs::path(out_dir) / "manifest.jsonl").string());
        return manifest;
    }

    const CameraModel sim_model = (model.height == spec.crop_h && model.width == spec.crop_w)
                                      ? model
                                      : model.with_geometry(spec.crop_h, spec.crop_w);
    const double gl_span = bounds.i_max - bounds.i_min;

    manifest.samples.resize(count);
    parallel_for(count, [&](std::int64_t i) {
        const std::size_t src = static_cast<std::size_t>(i) % maps.size();
        const std::uint64_t key = spec.mode == DatasetMode::Val ? src : static_cast<std::uint64_t>(i);
        const std::uint64_t sample_seed = derive_stream(seed, key);

        const AugmentResult aug = augment(maps[src], spec, sample_seed);
        CounterRng amb_rng(derive_stream(sample_seed, stream::kAmbient));
        const double t_amb = amb_rng.next_uniform(sim_model.t_amb_lo, sim_model.t_amb_hi);

        const GrayFrame response = simulate_frame(sim_model, aug.map, t_amb);
        NoiseSpec sample_noise = noise;
        sample_noise.seed = sample_seed;
        const Grid input = degrade(normalize_gl(response.values, bounds), sample_noise, gl_span);
        const Grid target = normalize_temp(aug.map.values, bounds);

        char name[32];
        std::snprintf(name, sizeof(name), "%06lld", static_cast<long long>(i));
        SampleRecord rec;
        rec.input_path = std::string("input_") + name + ".tframe";
        rec.target_path = std::string("target_") + name + ".tframe";
        rec.t_amb = t_amb;
        rec.seed = sample_seed;
        rec.aug = aug.record;

        FrameHeader in_header;
        in_header.dtype = FrameDtype::F32;
        in_header.kind = FrameKind::GrayLevel;
        in_header.height = spec.crop_h;
        in_header.width = spec.crop_w;
        in_header.t_amb = t_amb;
        in_header.seed = sample_seed;
        write_frame(in_header, input, (fs::path(out_dir) / rec.input_path).string());

        FrameHeader tgt_header;
        tgt_header.dtype = FrameDtype::F32;
        tgt_header.kind = FrameKind::Temperature;
        tgt_header.height = spec.crop_h;
        tgt_header.width = spec.crop_w;
        write_frame(tgt_header, target, (fs::path(out_dir) / rec.target_path).string());

        manifest.samples[i] = std::move(rec);
    });

    write_manifest(manifest, (fs::path(out_dir) / "manifest.jsonl").string());
    return manifest;
}

}  // namespace thermonu
