#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "thermonu/types.hpp"

namespace thermonu {

/// Frame container format (".tframe"): one JSON header line, a newline,
/// then the row-major little-endian payload (f32 or u16).
///
/// Header keys: magic "tframe1", dtype "f32"|"u16", height, width,
/// kind "temperature"|"graylevel", and optional t_amb, t_obj, seed tags.
/// u16 payloads are 14-bit gray levels; dtype "u16" is only valid with
/// kind "graylevel".
inline constexpr const char* kFrameMagic = "tframe1";

enum class FrameDtype { F32, U16 };
enum class FrameKind { Temperature, GrayLevel };

struct FrameHeader {
    FrameDtype dtype = FrameDtype::F32;
    Eigen::Index height = 0;
    Eigen::Index width = 0;
    FrameKind kind = FrameKind::GrayLevel;
    std::optional<double> t_amb;
    std::optional<double> t_obj;
    std::optional<std::uint64_t> seed;
};

struct FrameData {
    FrameHeader header;
    Grid values;
};

namespace detail {

inline const char* dtype_name(FrameDtype d) { return d == FrameDtype::F32 ? "f32" : "u16"; }
inline const char* kind_name(FrameKind k) {
    return k == FrameKind::Temperature ? "temperature" : "graylevel";
}

inline void append_u16_le(std::string& buf, std::uint16_t v) {
    buf.push_back(static_cast<char>(v & 0xFF));
    buf.push_back(static_cast<char>((v >> 8) & 0xFF));
}

inline void append_f32_le(std::string& buf, float v) {
    const auto bits = std::bit_cast<std::uint32_t>(v);
    for (int s = 0; s < 32; s += 8) buf.push_back(static_cast<char>((bits >> s) & 0xFF));
}

inline std::uint16_t read_u16_le(const unsigned char* p) {
    return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

inline float read_f32_le(const unsigned char* p) {
    const std::uint32_t bits = static_cast<std::uint32_t>(p[0]) |
                               (static_cast<std::uint32_t>(p[1]) << 8) |
                               (static_cast<std::uint32_t>(p[2]) << 16) |
                               (static_cast<std::uint32_t>(p[3]) << 24);
    return std::bit_cast<float>(bits);
}

inline void validate_header(const FrameHeader& h) {
    if (h.height < 2 || h.width < 2)
        throw GeometryError("frame header: dimensions must be >= 2, got " +
                            std::to_string(h.height) + "x" + std::to_string(h.width));
    if (h.dtype == FrameDtype::U16 && h.kind != FrameKind::GrayLevel)
        throw DomainError("frame header: dtype u16 is only valid for graylevel frames");
}

}  // namespace detail

/// Writes a frame. The payload must match the header geometry; u16 payloads
/// must be integer gray levels in [0, 16383].
inline void write_frame(const FrameHeader& header, const Grid& payload, const std::string& path) {
    detail::validate_header(header);
    if (payload.rows() != header.height || payload.cols() != header.width)
        throw GeometryError("write_frame: payload is " + std::to_string(payload.rows()) + "x" +
                            std::to_string(payload.cols()) + " but header says " +
                            std::to_string(header.height) + "x" + std::to_string(header.width));

    nlohmann::json j;
    j["magic"] = kFrameMagic;
    j["dtype"] = detail::dtype_name(header.dtype);
    j["height"] = header.height;
    j["width"] = header.width;
    j["kind"] = detail::kind_name(header.kind);
    if (header.t_amb) j["t_amb"] = *header.t_amb;
    if (header.t_obj) j["t_obj"] = *header.t_obj;
    if (header.seed) j["seed"] = *header.seed;

    std::string body;
    body.reserve(payload.size() * (header.dtype == FrameDtype::F32 ? 4 : 2));
    for (Eigen::Index i = 0; i < payload.rows(); ++i) {
        for (Eigen::Index c = 0; c < payload.cols(); ++c) {
            const double v = payload(i, c);
            if (!std::isfinite(v))
                throw DomainError("write_frame: non-finite value at pixel (" + std::to_string(i) +
                                  "," + std::to_string(c) + ")");
            if (header.dtype == FrameDtype::U16) {
                if (v < 0.0 || v > kGrayLevelMax || v != std::floor(v))
                    throw DomainError("write_frame: value " + std::to_string(v) + " at pixel (" +
                                      std::to_string(i) + "," + std::to_string(c) +
                                      ") is outside the 14-bit u16 payload range [0, 16383]");
                detail::append_u16_le(body, static_cast<std::uint16_t>(v));
            } else {
                detail::append_f32_le(body, static_cast<float>(v));
            }
        }
    }

    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("write_frame: cannot open '" + path + "' for writing");
    out << j.dump() << '\n';
    out.write(body.data(), static_cast<std::streamsize>(body.size()));
    if (!out) throw IoError("write_frame: write failed for '" + path + "'");
}

inline void write_frame(FrameHeader header, const TemperatureMap& map, const std::string& path) {
    header.kind = FrameKind::Temperature;
    header.dtype = FrameDtype::F32;
    header.height = map.height();
    header.width = map.width();
    write_frame(header, map.values, path);
}

inline void write_frame(FrameHeader header, const GrayFrame& frame, const std::string& path) {
    header.kind = FrameKind::GrayLevel;
    header.dtype = frame.quantized ? FrameDtype::U16 : FrameDtype::F32;
    header.height = frame.height();
    header.width = frame.width();
    write_frame(header, frame.values, path);
}

inline FrameData read_frame(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("read_frame: cannot open '" + path + "'");
    std::string header_line;
    if (!std::getline(in, header_line))
        throw ParseError("read_frame: '" + path + "' is missing the header line");

    nlohmann::json j;
    try {
        j = nlohmann::json::parse(header_line);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("read_frame: '" + path + "' header is not valid JSON: " + e.what());
    }
    if (!j.contains("magic") || j["magic"] != kFrameMagic)
        throw ParseError("read_frame: '" + path + "' has bad magic, expected '" + kFrameMagic +
                         "'");

    FrameHeader h;
    const std::string dtype = j.value("dtype", "");
    if (dtype == "f32")
        h.dtype = FrameDtype::F32;
    else if (dtype == "u16")
        h.dtype = FrameDtype::U16;
    else
        throw ParseError("read_frame: '" + path + "' has unknown dtype '" + dtype + "'");
    const std::string kind = j.value("kind", "");
    if (kind == "temperature")
        h.kind = FrameKind::Temperature;
    else if (kind == "graylevel")
        h.kind = FrameKind::GrayLevel;
    else
        throw ParseError("read_frame: '" + path + "' has unknown kind '" + kind + "'");
    if (!j.contains("height") || !j.contains("width"))
        throw ParseError("read_frame: '" + path + "' header lacks height/width");
    h.height = j["height"].get<Eigen::Index>();
    h.width = j["width"].get<Eigen::Index>();
    if (j.contains("t_amb")) h.t_amb = j["t_amb"].get<double>();
    if (j.contains("t_obj")) h.t_obj = j["t_obj"].get<double>();
    if (j.contains("seed")) h.seed = j["seed"].get<std::uint64_t>();
    detail::validate_header(h);

    const std::size_t value_bytes = h.dtype == FrameDtype::F32 ? 4 : 2;
    const std::size_t expected =
        static_cast<std::size_t>(h.height) * static_cast<std::size_t>(h.width) * value_bytes;
    std::string body(expected, '\0');
    in.read(body.data(), static_cast<std::streamsize>(expected));
    if (static_cast<std::size_t>(in.gcount()) != expected)
        throw ParseError("read_frame: '" + path + "' payload truncated, expected " +
                         std::to_string(expected) + " bytes, got " + std::to_string(in.gcount()));
    if (in.peek() != std::ifstream::traits_type::eof())
        throw ParseError("read_frame: '" + path + "' has trailing bytes after the payload");

    FrameData out;
    out.header = h;
    out.values.resize(h.height, h.width);
    const auto* p = reinterpret_cast<const unsigned char*>(body.data());
    for (Eigen::Index i = 0; i < h.height; ++i) {
        for (Eigen::Index c = 0; c < h.width; ++c) {
            double v;
            if (h.dtype == FrameDtype::U16) {
                const std::uint16_t raw = detail::read_u16_le(p);
                if (raw > kGrayLevelMax)
                    throw ParseError("read_frame: '" + path + "' u16 value " +
                                     std::to_string(raw) + " at pixel (" + std::to_string(i) +
                                     "," + std::to_string(c) + ") exceeds the 14-bit range");
                v = raw;
                p += 2;
            } else {
                v = detail::read_f32_le(p);
                p += 4;
            }
            if (!std::isfinite(v))
                throw ParseError("read_frame: '" + path + "' has a non-finite value at pixel (" +
                                 std::to_string(i) + "," + std::to_string(c) + ")");
            out.values(i, c) = v;
        }
    }
    return out;
}

/// Scans a directory of ".tframe" gray-level files tagged with (t_amb,
/// t_obj), groups them by operating point, and reduces each group to a
/// per-pixel mean and sample variance (divisor N-1; zero when N = 1).
/// Returns points sorted by (t_amb, t_obj).
inline std::vector<OperatingPoint> ingest_campaign(const std::string& dir) {
    namespace fs = std::filesystem;
    if (!fs::is_directory(dir)) throw IoError("ingest_campaign: '" + dir + "' is not a directory");

    std::vector<std::string> files;
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.is_regular_file() && entry.path().extension() == ".tframe")
            files.push_back(entry.path().string());
    std::sort(files.begin(), files.end());
    if (files.empty()) throw IoError("ingest_campaign: no .tframe files in '" + dir + "'");

    std::map<std::pair<double, double>, std::vector<std::string>> groups;
    Eigen::Index height = -1, width = -1;
    for (const auto& file : files) {
        const FrameData frame = read_frame(file);  // header checked here; payload reread below
        if (frame.header.kind != FrameKind::GrayLevel)
            throw DomainError("ingest_campaign: '" + file + "' is not a gray-level frame");
        if (!frame.header.t_amb || !frame.header.t_obj)
            throw DomainError("ingest_campaign: '" + file + "' lacks t_amb/t_obj tags");
        if (height < 0) {
            height = frame.header.height;
            width = frame.header.width;
        } else if (frame.header.height != height || frame.header.width != width) {
            throw GeometryError("ingest_campaign: '" + file + "' is " +
                                std::to_string(frame.header.height) + "x" +
                                std::to_string(frame.header.width) + ", campaign is " +
                                std::to_string(height) + "x" + std::to_string(width));
        }
        groups[{*frame.header.t_amb, *frame.header.t_obj}].push_back(file);
    }

    std::vector<OperatingPoint> points;
    points.reserve(groups.size());
    for (const auto& [key, members] : groups) {
        const int n = static_cast<int>(members.size());
        Grid mean = Grid::Zero(height, width);
        std::vector<Grid> payloads;
        payloads.reserve(members.size());
        for (const auto& file : members) {
            payloads.push_back(read_frame(file).values);
            mean += payloads.back();
        }
        mean /= static_cast<double>(n);
        Grid var = Grid::Zero(height, width);
        if (n > 1) {
            for (const auto& payload : payloads) var += (payload - mean).square();
            var /= static_cast<double>(n - 1);
        }
        OperatingPoint op;
        op.t_amb = key.first;
        op.t_obj = key.second;
        op.mean_frame = GrayFrame{std::move(mean), false};
        op.var_frame = std::move(var);
        op.n_frames = n;
        points.push_back(std::move(op));
    }
    return points;
}

}  // namespace thermonu
