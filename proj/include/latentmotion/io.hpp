#pragma once

#include <bit>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <unistd.h>
#include <vector>

#include <json.hpp>

#include "latentmotion/analysis.hpp"
#include "latentmotion/errors.hpp"
#include "latentmotion/subspace.hpp"
#include "latentmotion/trajectory.hpp"

// Binary file formats. All formats share the header layout
//   magic (4 bytes) | version (u16) | flags (u16) | shape fields (u32 each)
// with every integer little-endian and every float IEEE-754. Payload offsets
// are fixed; optional JSON metadata lives in a length-prefixed trailer after
// the payload.
//
//   LTRJ  latent trajectory   shape: T, n_layers, dim      payload: f32
//   MSUB  motion subspace     shape: K, d_sub, layer_start, layer_count,
//                             dim, sample_count            payload: f64
//   LMRK  landmark track      shape: T, P, spatial_dims    payload: f32

namespace lm {

namespace detail {

inline constexpr std::uint16_t kFormatVersion = 1;
inline constexpr std::uint16_t kFlagTrailer = 1u << 0;
inline constexpr std::uint64_t kMaxElements = std::uint64_t(1) << 31;

class ByteReader {
  public:
    explicit ByteReader(std::vector<std::uint8_t> bytes) : bytes_(std::move(bytes)) {}

    std::size_t remaining() const { return bytes_.size() - pos_; }

    void need(std::size_t n, const char* what) const {
        require(remaining() >= n, errc::truncated_payload,
                std::string("file ends inside ") + what);
    }

    std::uint16_t u16(const char* what) {
        need(2, what);
        const std::uint16_t v = std::uint16_t(bytes_[pos_]) | std::uint16_t(bytes_[pos_ + 1]) << 8;
        pos_ += 2;
        return v;
    }

    std::uint32_t u32(const char* what) {
        need(4, what);
        std::uint32_t v = 0;
        for (int i = 3; i >= 0; --i) v = (v << 8) | bytes_[pos_ + i];
        pos_ += 4;
        return v;
    }

    std::uint64_t u64_raw(const char* what) {
        need(8, what);
        std::uint64_t v = 0;
        for (int i = 7; i >= 0; --i) v = (v << 8) | bytes_[pos_ + i];
        pos_ += 8;
        return v;
    }

    float f32(const char* what) { return std::bit_cast<float>(u32(what)); }
    double f64(const char* what) { return std::bit_cast<double>(u64_raw(what)); }

    std::string magic() {
        need(4, "magic");
        std::string m(reinterpret_cast<const char*>(bytes_.data() + pos_), 4);
        pos_ += 4;
        return m;
    }

    std::string blob(std::size_t n, const char* what) {
        need(n, what);
        std::string s(reinterpret_cast<const char*>(bytes_.data() + pos_), n);
        pos_ += n;
        return s;
    }

  private:
    std::vector<std::uint8_t> bytes_;
    std::size_t pos_ = 0;
};

inline std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    require(in.good(), errc::io_failure, "cannot open " + path.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    require(!in.bad(), errc::io_failure, "read failed for " + path.string());
    return bytes;
}

class ByteWriter {
  public:
    void u16(std::uint16_t v) {
        bytes_.push_back(std::uint8_t(v));
        bytes_.push_back(std::uint8_t(v >> 8));
    }
    void u32(std::uint32_t v) {
        for (int i = 0; i < 4; ++i) bytes_.push_back(std::uint8_t(v >> (8 * i)));
    }
    void u64_raw(std::uint64_t v) {
        for (int i = 0; i < 8; ++i) bytes_.push_back(std::uint8_t(v >> (8 * i)));
    }
    void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
    void f64(double v) { u64_raw(std::bit_cast<std::uint64_t>(v)); }
    void magic(const char m[4]) { bytes_.insert(bytes_.end(), m, m + 4); }
    void blob(const std::string& s) { bytes_.insert(bytes_.end(), s.begin(), s.end()); }

    // Write via a temp file and atomic rename so readers never see a
    // half-written file.
    void commit(const std::filesystem::path& path) const {
        namespace fs = std::filesystem;
        const fs::path tmp =
            path.parent_path() /
            (path.filename().string() + ".tmp" + std::to_string(::getpid()));
        {
            std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
            require(out.good(), errc::io_failure, "cannot open " + tmp.string());
            out.write(reinterpret_cast<const char*>(bytes_.data()),
                      static_cast<std::streamsize>(bytes_.size()));
            require(out.good(), errc::io_failure, "write failed for " + tmp.string());
        }
        std::error_code ec;
        fs::rename(tmp, path, ec);
        if (ec) {
            fs::remove(tmp);
            fail(errc::io_failure, "rename to " + path.string() + " failed: " + ec.message());
        }
    }

  private:
    std::vector<std::uint8_t> bytes_;
};

inline void check_magic(const std::string& got, const char* want, const std::string& path) {
    require(got == want, errc::bad_magic,
            "expected magic '" + std::string(want) + "' in " + path + ", got '" + got + "'");
}

inline void check_version(std::uint16_t v, const std::string& path) {
    require(v == kFormatVersion, errc::unsupported_version,
            "unsupported format version " + std::to_string(v) + " in " + path);
}

inline std::uint64_t checked_elements(std::initializer_list<std::uint64_t> dims,
                                      const std::string& path) {
    std::uint64_t total = 1;
    for (std::uint64_t d : dims) {
        if (d == 0) return 0;
        require(total <= kMaxElements / d, errc::truncated_payload,
                "declared shape exceeds element limit in " + path);
        total *= d;
    }
    return total;
}

inline nlohmann::json parse_trailer(ByteReader& r, const std::string& path) {
    const std::uint32_t len = r.u32("metadata trailer length");
    const std::string raw = r.blob(len, "metadata trailer");
    const nlohmann::json j = nlohmann::json::parse(raw, nullptr, false);
    require(!j.is_discarded(), errc::truncated_payload, "malformed metadata trailer in " + path);
    return j;
}

inline void expect_consumed(const ByteReader& r, const std::string& path) {
    require(r.remaining() == 0, errc::truncated_payload,
            std::to_string(r.remaining()) + " unexplained trailing bytes in " + path);
}

}  // namespace detail

// --- LTRJ ------------------------------------------------------------------

inline void save_trajectory(const std::filesystem::path& path, const LatentTrajectory& traj) {
    traj.validate();

    nlohmann::json meta;
    if (!traj.source_id.empty()) meta["source_id"] = traj.source_id;
    if (traj.frame_rate) meta["frame_rate"] = *traj.frame_rate;

    detail::ByteWriter w;
    w.magic("LTRJ");
    w.u16(detail::kFormatVersion);
    w.u16(meta.empty() ? 0 : detail::kFlagTrailer);
    w.u32(static_cast<std::uint32_t>(traj.frame_count()));
    w.u32(static_cast<std::uint32_t>(traj.layers()));
    w.u32(static_cast<std::uint32_t>(traj.dim()));
    for (const auto& frame : traj.frames)
        for (int l = 0; l < frame.rows(); ++l)
            for (int c = 0; c < frame.cols(); ++c) w.f32(static_cast<float>(frame(l, c)));
    if (!meta.empty()) {
        const std::string raw = meta.dump();
        w.u32(static_cast<std::uint32_t>(raw.size()));
        w.blob(raw);
    }
    w.commit(path);
}

inline LatentTrajectory load_trajectory(const std::filesystem::path& path) {
    detail::ByteReader r(detail::read_file(path));
    detail::check_magic(r.magic(), "LTRJ", path.string());
    detail::check_version(r.u16("version"), path.string());
    const std::uint16_t flags = r.u16("flags");
    const std::uint32_t t = r.u32("frame count");
    const std::uint32_t layers = r.u32("layer count");
    const std::uint32_t dim = r.u32("dim");
    require(t >= 1 && layers >= 1 && dim >= 1, errc::truncated_payload,
            "degenerate shape in " + path.string());
    detail::checked_elements({t, layers, dim}, path.string());
    r.need(std::size_t(t) * layers * dim * 4, "trajectory payload");

    LatentTrajectory traj;
    traj.frames.reserve(t);
    for (std::uint32_t i = 0; i < t; ++i) {
        Code frame(layers, dim);
        for (std::uint32_t l = 0; l < layers; ++l)
            for (std::uint32_t c = 0; c < dim; ++c)
                frame(l, c) = r.f32("trajectory payload");
        require(frame.allFinite(), errc::non_finite_payload,
                "NaN/Inf in trajectory payload of " + path.string());
        traj.frames.push_back(std::move(frame));
    }
    if (flags & detail::kFlagTrailer) {
        const nlohmann::json meta = detail::parse_trailer(r, path.string());
        if (meta.contains("source_id")) traj.source_id = meta["source_id"].get<std::string>();
        if (meta.contains("frame_rate")) traj.frame_rate = meta["frame_rate"].get<double>();
    }
    detail::expect_consumed(r, path.string());
    return traj;
}

// --- MSUB ------------------------------------------------------------------

inline void save_subspace(const std::filesystem::path& path, const MotionSubspace& s) {
    s.validate();

    nlohmann::json meta;
    meta["motion_label"] = s.motion_label;
    meta["centered"] = s.centered;
    meta["rank_deficient"] = s.rank_deficient;
    meta["warnings"] = s.warnings;

    detail::ByteWriter w;
    w.magic("MSUB");
    w.u16(detail::kFormatVersion);
    w.u16(detail::kFlagTrailer);
    w.u32(static_cast<std::uint32_t>(s.k()));
    w.u32(static_cast<std::uint32_t>(s.d_sub()));
    w.u32(static_cast<std::uint32_t>(s.layer_range.start));
    w.u32(static_cast<std::uint32_t>(s.layer_range.count));
    w.u32(static_cast<std::uint32_t>(s.dim));
    w.u32(static_cast<std::uint32_t>(s.sample_count));
    for (int i = 0; i < s.components.rows(); ++i)
        for (int j = 0; j < s.components.cols(); ++j) w.f64(s.components(i, j));
    for (int i = 0; i < s.singular_values.size(); ++i) w.f64(s.singular_values[i]);
    for (int i = 0; i < s.mean_vector.size(); ++i) w.f64(s.mean_vector[i]);
    w.f64(s.total_energy);
    const std::string raw = meta.dump();
    w.u32(static_cast<std::uint32_t>(raw.size()));
    w.blob(raw);
    w.commit(path);
}

inline MotionSubspace load_subspace(const std::filesystem::path& path) {
    detail::ByteReader r(detail::read_file(path));
    detail::check_magic(r.magic(), "MSUB", path.string());
    detail::check_version(r.u16("version"), path.string());
    const std::uint16_t flags = r.u16("flags");
    const std::uint32_t k = r.u32("component count");
    const std::uint32_t d = r.u32("d_sub");
    const std::uint32_t layer_start = r.u32("layer_start");
    const std::uint32_t layer_count = r.u32("layer_count");
    const std::uint32_t dim = r.u32("dim");
    const std::uint32_t samples = r.u32("sample_count");
    require(k >= 1 && d >= 1, errc::truncated_payload, "degenerate shape in " + path.string());
    detail::checked_elements({k, d}, path.string());
    r.need((std::size_t(k) * d + k + d + 1) * 8, "subspace payload");

    MotionSubspace s;
    s.components.resize(k, d);
    for (std::uint32_t i = 0; i < k; ++i)
        for (std::uint32_t j = 0; j < d; ++j) s.components(i, j) = r.f64("components");
    s.singular_values.resize(k);
    for (std::uint32_t i = 0; i < k; ++i) s.singular_values[i] = r.f64("singular values");
    s.mean_vector.resize(d);
    for (std::uint32_t i = 0; i < d; ++i) s.mean_vector[i] = r.f64("mean vector");
    s.total_energy = r.f64("total energy");
    s.layer_range = {static_cast<int>(layer_start), static_cast<int>(layer_count)};
    s.dim = static_cast<int>(dim);
    s.sample_count = samples;

    if (flags & detail::kFlagTrailer) {
        const nlohmann::json meta = detail::parse_trailer(r, path.string());
        if (meta.contains("motion_label")) s.motion_label = meta["motion_label"].get<std::string>();
        if (meta.contains("centered")) s.centered = meta["centered"].get<bool>();
        if (meta.contains("rank_deficient"))
            s.rank_deficient = meta["rank_deficient"].get<bool>();
        if (meta.contains("warnings"))
            s.warnings = meta["warnings"].get<std::vector<std::string>>();
    }
    detail::expect_consumed(r, path.string());

    require(s.components.allFinite() && s.singular_values.allFinite() && s.mean_vector.allFinite(),
            errc::non_finite_payload, "NaN/Inf in subspace payload of " + path.string());
    s.validate(1e-6);
    return s;
}

// --- LMRK ------------------------------------------------------------------

inline void save_landmarks(const std::filesystem::path& path, const LandmarkTrack& track) {
    track.validate();

    detail::ByteWriter w;
    w.magic("LMRK");
    w.u16(detail::kFormatVersion);
    w.u16(0);
    w.u32(static_cast<std::uint32_t>(track.frame_count()));
    w.u32(static_cast<std::uint32_t>(track.point_count()));
    w.u32(static_cast<std::uint32_t>(track.spatial_dims()));
    for (const auto& frame : track.frames)
        for (int p = 0; p < frame.rows(); ++p)
            for (int c = 0; c < frame.cols(); ++c) w.f32(static_cast<float>(frame(p, c)));
    w.commit(path);
}

inline LandmarkTrack load_landmarks(const std::filesystem::path& path) {
    detail::ByteReader r(detail::read_file(path));
    detail::check_magic(r.magic(), "LMRK", path.string());
    detail::check_version(r.u16("version"), path.string());
    r.u16("flags");
    const std::uint32_t t = r.u32("frame count");
    const std::uint32_t p = r.u32("point count");
    const std::uint32_t dims = r.u32("spatial dims");
    require(dims == 2 || dims == 3, errc::unsupported_version,
            "unsupported spatial dimensionality " + std::to_string(dims) + " in " + path.string());
    require(t >= 1 && p >= 1, errc::truncated_payload, "degenerate shape in " + path.string());
    detail::checked_elements({t, p, dims}, path.string());
    r.need(std::size_t(t) * p * dims * 4, "landmark payload");

    LandmarkTrack track;
    track.frames.reserve(t);
    for (std::uint32_t i = 0; i < t; ++i) {
        Eigen::MatrixXd frame(p, dims);
        for (std::uint32_t j = 0; j < p; ++j)
            for (std::uint32_t c = 0; c < dims; ++c) frame(j, c) = r.f32("landmark payload");
        require(frame.allFinite(), errc::non_finite_payload,
                "NaN/Inf in landmark payload of " + path.string());
        track.frames.push_back(std::move(frame));
    }
    detail::expect_consumed(r, path.string());
    return track;
}

// CSV interchange: header "frame,point,x,y[,z]", one row per landmark point.
inline void save_landmarks_csv(const std::filesystem::path& path, const LandmarkTrack& track) {
    track.validate();
    std::ostringstream out;
    out << (track.spatial_dims() == 3 ? "frame,point,x,y,z" : "frame,point,x,y") << "\n";
    char buf[64];
    for (int t = 0; t < track.frame_count(); ++t)
        for (int p = 0; p < track.point_count(); ++p) {
            out << t << ',' << p;
            for (int c = 0; c < track.spatial_dims(); ++c) {
                // float32 precision; 9 significant digits round-trip exactly
                std::snprintf(buf, sizeof buf, "%.9g",
                              static_cast<double>(static_cast<float>(track.frames[t](p, c))));
                out << ',' << buf;
            }
            out << "\n";
        }
    detail::ByteWriter w;
    w.blob(out.str());
    w.commit(path);
}

inline LandmarkTrack load_landmarks_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    require(in.good(), errc::io_failure, "cannot open " + path.string());

    std::string line;
    require(static_cast<bool>(std::getline(in, line)), errc::truncated_payload,
            "empty CSV file " + path.string());
    if (!line.empty() && line.back() == '\r') line.pop_back();
    int dims = 0;
    if (line == "frame,point,x,y")
        dims = 2;
    else if (line == "frame,point,x,y,z")
        dims = 3;
    else
        fail(errc::bad_magic, "unrecognized CSV header '" + line + "' in " + path.string());

    std::map<long, std::vector<std::pair<long, Eigen::VectorXd>>> by_frame;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string cell;
        std::vector<std::string> cells;
        while (std::getline(row, cell, ',')) cells.push_back(cell);
        require(cells.size() == std::size_t(2 + dims), errc::inconsistent_point_count,
                "bad column count on line " + std::to_string(line_no) + " of " + path.string());
        try {
            const long frame = std::stol(cells[0]);
            const long point = std::stol(cells[1]);
            Eigen::VectorXd coords(dims);
            // the format carries float32 data; parse at that precision
            for (int c = 0; c < dims; ++c)
                coords[c] = static_cast<double>(std::stof(cells[2 + c]));
            by_frame[frame].emplace_back(point, std::move(coords));
        } catch (const std::exception&) {
            fail(errc::truncated_payload,
                 "unparsable value on line " + std::to_string(line_no) + " of " + path.string());
        }
    }
    require(!by_frame.empty(), errc::truncated_payload, "no landmark rows in " + path.string());

    const std::size_t p = by_frame.begin()->second.size();
    LandmarkTrack track;
    long expect_frame = 0;
    for (auto& [frame, points] : by_frame) {
        require(frame == expect_frame++, errc::inconsistent_point_count,
                "frame indices must be contiguous from 0 in " + path.string());
        require(points.size() == p, errc::inconsistent_point_count,
                "frame " + std::to_string(frame) + " has " + std::to_string(points.size()) +
                    " points, expected " + std::to_string(p) + " in " + path.string());
        std::sort(points.begin(), points.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
        Eigen::MatrixXd m(p, dims);
        for (std::size_t i = 0; i < p; ++i) {
            require(points[i].first == static_cast<long>(i), errc::inconsistent_point_count,
                    "point indices must be 0.." + std::to_string(p - 1) + " in " + path.string());
            m.row(i) = points[i].second.transpose();
        }
        track.frames.push_back(std::move(m));
    }
    track.validate();
    return track;
}

// Accepts either the binary format or CSV, sniffing the first bytes.
inline LandmarkTrack load_landmarks_any(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    require(in.good(), errc::io_failure, "cannot open " + path.string());
    char head[4] = {};
    in.read(head, 4);
    in.close();
    if (std::string(head, 4) == "LMRK") return load_landmarks(path);
    return load_landmarks_csv(path);
}

// --- raw interop -----------------------------------------------------------

// Import a headerless row-major float dump (t outermost, dim innermost), as
// produced by external encoder exports. The shape is the caller's claim and
// is checked against the file size exactly.
inline LatentTrajectory load_raw_trajectory(const std::filesystem::path& path, int t, int layers,
                                            int dim, bool float64 = false) {
    require(t >= 1 && layers >= 1 && dim >= 1, errc::invalid_argument,
            "raw shape values must be >= 1");
    detail::checked_elements({std::uint64_t(t), std::uint64_t(layers), std::uint64_t(dim)},
                             path.string());
    detail::ByteReader r(detail::read_file(path));
    const std::size_t bytes_per = float64 ? 8 : 4;
    require(r.remaining() == std::size_t(t) * layers * dim * bytes_per, errc::truncated_payload,
            "raw file size does not match shape " + std::to_string(t) + "x" +
                std::to_string(layers) + "x" + std::to_string(dim) + " in " + path.string());

    LatentTrajectory traj;
    traj.frames.reserve(t);
    for (int i = 0; i < t; ++i) {
        Code frame(layers, dim);
        for (int l = 0; l < layers; ++l)
            for (int c = 0; c < dim; ++c)
                frame(l, c) = float64 ? r.f64("raw payload") : r.f32("raw payload");
        require(frame.allFinite(), errc::non_finite_payload,
                "NaN/Inf in raw payload of " + path.string());
        traj.frames.push_back(std::move(frame));
    }
    return traj;
}

}  // namespace lm
