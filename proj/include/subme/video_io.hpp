#pragma once

// Raw I420 / Y4M luma loading and deterministic synthetic sequences.
// Only the luma plane is read; chroma bytes are skipped.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "subme/interpolation.hpp"
#include "subme/luma_plane.hpp"
#include "subme/motion_vector.hpp"

namespace subme {

class VideoIoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class SynthKind { global_shift, textured_drift, static_scene };

struct SequenceConfig {
  std::string source;  // file path, or "synth:<kind>"
  int frame_count = 2;
  int width = 176;
  int height = 144;
  std::uint64_t seed = 1;
  MotionVector shift{1, 0};  // global-shift motion per frame, quarter-pel
};

inline constexpr std::string_view kSynthPrefix = "synth:";

inline bool is_synthetic(std::string_view source) { return source.starts_with(kSynthPrefix); }

inline SynthKind parse_synth_kind(std::string_view id) {
  if (id.starts_with(kSynthPrefix)) id.remove_prefix(kSynthPrefix.size());
  if (id == "global-shift") return SynthKind::global_shift;
  if (id == "textured-drift") return SynthKind::textured_drift;
  if (id == "static") return SynthKind::static_scene;
  throw VideoIoError("unknown synthetic sequence '" + std::string(id) +
                     "' (expected global-shift, textured-drift or static)");
}

inline void validate(const SequenceConfig& cfg) {
  if (cfg.frame_count < 2) throw VideoIoError("frame_count must be at least 2");
  if (cfg.width <= 0 || cfg.height <= 0 || cfg.width % kMbSize != 0 || cfg.height % kMbSize != 0) {
    throw VideoIoError("dimensions " + std::to_string(cfg.width) + "x" + std::to_string(cfg.height) +
                       " are not multiples of 16");
  }
}

namespace detail {

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t hash4(std::uint64_t seed, std::int64_t a, std::int64_t b, std::int64_t c) {
  std::uint64_t h = splitmix64(seed);
  h = splitmix64(h ^ static_cast<std::uint64_t>(a));
  h = splitmix64(h ^ static_cast<std::uint64_t>(b));
  return splitmix64(h ^ static_cast<std::uint64_t>(c));
}

constexpr std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  const std::int64_t q = a / b;
  return (a % b != 0 && ((a < 0) != (b < 0))) ? q - 1 : q;
}

// Multi-octave value noise on quarter-pel coordinates, integer arithmetic
// only so output is identical on every platform.
class Texture {
 public:
  explicit Texture(std::uint64_t seed) : seed_(seed) {}

  std::uint8_t at(std::int64_t qx, std::int64_t qy) const {
    std::int64_t acc = 0;
    for (int o = 0; o < kOctaves; ++o) acc += kAmplitude[o] * lattice(o, qx, qy);
    return static_cast<std::uint8_t>(acc / 256);
  }

 private:
  static constexpr int kOctaves = 4;
  static constexpr std::int64_t kSpacing[kOctaves] = {64, 32, 16, 8};  // quarter-pel: 16, 8, 4, 2 px
  static constexpr std::int64_t kAmplitude[kOctaves] = {100, 80, 50, 25};

  std::int64_t node(int octave, std::int64_t i, std::int64_t j) const {
    return static_cast<std::int64_t>(hash4(seed_, octave, i, j) & 0xff);
  }

  std::int64_t lattice(int octave, std::int64_t qx, std::int64_t qy) const {
    const std::int64_t s = kSpacing[octave];
    const std::int64_t i = floor_div(qx, s);
    const std::int64_t j = floor_div(qy, s);
    const std::int64_t fx = qx - i * s;
    const std::int64_t fy = qy - j * s;
    const std::int64_t v = node(octave, i, j) * (s - fx) * (s - fy) + node(octave, i + 1, j) * fx * (s - fy) +
                           node(octave, i, j + 1) * (s - fx) * fy + node(octave, i + 1, j + 1) * fx * fy;
    return v / (s * s);
  }

  std::uint64_t seed_;
};

inline LumaPlane sample_texture(const Texture& tex, int width, int height, std::int64_t qx0, std::int64_t qy0) {
  LumaPlane p(width, height);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) p.at(x, y) = tex.at(qx0 + 4 * x, qy0 + 4 * y);
  }
  return p;
}

}  // namespace detail

// Tile size and per-frame velocity range (quarter-pel) of textured-drift.
inline constexpr int kDriftTile = 24;
inline constexpr int kDriftMaxSpeed = 6;
inline constexpr int kDriftNoise = 2;

// Velocity of the textured-drift tile containing pixel (x, y).
inline MotionVector drift_velocity(std::uint64_t seed, int x, int y) {
  const std::uint64_t h = detail::hash4(seed ^ 0x5bd1e995ULL, 7, x / kDriftTile, y / kDriftTile);
  const int span = 2 * kDriftMaxSpeed + 1;
  return {static_cast<int>(h % span) - kDriftMaxSpeed, static_cast<int>((h >> 16) % span) - kDriftMaxSpeed};
}

// static:         one texture, every frame identical
// global-shift:   frame t+1 is frame t resampled at quarter-pel offset
//                 cfg.shift, so the true MV of every block is cfg.shift
// textured-drift: 24x24 tiles each drifting at their own quarter-pel
//                 velocity, plus +-2 sample noise per frame
inline std::vector<LumaPlane> synth_sequence(SynthKind kind, const SequenceConfig& cfg) {
  validate(cfg);
  const detail::Texture tex(cfg.seed);
  std::vector<LumaPlane> frames;
  frames.reserve(static_cast<std::size_t>(cfg.frame_count));

  switch (kind) {
    case SynthKind::static_scene: {
      const LumaPlane p = detail::sample_texture(tex, cfg.width, cfg.height, 0, 0);
      frames.assign(static_cast<std::size_t>(cfg.frame_count), p);
      break;
    }
    case SynthKind::global_shift: {
      frames.push_back(detail::sample_texture(tex, cfg.width, cfg.height, 0, 0));
      const int reach = (std::max(std::abs(cfg.shift.x), std::abs(cfg.shift.y)) + 3) / 4;
      for (int t = 1; t < cfg.frame_count; ++t) {
        const PaddedReference prev(frames.back(), reach);
        frames.emplace_back(cfg.width, cfg.height, fetch_block(prev, {cfg.shift.x, cfg.shift.y}, cfg.width, cfg.height));
      }
      break;
    }
    case SynthKind::textured_drift: {
      for (int t = 0; t < cfg.frame_count; ++t) {
        LumaPlane p(cfg.width, cfg.height);
        for (int y = 0; y < cfg.height; ++y) {
          for (int x = 0; x < cfg.width; ++x) {
            const MotionVector v = drift_velocity(cfg.seed, x, y);
            const int base = tex.at(4 * x + static_cast<std::int64_t>(t) * v.x, 4 * y + static_cast<std::int64_t>(t) * v.y);
            const auto noise = static_cast<int>(detail::hash4(cfg.seed, t, x, y) % (2 * kDriftNoise + 1)) - kDriftNoise;
            p.at(x, y) = static_cast<std::uint8_t>(std::clamp(base + noise, 0, 255));
          }
        }
        frames.push_back(std::move(p));
      }
      break;
    }
  }
  return frames;
}

namespace detail {

inline std::vector<LumaPlane> load_raw_i420(const SequenceConfig& cfg) {
  const std::filesystem::path path(cfg.source);
  std::error_code ec;
  const auto size = std::filesystem::file_size(path, ec);
  if (ec) throw VideoIoError("cannot read '" + cfg.source + "': " + ec.message());
  const std::uintmax_t luma = static_cast<std::uintmax_t>(cfg.width) * cfg.height;
  const std::uintmax_t frame_bytes = luma * 3 / 2;
  if (size < frame_bytes * static_cast<std::uintmax_t>(cfg.frame_count)) {
    throw VideoIoError("truncated file '" + cfg.source + "': " + std::to_string(size) + " bytes, need " +
                       std::to_string(frame_bytes * cfg.frame_count) + " for " + std::to_string(cfg.frame_count) +
                       " frames");
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw VideoIoError("cannot open '" + cfg.source + "'");
  std::vector<LumaPlane> frames;
  for (int f = 0; f < cfg.frame_count; ++f) {
    std::vector<std::uint8_t> y(luma);
    in.seekg(static_cast<std::streamoff>(frame_bytes * f));
    in.read(reinterpret_cast<char*>(y.data()), static_cast<std::streamsize>(luma));
    if (!in) throw VideoIoError("read error in '" + cfg.source + "'");
    frames.emplace_back(cfg.width, cfg.height, std::move(y));
  }
  return frames;
}

struct Y4mHeader {
  int width = 0;
  int height = 0;
};

inline Y4mHeader parse_y4m_header(const std::string& line) {
  std::istringstream ss(line);
  std::string magic;
  ss >> magic;
  if (magic != "YUV4MPEG2") throw VideoIoError("not a Y4M stream (missing YUV4MPEG2 signature)");
  Y4mHeader h;
  std::string tok;
  while (ss >> tok) {
    const char key = tok[0];
    const std::string val = tok.substr(1);
    switch (key) {
      case 'W': h.width = std::stoi(val); break;
      case 'H': h.height = std::stoi(val); break;
      case 'C':
        if (val != "420" && val != "420jpeg" && val != "420paldv" && val != "420mpeg2") {
          throw VideoIoError("unsupported Y4M colorspace C" + val + " (only 8-bit 4:2:0)");
        }
        break;
      case 'I':
        if (val != "p" && val != "?") throw VideoIoError("interlaced Y4M input is not supported");
        break;
      default: break;  // F, A, X carry nothing luma ME needs
    }
  }
  if (h.width <= 0 || h.height <= 0) throw VideoIoError("Y4M header lacks W/H");
  return h;
}

inline std::vector<LumaPlane> load_y4m(SequenceConfig cfg) {
  std::ifstream in(cfg.source, std::ios::binary);
  if (!in) throw VideoIoError("cannot open '" + cfg.source + "'");
  std::string line;
  if (!std::getline(in, line)) throw VideoIoError("empty Y4M file '" + cfg.source + "'");
  const Y4mHeader h = parse_y4m_header(line);
  cfg.width = h.width;
  cfg.height = h.height;
  validate(cfg);

  const std::streamoff luma = static_cast<std::streamoff>(h.width) * h.height;
  const std::streamoff chroma = 2 * static_cast<std::streamoff>((h.width + 1) / 2) * ((h.height + 1) / 2);
  std::vector<LumaPlane> frames;
  for (int f = 0; f < cfg.frame_count; ++f) {
    if (!std::getline(in, line) || !line.starts_with("FRAME")) {
      throw VideoIoError("truncated Y4M file '" + cfg.source + "': " + std::to_string(f) + " of " +
                         std::to_string(cfg.frame_count) + " frames present");
    }
    std::vector<std::uint8_t> y(static_cast<std::size_t>(luma));
    in.read(reinterpret_cast<char*>(y.data()), luma);
    if (in.gcount() != luma) throw VideoIoError("truncated Y4M frame in '" + cfg.source + "'");
    in.seekg(chroma, std::ios::cur);
    frames.emplace_back(h.width, h.height, std::move(y));
  }
  return frames;
}

}  // namespace detail

inline bool is_y4m_path(std::string_view path) { return path.ends_with(".y4m") || path.ends_with(".Y4M"); }

// Loads cfg.frame_count luma planes from a raw I420 file, a Y4M file, or a
// synthetic generator ("synth:<kind>").
inline std::vector<LumaPlane> load_sequence(const SequenceConfig& cfg) {
  if (is_synthetic(cfg.source)) return synth_sequence(parse_synth_kind(cfg.source), cfg);
  if (cfg.frame_count < 2) throw VideoIoError("frame_count must be at least 2");
  if (is_y4m_path(cfg.source)) return detail::load_y4m(cfg);
  validate(cfg);
  return detail::load_raw_i420(cfg);
}

// Raw I420 with zeroed chroma.
inline void write_raw_i420(const std::string& path, const std::vector<LumaPlane>& frames) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw VideoIoError("cannot create '" + path + "'");
  for (const LumaPlane& f : frames) {
    const auto s = f.samples();
    out.write(reinterpret_cast<const char*>(s.data()), static_cast<std::streamsize>(s.size()));
    const std::vector<char> chroma(2 * static_cast<std::size_t>((f.width() + 1) / 2) * ((f.height() + 1) / 2), 0);
    out.write(chroma.data(), static_cast<std::streamsize>(chroma.size()));
  }
  if (!out) throw VideoIoError("write error on '" + path + "'");
}

inline void write_y4m(const std::string& path, const std::vector<LumaPlane>& frames, std::string_view colorspace = "420jpeg") {
  if (frames.empty()) throw VideoIoError("write_y4m: no frames");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw VideoIoError("cannot create '" + path + "'");
  out << "YUV4MPEG2 W" << frames[0].width() << " H" << frames[0].height() << " F30:1 Ip A1:1 C" << colorspace << "\n";
  for (const LumaPlane& f : frames) {
    out << "FRAME\n";
    const auto s = f.samples();
    out.write(reinterpret_cast<const char*>(s.data()), static_cast<std::streamsize>(s.size()));
    const std::vector<char> chroma(2 * static_cast<std::size_t>((f.width() + 1) / 2) * ((f.height() + 1) / 2), 128);
    out.write(chroma.data(), static_cast<std::streamsize>(chroma.size()));
  }
  if (!out) throw VideoIoError("write error on '" + path + "'");
}

}  // namespace subme
