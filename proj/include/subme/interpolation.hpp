#pragma once

// Quarter-pel reference access using the H.264 luma interpolation:
// a 6-tap (1,-5,20,20,-5,1) filter for half-pel samples and rounded
// bilinear averaging for quarter-pel samples.

#include <algorithm>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "subme/luma_plane.hpp"

namespace subme {

// Position in quarter-pel units, origin at the top-left integer sample.
struct QuarterPos {
  int x = 0;
  int y = 0;
  friend constexpr bool operator==(QuarterPos, QuarterPos) = default;
};

namespace detail {

constexpr int six_tap(int e, int f, int g, int h, int i, int j) {
  return e - 5 * f + 20 * g + 20 * h - 5 * i + j;
}

constexpr std::uint8_t clip_u8(int v) { return static_cast<std::uint8_t>(std::clamp(v, 0, 255)); }

constexpr std::uint8_t avg_round(int a, int b) { return static_cast<std::uint8_t>((a + b + 1) >> 1); }

}  // namespace detail

// Edge-replicated copy of a luma plane with the three half-pel grids
// precomputed over the padded area. Immutable after construction.
//
// Grid conventions (padded coordinates, same size as the integer grid):
//   half_h(x, y)  between integer (x, y) and (x+1, y)
//   half_v(x, y)  between integer (x, y) and (x, y+1)
//   half_d(x, y)  centre of integer (x, y) .. (x+1, y+1)
class PaddedReference {
 public:
  static constexpr int kFilterMargin = 8;

  PaddedReference(const LumaPlane& base, int search_range)
      : width_(base.width()),
        height_(base.height()),
        pad_(std::max(search_range, 0) + kFilterMargin),
        stride_(width_ + 2 * pad_),
        rows_(height_ + 2 * pad_) {
    const std::size_t n = static_cast<std::size_t>(stride_) * rows_;
    full_.resize(n);
    half_h_.resize(n);
    half_v_.resize(n);
    half_d_.resize(n);

    for (int py = 0; py < rows_; ++py) {
      const int sy = std::clamp(py - pad_, 0, height_ - 1);
      for (int px = 0; px < stride_; ++px) {
        const int sx = std::clamp(px - pad_, 0, width_ - 1);
        full_[idx(px, py)] = base.at(sx, sy);
      }
    }

    // Unshifted horizontal 6-tap sums feed both half_h and the diagonal grid.
    std::vector<int> h_sum(n);
    for (int py = 0; py < rows_; ++py) {
      for (int px = 0; px < stride_; ++px) {
        const int s = detail::six_tap(full_at(px - 2, py), full_at(px - 1, py), full_at(px, py),
                                      full_at(px + 1, py), full_at(px + 2, py), full_at(px + 3, py));
        h_sum[idx(px, py)] = s;
        half_h_[idx(px, py)] = detail::clip_u8((s + 16) >> 5);
      }
    }
    auto h_sum_at = [&](int px, int py) { return h_sum[idx(px, std::clamp(py, 0, rows_ - 1))]; };
    for (int py = 0; py < rows_; ++py) {
      for (int px = 0; px < stride_; ++px) {
        const int v = detail::six_tap(full_at(px, py - 2), full_at(px, py - 1), full_at(px, py),
                                      full_at(px, py + 1), full_at(px, py + 2), full_at(px, py + 3));
        half_v_[idx(px, py)] = detail::clip_u8((v + 16) >> 5);
        const int d = detail::six_tap(h_sum_at(px, py - 2), h_sum_at(px, py - 1), h_sum_at(px, py),
                                      h_sum_at(px, py + 1), h_sum_at(px, py + 2), h_sum_at(px, py + 3));
        half_d_[idx(px, py)] = detail::clip_u8((d + 512) >> 10);
      }
    }
  }

  int width() const { return width_; }
  int height() const { return height_; }
  int pad() const { return pad_; }
  int stride() const { return stride_; }

  // Accessors take plane coordinates; valid range is [-pad, size + pad).
  std::uint8_t integer_sample(int x, int y) const { return full_[idx(x + pad_, y + pad_)]; }
  std::uint8_t half_h(int x, int y) const { return half_h_[idx(x + pad_, y + pad_)]; }
  std::uint8_t half_v(int x, int y) const { return half_v_[idx(x + pad_, y + pad_)]; }
  std::uint8_t half_d(int x, int y) const { return half_d_[idx(x + pad_, y + pad_)]; }

  // Integer-grid window starting at plane coordinate (x, y).
  BlockView integer_block(int x, int y, int w, int h) const {
    const std::size_t start = idx(x + pad_, y + pad_);
    const std::size_t len = static_cast<std::size_t>(h - 1) * stride_ + w;
    return {std::span<const std::uint8_t>(full_).subspan(start, len), w, h, stride_};
  }

  // True when every sample read by fetch_block(pos, w, h) lies in the padded area.
  bool contains(QuarterPos pos, int w, int h) const {
    const int xi = pos.x >> 2;
    const int yi = pos.y >> 2;
    return xi >= -pad_ && yi >= -pad_ && xi + w + 1 <= width_ + pad_ && yi + h + 1 <= height_ + pad_;
  }

  // Sample at an arbitrary quarter-pel position, H.264 luma rules.
  std::uint8_t sample(QuarterPos pos) const {
    const int x = pos.x >> 2;
    const int y = pos.y >> 2;
    const int fx = pos.x & 3;
    const int fy = pos.y & 3;

    const int g = integer_sample(x, y);
    if (fx == 0 && fy == 0) return static_cast<std::uint8_t>(g);
    const int b = half_h(x, y);
    const int h = half_v(x, y);
    const int j = half_d(x, y);

    switch (fy * 4 + fx) {
      case 1: return detail::avg_round(g, b);                         // a
      case 2: return static_cast<std::uint8_t>(b);                    // b
      case 3: return detail::avg_round(b, integer_sample(x + 1, y));  // c
      case 4: return detail::avg_round(g, h);                         // d
      case 5: return detail::avg_round(b, h);                         // e
      case 6: return detail::avg_round(b, j);                         // f
      case 7: return detail::avg_round(b, half_v(x + 1, y));          // g
      case 8: return static_cast<std::uint8_t>(h);                    // h
      case 9: return detail::avg_round(h, j);                         // i
      case 10: return static_cast<std::uint8_t>(j);                   // j
      case 11: return detail::avg_round(j, half_v(x + 1, y));         // k
      case 12: return detail::avg_round(h, integer_sample(x, y + 1)); // n
      case 13: return detail::avg_round(h, half_h(x, y + 1));         // p
      case 14: return detail::avg_round(j, half_h(x, y + 1));         // q
      case 15: return detail::avg_round(half_v(x + 1, y), half_h(x, y + 1));  // r
    }
    return static_cast<std::uint8_t>(g);
  }

 private:
  std::size_t idx(int px, int py) const { return static_cast<std::size_t>(py) * stride_ + px; }
  int full_at(int px, int py) const {
    return full_[idx(std::clamp(px, 0, stride_ - 1), std::clamp(py, 0, rows_ - 1))];
  }

  int width_;
  int height_;
  int pad_;
  int stride_;
  int rows_;
  std::vector<std::uint8_t> full_;
  std::vector<std::uint8_t> half_h_;
  std::vector<std::uint8_t> half_v_;
  std::vector<std::uint8_t> half_d_;
};

// Prediction block whose top-left sample sits at `pos`. Writes w*h samples
// row-major into `out`.
inline void fetch_block(const PaddedReference& ref, QuarterPos pos, int w, int h, std::span<std::uint8_t> out) {
  if (!ref.contains(pos, w, h)) {
    throw std::out_of_range("fetch_block: position (" + std::to_string(pos.x) + "," + std::to_string(pos.y) +
                            ") outside padded reference");
  }
  if (out.size() < static_cast<std::size_t>(w) * h) throw std::invalid_argument("fetch_block: output too small");
  if ((pos.x & 3) == 0 && (pos.y & 3) == 0) {
    const BlockView src = ref.integer_block(pos.x >> 2, pos.y >> 2, w, h);
    for (int r = 0; r < h; ++r) std::ranges::copy(src.row(r), out.begin() + static_cast<std::ptrdiff_t>(r) * w);
    return;
  }
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      out[static_cast<std::size_t>(r) * w + c] = ref.sample({pos.x + 4 * c, pos.y + 4 * r});
    }
  }
}

inline std::vector<std::uint8_t> fetch_block(const PaddedReference& ref, QuarterPos pos, int w, int h) {
  std::vector<std::uint8_t> out(static_cast<std::size_t>(w) * h);
  fetch_block(ref, pos, w, h, out);
  return out;
}

}  // namespace subme
