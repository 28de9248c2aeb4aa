#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace subme {

inline constexpr int kMbSize = 16;

// 8-bit luma samples in row-major order.
class LumaPlane {
 public:
  LumaPlane() = default;

  LumaPlane(int width, int height, std::uint8_t fill = 0)
      : width_(width), height_(height), samples_(checked_size(width, height), fill) {}

  LumaPlane(int width, int height, std::vector<std::uint8_t> samples)
      : width_(width), height_(height), samples_(std::move(samples)) {
    if (samples_.size() != checked_size(width, height)) {
      throw std::invalid_argument("LumaPlane: sample count does not match " + std::to_string(width) + "x" +
                                  std::to_string(height));
    }
  }

  int width() const { return width_; }
  int height() const { return height_; }
  bool mb_aligned() const { return width_ % kMbSize == 0 && height_ % kMbSize == 0; }

  std::uint8_t at(int x, int y) const { return samples_[index(x, y)]; }
  std::uint8_t& at(int x, int y) { return samples_[index(x, y)]; }

  std::span<const std::uint8_t> row(int y) const {
    return std::span<const std::uint8_t>(samples_).subspan(static_cast<std::size_t>(y) * width_, width_);
  }
  std::span<std::uint8_t> row(int y) {
    return std::span<std::uint8_t>(samples_).subspan(static_cast<std::size_t>(y) * width_, width_);
  }

  std::span<const std::uint8_t> samples() const { return samples_; }
  std::span<std::uint8_t> samples() { return samples_; }

  friend bool operator==(const LumaPlane&, const LumaPlane&) = default;

 private:
  static std::size_t checked_size(int width, int height) {
    if (width <= 0 || height <= 0) throw std::invalid_argument("LumaPlane: non-positive dimension");
    return static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  }
  std::size_t index(int x, int y) const { return static_cast<std::size_t>(y) * width_ + x; }

  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> samples_;
};

// Read-only rectangular window with a row stride.
struct BlockView {
  std::span<const std::uint8_t> samples;
  int width = 0;
  int height = 0;
  int stride = 0;

  std::span<const std::uint8_t> row(int y) const {
    return samples.subspan(static_cast<std::size_t>(y) * stride, width);
  }

  static BlockView of(const std::vector<std::uint8_t>& v, int width, int height) {
    return {v, width, height, width};
  }

  static BlockView of(const LumaPlane& plane, int x, int y, int width, int height) {
    auto all = plane.samples();
    const std::size_t start = static_cast<std::size_t>(y) * plane.width() + x;
    const std::size_t len = static_cast<std::size_t>(height - 1) * plane.width() + width;
    return {all.subspan(start, len), width, height, plane.width()};
  }
};

}  // namespace subme
