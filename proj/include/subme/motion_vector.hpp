#pragma once

#include <cstdint>
#include <cstdlib>
#include <functional>
#include <ostream>
#include <tuple>

namespace subme {

// Matching cost in integer units (SAD plus rounded rate term).
using Cost = std::int64_t;

// Displacement in quarter-pel units. Integer-pel MVs have both components
// divisible by 4.
struct MotionVector {
  int x = 0;
  int y = 0;

  friend constexpr bool operator==(MotionVector, MotionVector) = default;

  constexpr MotionVector operator+(MotionVector o) const { return {x + o.x, y + o.y}; }
  constexpr MotionVector operator-(MotionVector o) const { return {x - o.x, y - o.y}; }

  constexpr bool is_integer() const { return (x & 3) == 0 && (y & 3) == 0; }

  static constexpr MotionVector from_pixels(int px, int py) { return {px * 4, py * 4}; }

  friend std::ostream& operator<<(std::ostream& os, MotionVector mv) {
    return os << '(' << mv.x << ',' << mv.y << ')';
  }
};

constexpr int manhattan(MotionVector a, MotionVector b) {
  return std::abs(a.x - b.x) + std::abs(a.y - b.y);
}

// Tie-break order between equal-cost MVs: smaller |y|, then smaller |x|,
// then smaller y, then smaller x.
constexpr bool ranks_before(MotionVector a, MotionVector b) {
  return std::make_tuple(std::abs(a.y), std::abs(a.x), a.y, a.x) <
         std::make_tuple(std::abs(b.y), std::abs(b.x), b.y, b.x);
}

struct ScoredMv {
  MotionVector mv;
  Cost cost = 0;
};

// Strict total order used by every search: lower cost wins, ties resolved by
// ranks_before.
constexpr bool better(const ScoredMv& a, const ScoredMv& b) {
  if (a.cost != b.cost) return a.cost < b.cost;
  return ranks_before(a.mv, b.mv);
}

}  // namespace subme

template <>
struct std::hash<subme::MotionVector> {
  std::size_t operator()(subme::MotionVector mv) const noexcept {
    return std::hash<std::uint64_t>{}((static_cast<std::uint64_t>(static_cast<std::uint32_t>(mv.x)) << 32) |
                                      static_cast<std::uint32_t>(mv.y));
  }
};
