#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <stdexcept>

#include "subme/luma_plane.hpp"
#include "subme/motion_vector.hpp"

namespace subme {

// Lagrange multiplier for motion search, JM convention:
// lambda_motion = sqrt(0.85 * 2^((qp - 12) / 3)).
struct LambdaModel {
  int qp = 28;
  double lambda_motion = 0.0;

  static LambdaModel from_qp(int qp) {
    return {qp, std::sqrt(0.85 * std::pow(2.0, (qp - 12) / 3.0))};
  }
  static LambdaModel fixed(double lambda) { return {-1, lambda}; }

  Cost rate_cost(int bits) const { return static_cast<Cost>(std::llround(lambda_motion * bits)); }
};

// Length of the signed Exp-Golomb code se(v).
constexpr int se_code_length(int v) {
  const auto mag = static_cast<std::uint32_t>(v < 0 ? -static_cast<std::int64_t>(v) : v);
  const std::uint32_t code_num = 2 * mag - (v > 0 ? 1u : 0u);
  return 2 * (std::bit_width(code_num + 1) - 1) + 1;
}

// Bits to code the MV difference, both components.
constexpr int mv_bits(MotionVector mv, MotionVector pred_mv) {
  return se_code_length(mv.x - pred_mv.x) + se_code_length(mv.y - pred_mv.y);
}

inline Cost sad(const BlockView& cur, const BlockView& pred) {
  if (cur.width != pred.width || cur.height != pred.height) {
    throw std::invalid_argument("sad: block dimensions differ");
  }
  Cost total = 0;
  for (int y = 0; y < cur.height; ++y) {
    const auto a = cur.row(y);
    const auto b = pred.row(y);
    int row_sum = 0;
    for (int x = 0; x < cur.width; ++x) row_sum += std::abs(int{a[x]} - int{b[x]});
    total += row_sum;
  }
  return total;
}

inline Cost cost(Cost sad_value, MotionVector mv, MotionVector pred_mv, const LambdaModel& lambda) {
  return sad_value + lambda.rate_cost(mv_bits(mv, pred_mv));
}

struct NeighborMv {
  MotionVector mv;
  bool available = false;
};

constexpr int median3(int a, int b, int c) { return std::max(std::min(a, b), std::min(std::max(a, b), c)); }

// Median MV predictor over the left, top and top-right neighbours.
// Only the left neighbour available: use it. Otherwise unavailable
// neighbours count as (0,0).
constexpr MotionVector predict_mv(NeighborMv left, NeighborMv top, NeighborMv top_right) {
  if (left.available && !top.available && !top_right.available) return left.mv;
  const MotionVector a = left.available ? left.mv : MotionVector{};
  const MotionVector b = top.available ? top.mv : MotionVector{};
  const MotionVector c = top_right.available ? top_right.mv : MotionVector{};
  return {median3(a.x, b.x, c.x), median3(a.y, b.y, c.y)};
}

}  // namespace subme
