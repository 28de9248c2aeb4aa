#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "subme/cost_model.hpp"
#include "subme/interpolation.hpp"
#include "subme/luma_plane.hpp"
#include "subme/motion_vector.hpp"

namespace subme {

// Small partitions (8x8 and below) versus large ones (16x16, 16x8, 8x16);
// the flatness and step-size gates use different thresholds for each.
enum class BlockClass { small_block, large_block };

constexpr bool valid_partition_size(int w, int h) {
  return (w == 16 && (h == 16 || h == 8)) || (w == 8 && (h == 16 || h == 8 || h == 4)) || (w == 4 && (h == 8 || h == 4));
}

constexpr BlockClass block_class_of(int w, int h) {
  return (w == 16 || h == 16) ? BlockClass::large_block : BlockClass::small_block;
}

struct PartitionJob {
  int mb_x = 0;   // macroblock origin, pixels
  int mb_y = 0;
  int off_x = 0;  // partition offset inside the macroblock, pixels
  int off_y = 0;
  int width = 16;
  int height = 16;
  int ref_index = 0;
  MotionVector pred_mv;

  int x() const { return mb_x + off_x; }
  int y() const { return mb_y + off_y; }
  BlockClass block_class() const { return block_class_of(width, height); }
  QuarterPos quarter_origin() const { return {4 * x(), 4 * y()}; }
};

// Best integer COST and the COSTs at its four integer neighbours.
struct CostCross {
  Cost full = 0;
  Cost left = 0;
  Cost right = 0;
  Cost up = 0;
  Cost down = 0;

  // Neighbour averages kept at 2x scale so every gate stays in integers.
  constexpr Cost sum_vertical() const { return up + down; }
  constexpr Cost sum_horizontal() const { return left + right; }
};

struct IntegerResult {
  MotionVector mv;  // quarter-pel units, always integer-pel
  CostCross cross;
};

// SADs of every 4x4 sub-block of a region for every integer displacement in
// [-(range+1), range+1]^2. Partitions inside the region sum their sub-blocks.
// The extra ring beyond the search range serves CostCross neighbours.
class IntegerSadTable {
 public:
  IntegerSadTable(const LumaPlane& cur, const PaddedReference& ref, int x0, int y0, int w, int h, int range)
      : x0_(x0), y0_(y0), cols_(w / 4), rows_(h / 4), range_(range), span_(2 * (range + 1) + 1) {
    if (w % 4 != 0 || h % 4 != 0 || w <= 0 || h <= 0) throw std::invalid_argument("IntegerSadTable: region not 4-aligned");
    if (x0 < 0 || y0 < 0 || x0 + w > cur.width() || y0 + h > cur.height()) {
      throw std::invalid_argument("IntegerSadTable: region outside current frame");
    }
    if (range < 0 || range + 1 + PaddedReference::kFilterMargin / 2 > ref.pad()) {
      throw std::invalid_argument("IntegerSadTable: search range " + std::to_string(range) + " exceeds reference padding");
    }
    sads_.assign(static_cast<std::size_t>(span_) * span_ * cols_ * rows_, 0);
    const int reach = range + 1;
    std::vector<std::int32_t> sub(static_cast<std::size_t>(cols_) * rows_);
    for (int dy = -reach; dy <= reach; ++dy) {
      for (int dx = -reach; dx <= reach; ++dx) {
        std::ranges::fill(sub, 0);
        for (int r = 0; r < h; ++r) {
          const auto c = cur.row(y0 + r).subspan(x0, w);
          const BlockView p = ref.integer_block(x0 + dx, y0 + r + dy, w, 1);
          const auto pr = p.row(0);
          std::int32_t* acc = sub.data() + static_cast<std::size_t>(r / 4) * cols_;
          for (int col = 0; col < w; ++col) acc[col >> 2] += std::abs(int{c[col]} - int{pr[col]});
        }
        std::ranges::copy(sub, sads_.begin() + static_cast<std::ptrdiff_t>(offset(dx, dy)));
      }
    }
  }

  int range() const { return range_; }
  int x0() const { return x0_; }
  int y0() const { return y0_; }

  // SAD of the w x h block at plane position (x, y) displaced by integer (dx, dy).
  Cost block_sad(int x, int y, int w, int h, int dx, int dy) const {
    const std::size_t base = offset(dx, dy);
    const int c0 = (x - x0_) / 4;
    const int r0 = (y - y0_) / 4;
    Cost total = 0;
    for (int r = r0; r < r0 + h / 4; ++r) {
      for (int c = c0; c < c0 + w / 4; ++c) total += sads_[base + static_cast<std::size_t>(r) * cols_ + c];
    }
    return total;
  }

 private:
  std::size_t offset(int dx, int dy) const {
    const int reach = range_ + 1;
    return (static_cast<std::size_t>(dy + reach) * span_ + (dx + reach)) * cols_ * rows_;
  }

  int x0_;
  int y0_;
  int cols_;
  int rows_;
  int range_;
  int span_;
  std::vector<std::int32_t> sads_;
};

// Exhaustive integer search over [-range, range]^2 using a precomputed table.
inline IntegerResult full_search(const PartitionJob& job, const IntegerSadTable& table, const LambdaModel& lambda) {
  const int range = table.range();
  auto cost_at = [&](int dx, int dy) {
    const MotionVector mv = MotionVector::from_pixels(dx, dy);
    return cost(table.block_sad(job.x(), job.y(), job.width, job.height, dx, dy), mv, job.pred_mv, lambda);
  };

  ScoredMv best{MotionVector{}, cost_at(0, 0)};
  for (int dy = -range; dy <= range; ++dy) {
    for (int dx = -range; dx <= range; ++dx) {
      const ScoredMv cand{MotionVector::from_pixels(dx, dy), cost_at(dx, dy)};
      if (better(cand, best)) best = cand;
    }
  }
  const int bx = best.mv.x / 4;
  const int by = best.mv.y / 4;
  IntegerResult out;
  out.mv = best.mv;
  out.cross = {best.cost, cost_at(bx - 1, by), cost_at(bx + 1, by), cost_at(bx, by - 1), cost_at(bx, by + 1)};
  return out;
}

inline IntegerResult full_search(const PartitionJob& job, const LumaPlane& cur, const PaddedReference& ref, int range,
                                 const LambdaModel& lambda) {
  if (!valid_partition_size(job.width, job.height)) {
    throw std::invalid_argument("full_search: unsupported partition " + std::to_string(job.width) + "x" +
                                std::to_string(job.height));
  }
  const IntegerSadTable table(cur, ref, job.x(), job.y(), job.width, job.height, range);
  return full_search(job, table, lambda);
}

}  // namespace subme
