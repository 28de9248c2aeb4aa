#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include "subme/luma_plane.hpp"
#include "subme/mode_decision.hpp"
#include "subme/motion_vector.hpp"
#include "subme/subpel.hpp"

namespace subme {

// Manhattan distance (quarter-pel) between MV_step2 and the brute-force best
// sub-pel MV, bucketed as d = 0, 1, 2, > 2.
struct DistanceHistogram {
  std::array<std::int64_t, 4> counts{};

  void add(int d) { ++counts[static_cast<std::size_t>(d < 3 ? d : 3)]; }

  std::int64_t total() const { return counts[0] + counts[1] + counts[2] + counts[3]; }

  std::int64_t cumulative(int max_d) const {
    std::int64_t n = 0;
    for (int i = 0; i <= max_d && i < 3; ++i) n += counts[static_cast<std::size_t>(i)];
    return n;
  }

  double cumulative_share(int max_d) const {
    return total() == 0 ? 0.0 : static_cast<double>(cumulative(max_d)) / static_cast<double>(total());
  }

  void merge(const DistanceHistogram& o) {
    for (std::size_t i = 0; i < counts.size(); ++i) counts[i] += o.counts[i];
  }
};

inline double psnr_from_mse(double mse) {
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(255.0 * 255.0 / mse);
}

inline std::int64_t squared_error(const LumaPlane& cur, const LumaPlane& predicted) {
  if (cur.width() != predicted.width() || cur.height() != predicted.height()) {
    throw std::invalid_argument("mc_prediction_psnr: plane sizes differ");
  }
  std::int64_t sse = 0;
  const auto a = cur.samples();
  const auto b = predicted.samples();
  for (std::size_t i = 0; i < a.size(); ++i) {
    const int d = int{a[i]} - int{b[i]};
    sse += d * d;
  }
  return sse;
}

// PSNR of a prediction against the source; +infinity when identical.
inline double mc_prediction_psnr(const LumaPlane& cur, const LumaPlane& predicted) {
  const std::int64_t sse = squared_error(cur, predicted);
  return psnr_from_mse(static_cast<double>(sse) / static_cast<double>(cur.samples().size()));
}

struct FrameStats {
  int frame_index = 0;
  std::int64_t points = 0;
  std::int64_t partitions = 0;
  Cost total_cost = 0;
  double mc_psnr = 0.0;
};

struct SearchStats {
  std::int64_t points = 0;
  std::int64_t partitions = 0;
  std::int64_t refined_partitions = 0;
  DistanceHistogram distance;
  Cost total_cost = 0;
  std::int64_t sse = 0;
  std::int64_t samples = 0;
  std::vector<FrameStats> frames;

  double sp_per_pt() const {
    return partitions == 0 ? 0.0 : static_cast<double>(points) / static_cast<double>(partitions);
  }

  // PSNR over the pooled squared error of every predicted frame.
  double mc_psnr() const {
    return samples == 0 ? 0.0 : psnr_from_mse(static_cast<double>(sse) / static_cast<double>(samples));
  }

  void record_partition(const SubpelOutcome& outcome, std::optional<MotionVector> oracle_best) {
    points += outcome.points;
    ++partitions;
    if (outcome.mv_step2 && oracle_best) distance.add(manhattan(*outcome.mv_step2, *oracle_best));
  }

  // Folds one estimated frame into the totals.
  void record_frame(int frame_index, const LumaPlane& cur, const FrameResult& fr) {
    FrameStats fs;
    fs.frame_index = frame_index;
    const std::int64_t points_before = points;
    const std::int64_t partitions_before = partitions;
    for (const MbModeResult& mb : fr.mbs) {
      for (const PartitionTrace& t : mb.traces) record_partition(t.final_outcome(), t.oracle_best);
      refined_partitions += mb.refined_partitions;
      fs.total_cost += mb.total_final_cost;
    }
    fs.points = points - points_before;
    fs.partitions = partitions - partitions_before;
    const std::int64_t frame_sse = squared_error(cur, fr.prediction);
    fs.mc_psnr = psnr_from_mse(static_cast<double>(frame_sse) / static_cast<double>(cur.samples().size()));
    total_cost += fs.total_cost;
    sse += frame_sse;
    samples += static_cast<std::int64_t>(cur.samples().size());
    frames.push_back(fs);
  }

  void merge(const SearchStats& o) {
    points += o.points;
    partitions += o.partitions;
    refined_partitions += o.refined_partitions;
    distance.merge(o.distance);
    total_cost += o.total_cost;
    sse += o.sse;
    samples += o.samples;
    frames.insert(frames.end(), o.frames.begin(), o.frames.end());
  }
};

}  // namespace subme
