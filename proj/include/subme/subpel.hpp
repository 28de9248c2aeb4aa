#pragma once

// Sub-pel search strategies sharing one evaluator and one search-point
// accounting rule: a point is counted the first time a non-integer position
// is SAD-evaluated for a partition. Integer positions are known from the
// integer search and never count.
//
//   full   JM 16-point search: 8 half-pel then 8 quarter-pel neighbours
//   cbfps  spatial-predictor start (pred_mv - MV) % 4, then diamond descent
//   fpme   quadratic-model start, then diamond descent
//   ie_sme integer COSTs pick the mode, the winner gets the 16-point search
//   rfsme  rough search (flatness gate, two predictors, D gate, bilinear
//          neighbour pick) before mode decision, 8-neighbour refinement of
//          the winner only

#include <algorithm>
#include <array>
#include <concepts>
#include <cstdint>
#include <cstdlib>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "subme/cost_model.hpp"
#include "subme/integer_me.hpp"
#include "subme/interpolation.hpp"
#include "subme/luma_plane.hpp"
#include "subme/motion_vector.hpp"

namespace subme {

enum class Strategy { full, cbfps, fpme, ie_sme, rfsme };

inline constexpr std::array<Strategy, 5> kAllStrategies = {Strategy::full, Strategy::cbfps, Strategy::fpme,
                                                           Strategy::ie_sme, Strategy::rfsme};

constexpr std::string_view to_string(Strategy s) {
  switch (s) {
    case Strategy::full: return "full";
    case Strategy::cbfps: return "cbfps";
    case Strategy::fpme: return "fpme";
    case Strategy::ie_sme: return "ie_sme";
    case Strategy::rfsme: return "rfsme";
  }
  return "?";
}

inline Strategy parse_strategy(std::string_view id) {
  for (Strategy s : kAllStrategies) {
    if (to_string(s) == id) return s;
  }
  throw std::invalid_argument("unknown strategy '" + std::string(id) + "' (expected full|cbfps|fpme|ie_sme|rfsme)");
}

struct Ratio {
  Cost num = 1;
  Cost den = 1;
};

struct GateParams {
  Cost th1 = 10;
  Cost th2 = 20;
  Ratio r_flat{5, 4};
  Ratio r_d{3, 2};
};

enum class SearchPath { flat_skip, step2_stop, step3, refined, full, descent, integer_only };

constexpr std::string_view to_string(SearchPath p) {
  switch (p) {
    case SearchPath::flat_skip: return "flat_skip";
    case SearchPath::step2_stop: return "step2_stop";
    case SearchPath::step3: return "step3";
    case SearchPath::refined: return "refined";
    case SearchPath::full: return "full";
    case SearchPath::descent: return "descent";
    case SearchPath::integer_only: return "integer_only";
  }
  return "?";
}

struct SubpelOutcome {
  MotionVector mv;
  Cost cost = 0;
  int points = 0;
  SearchPath path = SearchPath::integer_only;
  std::optional<MotionVector> mv_step2;
};

// COST of one candidate MV for a partition, evaluated from scratch.
inline Cost evaluate_cost(const LumaPlane& cur, const PaddedReference& ref, const PartitionJob& job,
                          const LambdaModel& lambda, MotionVector mv, std::vector<std::uint8_t>& scratch) {
  scratch.resize(static_cast<std::size_t>(job.width) * job.height);
  const QuarterPos origin = job.quarter_origin();
  fetch_block(ref, {origin.x + mv.x, origin.y + mv.y}, job.width, job.height, scratch);
  const Cost s = sad(BlockView::of(cur, job.x(), job.y(), job.width, job.height),
                     BlockView::of(scratch, job.width, job.height));
  return cost(s, mv, job.pred_mv, lambda);
}

// Per-partition COST cache and search-point counter.
class SubpelEvaluator {
 public:
  SubpelEvaluator(const LumaPlane& cur, const PaddedReference& ref, const PartitionJob& job, const LambdaModel& lambda)
      : cur_(&cur), ref_(&ref), job_(job), lambda_(lambda) {}

  Cost cost_at(MotionVector mv) {
    for (const ScoredMv& s : cache_) {
      if (s.mv == mv) return s.cost;
    }
    const Cost c = evaluate_cost(*cur_, *ref_, job_, lambda_, mv, scratch_);
    cache_.push_back({mv, c});
    if (!mv.is_integer()) ++points_;
    return c;
  }

  ScoredMv score(MotionVector mv) { return {mv, cost_at(mv)}; }

  bool evaluated(MotionVector mv) const {
    return std::ranges::any_of(cache_, [mv](const ScoredMv& s) { return s.mv == mv; });
  }

  int points() const { return points_; }
  const PartitionJob& job() const { return job_; }
  const LambdaModel& lambda() const { return lambda_; }

 private:
  const LumaPlane* cur_;
  const PaddedReference* ref_;
  PartitionJob job_;
  LambdaModel lambda_;
  std::vector<ScoredMv> cache_;
  std::vector<std::uint8_t> scratch_;
  int points_ = 0;
};

// Anything that prices candidate MVs for one partition and counts the
// sub-pel points it had to evaluate.
template <class E>
concept CostEvaluator = requires(E& e, const E& ce, MotionVector mv) {
  { e.score(mv) } -> std::same_as<ScoredMv>;
  { ce.points() } -> std::convertible_to<int>;
  { ce.job() } -> std::convertible_to<const PartitionJob&>;
};

static_assert(CostEvaluator<SubpelEvaluator>);

// Spatial sub-pel predictor: (pred_mv - best_int) % 4 with truncated
// division, so each component lies in [-3, 3].
constexpr MotionVector cbfps_predict(MotionVector pred_mv, MotionVector best_int) {
  return {(pred_mv.x - best_int.x) % 4, (pred_mv.y - best_int.y) % 4};
}

namespace detail {

// round(num / den) half away from zero; den != 0.
constexpr Cost div_round_away(Cost num, Cost den) {
  if (den < 0) {
    num = -num;
    den = -den;
  }
  const Cost mag = (2 * (num < 0 ? -num : num) + den) / (2 * den);
  return num < 0 ? -mag : mag;
}

// One axis of the separable quadratic f = c1 x^2 + c2 x + c5 through
// f(-1), f(0), f(1). The minimiser -B/(2A) in quarter-pel is
// 2 (f(-1) - f(1)) / (f(1) + f(-1) - 2 f(0)).
constexpr int quad_axis(Cost minus, Cost centre, Cost plus) {
  const Cost i = plus - centre;
  const Cost j = minus - centre;
  const Cost den = i + j;
  if (den == 0) return 0;
  return static_cast<int>(std::clamp<Cost>(div_round_away(2 * (j - i), den), -3, 3));
}

}  // namespace detail

// Surface-model sub-pel predictor from the integer COST cross, quarter-pel
// offset per axis in [-3, 3]; an axis with a zero curvature term stays at 0.
constexpr MotionVector quad_predict(const CostCross& cross) {
  return {detail::quad_axis(cross.left, cross.full, cross.right), detail::quad_axis(cross.up, cross.full, cross.down)};
}

enum class Flatness { flat, not_flat };
enum class StepGain { small, large };

namespace detail {

constexpr Cost threshold_for(BlockClass cls, const GateParams& p) {
  return cls == BlockClass::small_block ? p.th1 : p.th2;
}

// avg > ratio * reference, with avg held as a 2x-scaled sum.
constexpr bool avg_exceeds(Cost sum2, Ratio ratio, Cost reference) {
  return sum2 * ratio.den > 2 * ratio.num * reference;
}

constexpr Cost abs_cost(Cost v) { return v < 0 ? -v : v; }

}  // namespace detail

// Step 1 gate on the integer COST cross.
constexpr Flatness flatness_gate(const CostCross& cross, BlockClass cls, const GateParams& p) {
  const Cost sv = cross.sum_vertical();
  const Cost sh = cross.sum_horizontal();
  if (detail::avg_exceeds(sv, p.r_flat, cross.full) || detail::avg_exceeds(sh, p.r_flat, cross.full)) {
    return Flatness::not_flat;
  }
  const Cost min_gap2 = std::min(detail::abs_cost(2 * cross.full - sv), detail::abs_cost(2 * cross.full - sh));
  return min_gap2 > 2 * detail::threshold_for(cls, p) ? Flatness::not_flat : Flatness::flat;
}

// Step 2 gate on D = |cost_step2 - cost_best_full|.
constexpr StepGain d_gate(Cost cost_step2, Cost cost_best_full, const CostCross& cross, BlockClass cls,
                          const GateParams& p) {
  const Cost cost_min = std::min(cost_step2, cost_best_full);
  if (detail::avg_exceeds(cross.sum_vertical(), p.r_d, cost_min) ||
      detail::avg_exceeds(cross.sum_horizontal(), p.r_d, cost_min)) {
    return StepGain::large;
  }
  const Cost d = detail::abs_cost(cost_step2 - cost_best_full);
  return 2 * d > detail::threshold_for(cls, p) ? StepGain::large : StepGain::small;
}

struct BilinearPicks {
  MotionVector horizontal;
  MotionVector vertical;
};

namespace detail {

// Returns -1 (H1/V1, lower coordinate) or +1 (H2/V2). The integer
// neighbours bracketing the step-2 point come from the cross; when the
// step-2 point sits on the integer coordinate both sides are 4 away.
constexpr int pick_side(int step2, int best, Cost cost_lower_int, Cost cost_full, Cost cost_upper_int, Cost cost_min) {
  const int offset = step2 - best;
  int lo_coord = best - 4;
  Cost lo_cost = cost_lower_int;
  int hi_coord = best + 4;
  Cost hi_cost = cost_upper_int;
  if (offset > 0) {
    lo_coord = best;
    lo_cost = cost_full;
  } else if (offset < 0) {
    hi_coord = best;
    hi_cost = cost_full;
  }
  const Cost lo_num = abs_cost(lo_cost - cost_min);
  const Cost lo_den = std::abs(lo_coord - step2);
  const Cost hi_num = abs_cost(hi_cost - cost_min);
  const Cost hi_den = std::abs(hi_coord - step2);
  const Cost lhs = lo_num * hi_den;
  const Cost rhs = hi_num * lo_den;
  if (lhs < rhs) return -1;
  if (lhs > rhs) return +1;
  return offset < 0 ? +1 : -1;  // tie: step back toward the best integer MV
}

}  // namespace detail

// Step 3 neighbour choice: one of the two horizontal and one of the two
// vertical quarter-pel neighbours of the step-2 point, on the side whose
// integer-to-step-2 COST slope is smaller.
constexpr BilinearPicks bilinear_select(MotionVector mv_step2, Cost cost_min_step2, MotionVector best_int,
                                        const CostCross& cross) {
  const int sx = detail::pick_side(mv_step2.x, best_int.x, cross.left, cross.full, cross.right, cost_min_step2);
  const int sy = detail::pick_side(mv_step2.y, best_int.y, cross.up, cross.full, cross.down, cost_min_step2);
  return {{mv_step2.x + sx, mv_step2.y}, {mv_step2.x, mv_step2.y + sy}};
}

inline SubpelOutcome integer_outcome(const IntegerResult& ir) {
  return {ir.mv, ir.cross.full, 0, SearchPath::integer_only, std::nullopt};
}

// Steps 1-3 of the rough search.
template <CostEvaluator Eval>
SubpelOutcome rfsme_rough(Eval& eval, const IntegerResult& ir, const GateParams& params) {
  const CostCross& cross = ir.cross;
  const BlockClass cls = eval.job().block_class();
  const ScoredMv integer{ir.mv, cross.full};

  if (flatness_gate(cross, cls, params) == Flatness::flat) {
    return {ir.mv, cross.full, eval.points(), SearchPath::flat_skip, std::nullopt};
  }

  const MotionVector spatial = ir.mv + cbfps_predict(eval.job().pred_mv, ir.mv);
  const MotionVector surface = ir.mv + quad_predict(cross);
  ScoredMv step2 = eval.score(spatial);
  if (surface != spatial) {
    const ScoredMv s = eval.score(surface);
    if (better(s, step2)) step2 = s;
  }

  const ScoredMv best_step2 = better(step2, integer) ? step2 : integer;
  if (d_gate(step2.cost, cross.full, cross, cls, params) == StepGain::small) {
    return {best_step2.mv, best_step2.cost, eval.points(), SearchPath::step2_stop, step2.mv};
  }

  const BilinearPicks picks = bilinear_select(step2.mv, std::min(step2.cost, cross.full), ir.mv, cross);
  ScoredMv best = best_step2;
  for (MotionVector mv : {picks.horizontal, picks.vertical}) {
    const ScoredMv s = eval.score(mv);
    if (better(s, best)) best = s;
  }
  return {best.mv, best.cost, eval.points(), SearchPath::step3, step2.mv};
}

inline constexpr std::array<MotionVector, 8> kEightNeighbours = {
    MotionVector{-1, -1}, MotionVector{0, -1}, MotionVector{1, -1}, MotionVector{-1, 0},
    MotionVector{1, 0},   MotionVector{-1, 1}, MotionVector{0, 1},  MotionVector{1, 1}};

// Step 5: eight quarter-pel neighbours around the rough MV.
template <CostEvaluator Eval>
SubpelOutcome rfsme_refine(Eval& eval, const SubpelOutcome& rough) {
  ScoredMv best{rough.mv, rough.cost};
  for (MotionVector d : kEightNeighbours) {
    const ScoredMv s = eval.score(rough.mv + d);
    if (better(s, best)) best = s;
  }
  return {best.mv, best.cost, eval.points(), SearchPath::refined, rough.mv_step2};
}

template <CostEvaluator Eval>
SubpelOutcome full_sub(Eval& eval, const IntegerResult& ir) {
  ScoredMv best{ir.mv, ir.cross.full};
  for (MotionVector d : kEightNeighbours) {
    const ScoredMv s = eval.score(ir.mv + MotionVector{2 * d.x, 2 * d.y});
    if (better(s, best)) best = s;
  }
  const MotionVector half = best.mv;
  for (MotionVector d : kEightNeighbours) {
    const ScoredMv s = eval.score(half + d);
    if (better(s, best)) best = s;
  }
  return {best.mv, best.cost, eval.points(), SearchPath::full, std::nullopt};
}

inline constexpr std::array<MotionVector, 4> kDiamond = {MotionVector{0, -1}, MotionVector{-1, 0}, MotionVector{1, 0},
                                                         MotionVector{0, 1}};
inline constexpr int kDiamondIterations = 3;

// Greedy quarter-pel diamond walk from best_int + start_offset, at most three
// moves, confined to the +-3 quarter-pel box around the integer MV. The
// integer MV stays a candidate for the final answer.
template <CostEvaluator Eval>
SubpelOutcome diamond_descent(Eval& eval, const IntegerResult& ir, MotionVector start_offset) {
  ScoredMv centre = eval.score(ir.mv + start_offset);
  for (int it = 0; it < kDiamondIterations; ++it) {
    ScoredMv best = centre;
    for (MotionVector d : kDiamond) {
      const MotionVector mv = centre.mv + d;
      if (std::abs(mv.x - ir.mv.x) > 3 || std::abs(mv.y - ir.mv.y) > 3) continue;
      const ScoredMv s = eval.score(mv);
      if (better(s, best)) best = s;
    }
    if (best.mv == centre.mv) break;
    centre = best;
  }
  const ScoredMv integer{ir.mv, ir.cross.full};
  const ScoredMv out = better(centre, integer) ? centre : integer;
  return {out.mv, out.cost, eval.points(), SearchPath::descent, std::nullopt};
}

template <CostEvaluator Eval>
SubpelOutcome cbfps_search(Eval& eval, const IntegerResult& ir) {
  return diamond_descent(eval, ir, cbfps_predict(eval.job().pred_mv, ir.mv));
}

template <CostEvaluator Eval>
SubpelOutcome fpme_search(Eval& eval, const IntegerResult& ir) {
  return diamond_descent(eval, ir, quad_predict(ir.cross));
}

// Per-partition search run before mode decision.
template <CostEvaluator Eval>
SubpelOutcome search_before_mode_decision(Strategy s, Eval& eval, const IntegerResult& ir,
                                                 const GateParams& params) {
  switch (s) {
    case Strategy::full: return full_sub(eval, ir);
    case Strategy::cbfps: return cbfps_search(eval, ir);
    case Strategy::fpme: return fpme_search(eval, ir);
    case Strategy::ie_sme: return integer_outcome(ir);
    case Strategy::rfsme: return rfsme_rough(eval, ir, params);
  }
  return integer_outcome(ir);
}

// Search run on the winning partitions after mode decision, if any.
template <CostEvaluator Eval>
std::optional<SubpelOutcome> search_after_mode_decision(Strategy s, Eval& eval,
                                                               const IntegerResult& ir, const SubpelOutcome& rough) {
  switch (s) {
    case Strategy::rfsme: return rfsme_refine(eval, rough);
    case Strategy::ie_sme: return full_sub(eval, ir);
    default: return std::nullopt;
  }
}

}  // namespace subme
