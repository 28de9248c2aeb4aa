#pragma once

// Macroblock mode decision with a two-phase sub-pel flow:
//   1. every partition of every mode, on every reference: integer full search
//      followed by the strategy's pre-decision search
//   2. per partition: best reference by COST; per 8x8: best sub-mode by summed
//      COST; per MB: best of 16x16 / 16x8 / 8x16 / P8x8 by summed COST
//   3. the strategy's post-decision search (if any) on the winning
//      partitions only, each on its own chosen reference
//
// pred_mv follows causal scan order: left, top and top-right 4x4 neighbours
// taken from already-decided macroblocks or from partitions already
// estimated inside the current mode.

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "subme/cost_model.hpp"
#include "subme/integer_me.hpp"
#include "subme/interpolation.hpp"
#include "subme/luma_plane.hpp"
#include "subme/subpel.hpp"

namespace subme {

enum class MbMode { p16x16, p16x8, p8x16, p8x8 };
enum class SubMode { s8x8, s8x4, s4x8, s4x4 };

inline constexpr std::array<MbMode, 4> kMbModes = {MbMode::p16x16, MbMode::p16x8, MbMode::p8x16, MbMode::p8x8};
inline constexpr std::array<SubMode, 4> kSubModes = {SubMode::s8x8, SubMode::s8x4, SubMode::s4x8, SubMode::s4x4};

constexpr std::string_view to_string(MbMode m) {
  switch (m) {
    case MbMode::p16x16: return "16x16";
    case MbMode::p16x8: return "16x8";
    case MbMode::p8x16: return "8x16";
    case MbMode::p8x8: return "8x8";
  }
  return "?";
}

struct Geometry {
  int off_x = 0;
  int off_y = 0;
  int width = 16;
  int height = 16;
};

// Partitions of a macroblock mode in scan order. P8x8 yields its four 8x8
// quadrants; their content comes from sub_mode_layout.
inline std::vector<Geometry> mode_layout(MbMode m) {
  switch (m) {
    case MbMode::p16x16: return {{0, 0, 16, 16}};
    case MbMode::p16x8: return {{0, 0, 16, 8}, {0, 8, 16, 8}};
    case MbMode::p8x16: return {{0, 0, 8, 16}, {8, 0, 8, 16}};
    case MbMode::p8x8: return {{0, 0, 8, 8}, {8, 0, 8, 8}, {0, 8, 8, 8}, {8, 8, 8, 8}};
  }
  return {};
}

inline std::vector<Geometry> sub_mode_layout(SubMode s, int ox, int oy) {
  switch (s) {
    case SubMode::s8x8: return {{ox, oy, 8, 8}};
    case SubMode::s8x4: return {{ox, oy, 8, 4}, {ox, oy + 4, 8, 4}};
    case SubMode::s4x8: return {{ox, oy, 4, 8}, {ox + 4, oy, 4, 8}};
    case SubMode::s4x4: return {{ox, oy, 4, 4}, {ox + 4, oy, 4, 4}, {ox, oy + 4, 4, 4}, {ox + 4, oy + 4, 4, 4}};
  }
  return {};
}

// Decided MVs of the current frame at 4x4 granularity.
class MvField {
 public:
  MvField(int width, int height) : cols_(width / 4), rows_(height / 4), mvs_(static_cast<std::size_t>(cols_) * rows_) {}

  int cols() const { return cols_; }
  int rows() const { return rows_; }
  MotionVector at(int bx, int by) const { return mvs_[static_cast<std::size_t>(by) * cols_ + bx]; }
  void fill(int bx, int by, int bw, int bh, MotionVector mv) {
    for (int y = by; y < by + bh; ++y) {
      for (int x = bx; x < bx + bw; ++x) mvs_[static_cast<std::size_t>(y) * cols_ + x] = mv;
    }
  }

 private:
  int cols_;
  int rows_;
  std::vector<MotionVector> mvs_;
};

// MVs assigned so far inside the macroblock being decided, one per 4x4.
struct LocalMvMap {
  std::array<std::optional<MotionVector>, 16> mvs{};

  void fill(const Geometry& g, MotionVector mv) {
    for (int y = g.off_y / 4; y < (g.off_y + g.height) / 4; ++y) {
      for (int x = g.off_x / 4; x < (g.off_x + g.width) / 4; ++x) mvs[static_cast<std::size_t>(y * 4 + x)] = mv;
    }
  }
};

using ReferenceList = std::vector<std::reference_wrapper<const PaddedReference>>;

struct SearchParams {
  Strategy strategy = Strategy::rfsme;
  LambdaModel lambda = LambdaModel::from_qp(28);
  GateParams gates;
  int range = 16;
  bool audit = false;  // brute-force sub-pel oracle per partition (slow)
};

// One (partition, reference) evaluation.
struct PartitionTrace {
  MbMode mode = MbMode::p16x16;
  std::optional<SubMode> sub_mode;
  PartitionJob job;
  IntegerResult integer;
  SubpelOutcome rough;
  std::optional<SubpelOutcome> precise;
  bool chosen_ref = false;
  bool winner = false;
  std::optional<MotionVector> oracle_best;

  const SubpelOutcome& final_outcome() const { return precise ? *precise : rough; }
  int rough_points() const { return rough.points; }
  int precise_points() const { return precise ? precise->points - rough.points : 0; }
};

struct FinalPartition {
  PartitionJob job;
  MotionVector mv;
  Cost cost = 0;
};

struct MbModeResult {
  int mb_x = 0;
  int mb_y = 0;
  MbMode mode = MbMode::p16x16;
  std::array<SubMode, 4> sub_modes{};
  std::vector<FinalPartition> partitions;
  Cost total_rough_cost = 0;
  Cost total_final_cost = 0;
  int points = 0;
  int refined_partitions = 0;
  std::vector<PartitionTrace> traces;
};

// Brute-force best MV over the 7x7 quarter-pel box around an integer MV
// (the integer centre and its 48 sub-pel positions). Audit use only.
inline MotionVector brute_force_subpel_best(const LumaPlane& cur, const PaddedReference& ref, const PartitionJob& job,
                                            const LambdaModel& lambda, MotionVector integer_mv) {
  std::vector<std::uint8_t> scratch;
  ScoredMv best{integer_mv, evaluate_cost(cur, ref, job, lambda, integer_mv, scratch)};
  for (int dy = -3; dy <= 3; ++dy) {
    for (int dx = -3; dx <= 3; ++dx) {
      const MotionVector mv = integer_mv + MotionVector{dx, dy};
      const ScoredMv s{mv, evaluate_cost(cur, ref, job, lambda, mv, scratch)};
      if (better(s, best)) best = s;
    }
  }
  return best.mv;
}

class MacroblockEstimator {
 public:
  MacroblockEstimator(const LumaPlane& cur, const ReferenceList& refs, const MvField& field, int mb_x, int mb_y,
                      const SearchParams& params)
      : cur_(cur), refs_(refs), field_(field), mb_x_(mb_x), mb_y_(mb_y), params_(params) {
    if (refs.empty()) throw std::invalid_argument("estimate_mb: no reference frames");
    tables_.reserve(refs.size());
    for (const PaddedReference& r : refs) tables_.emplace_back(cur, r, mb_x, mb_y, kMbSize, kMbSize, params.range);
  }

  MbModeResult run() {
    MbModeResult out;
    out.mb_x = mb_x_;
    out.mb_y = mb_y_;

    std::array<ModeEstimate, 4> modes;
    for (MbMode m : kMbModes) modes[static_cast<std::size_t>(m)] = estimate_mode(m);

    std::size_t win = 0;
    for (std::size_t i = 1; i < modes.size(); ++i) {
      if (modes[i].cost < modes[win].cost) win = i;
    }
    out.mode = kMbModes[win];
    out.sub_modes = modes[win].sub_modes;
    out.total_rough_cost = modes[win].cost;

    for (std::size_t m = 0; m < modes.size(); ++m) {
      for (std::size_t p = 0; p < modes[m].partitions.size(); ++p) {
        PartitionEstimate& pe = modes[m].partitions[p];
        const bool winner = m == win && pe.in_winning_sub_mode;
        for (std::size_t r = 0; r < pe.per_ref.size(); ++r) {
          Candidate& c = pe.per_ref[r];
          PartitionTrace t;
          t.mode = kMbModes[m];
          t.sub_mode = pe.sub_mode;
          t.job = c.job;
          t.integer = c.integer;
          t.rough = c.rough;
          t.chosen_ref = r == pe.chosen;
          t.winner = winner && t.chosen_ref;
          if (t.winner) {
            t.precise = search_after_mode_decision(params_.strategy, c.eval, c.integer, c.rough);
            const SubpelOutcome& fin = t.final_outcome();
            out.partitions.push_back({c.job, fin.mv, fin.cost});
            out.total_final_cost += fin.cost;
            if (t.precise) ++out.refined_partitions;
          }
          if (params_.audit && c.rough.mv_step2) {
            t.oracle_best = brute_force_subpel_best(cur_, refs_[r], c.job, params_.lambda, c.integer.mv);
          }
          out.points += t.final_outcome().points;
          out.traces.push_back(std::move(t));
        }
      }
    }
    return out;
  }

 private:
  struct Candidate {
    PartitionJob job;
    IntegerResult integer;
    SubpelEvaluator eval;
    SubpelOutcome rough;
  };

  struct PartitionEstimate {
    Geometry geometry;
    std::optional<SubMode> sub_mode;
    std::vector<Candidate> per_ref;
    std::size_t chosen = 0;
    bool in_winning_sub_mode = true;

    const SubpelOutcome& best() const { return per_ref[chosen].rough; }
  };

  struct ModeEstimate {
    Cost cost = 0;
    std::array<SubMode, 4> sub_modes{};
    std::vector<PartitionEstimate> partitions;
  };

  NeighborMv neighbour(int bx, int by, const LocalMvMap& local) const {
    if (bx < 0 || by < 0 || bx >= field_.cols() || by >= field_.rows()) return {};
    const int mbx4 = mb_x_ / 4;
    const int mby4 = mb_y_ / 4;
    if (bx >= mbx4 && bx < mbx4 + 4 && by >= mby4 && by < mby4 + 4) {
      const auto& mv = local.mvs[static_cast<std::size_t>((by - mby4) * 4 + (bx - mbx4))];
      return mv ? NeighborMv{*mv, true} : NeighborMv{};
    }
    // Raster MB order: rows above, or the same row to the left.
    const int nmb_x = bx / 4;
    const int nmb_y = by / 4;
    const bool decided = nmb_y < mby4 / 4 || (nmb_y == mby4 / 4 && nmb_x < mbx4 / 4);
    return decided ? NeighborMv{field_.at(bx, by), true} : NeighborMv{};
  }

  MotionVector pred_mv_for(const Geometry& g, const LocalMvMap& local) const {
    const int bx = (mb_x_ + g.off_x) / 4;
    const int by = (mb_y_ + g.off_y) / 4;
    return predict_mv(neighbour(bx - 1, by, local), neighbour(bx, by - 1, local),
                      neighbour(bx + g.width / 4, by - 1, local));
  }

  PartitionEstimate estimate_partition(const Geometry& g, LocalMvMap& local) {
    PartitionEstimate pe;
    pe.geometry = g;
    const MotionVector pred = pred_mv_for(g, local);
    pe.per_ref.reserve(refs_.size());
    for (std::size_t r = 0; r < refs_.size(); ++r) {
      PartitionJob job{mb_x_, mb_y_, g.off_x, g.off_y, g.width, g.height, static_cast<int>(r), pred};
      const IntegerResult ir = full_search(job, tables_[r], params_.lambda);
      SubpelEvaluator eval(cur_, refs_[r], job, params_.lambda);
      const SubpelOutcome rough = search_before_mode_decision(params_.strategy, eval, ir, params_.gates);
      pe.per_ref.push_back({job, ir, std::move(eval), rough});
      if (rough.cost < pe.per_ref[pe.chosen].rough.cost) pe.chosen = r;
    }
    local.fill(g, pe.best().mv);
    return pe;
  }

  ModeEstimate estimate_mode(MbMode m) {
    ModeEstimate me;
    LocalMvMap local;
    if (m != MbMode::p8x8) {
      for (const Geometry& g : mode_layout(m)) {
        me.partitions.push_back(estimate_partition(g, local));
        me.cost += me.partitions.back().best().cost;
      }
      return me;
    }
    const auto quadrants = mode_layout(MbMode::p8x8);
    for (std::size_t q = 0; q < quadrants.size(); ++q) {
      std::array<std::vector<PartitionEstimate>, 4> subs;
      std::array<Cost, 4> sub_cost{};
      std::array<LocalMvMap, 4> sub_local;
      for (SubMode s : kSubModes) {
        const auto si = static_cast<std::size_t>(s);
        sub_local[si] = local;
        for (const Geometry& g : sub_mode_layout(s, quadrants[q].off_x, quadrants[q].off_y)) {
          subs[si].push_back(estimate_partition(g, sub_local[si]));
          subs[si].back().sub_mode = s;
          sub_cost[si] += subs[si].back().best().cost;
        }
      }
      std::size_t best = 0;
      for (std::size_t s = 1; s < 4; ++s) {
        if (sub_cost[s] < sub_cost[best]) best = s;
      }
      me.sub_modes[q] = kSubModes[best];
      me.cost += sub_cost[best];
      local = sub_local[best];
      for (std::size_t s = 0; s < 4; ++s) {
        for (PartitionEstimate& pe : subs[s]) {
          pe.in_winning_sub_mode = s == best;
          me.partitions.push_back(std::move(pe));
        }
      }
    }
    return me;
  }

  const LumaPlane& cur_;
  const ReferenceList& refs_;
  const MvField& field_;
  int mb_x_;
  int mb_y_;
  const SearchParams& params_;
  std::vector<IntegerSadTable> tables_;
};

inline MbModeResult estimate_mb(const LumaPlane& cur, const ReferenceList& refs, const MvField& field, int mb_x,
                                int mb_y, const SearchParams& params) {
  return MacroblockEstimator(cur, refs, field, mb_x, mb_y, params).run();
}

// Single-phase flow: each partition's search is final before the mode is
// chosen; there is no post-decision pass.
inline MbModeResult baseline_estimate_mb(const LumaPlane& cur, const ReferenceList& refs, const MvField& field,
                                         int mb_x, int mb_y, const SearchParams& params) {
  if (params.strategy != Strategy::full && params.strategy != Strategy::cbfps && params.strategy != Strategy::fpme) {
    throw std::invalid_argument("baseline_estimate_mb: strategy must be full, cbfps or fpme");
  }
  return estimate_mb(cur, refs, field, mb_x, mb_y, params);
}

struct FrameResult {
  std::vector<MbModeResult> mbs;
  LumaPlane prediction;
};

// Motion-compensated prediction assembled from the decided partitions.
inline LumaPlane assemble_prediction(int width, int height, const std::vector<MbModeResult>& mbs,
                                     const ReferenceList& refs) {
  LumaPlane pred(width, height);
  std::vector<std::uint8_t> block;
  for (const MbModeResult& mb : mbs) {
    for (const FinalPartition& p : mb.partitions) {
      const QuarterPos origin = p.job.quarter_origin();
      block.resize(static_cast<std::size_t>(p.job.width) * p.job.height);
      fetch_block(refs[static_cast<std::size_t>(p.job.ref_index)], {origin.x + p.mv.x, origin.y + p.mv.y},
                  p.job.width, p.job.height, block);
      for (int r = 0; r < p.job.height; ++r) {
        for (int c = 0; c < p.job.width; ++c) {
          pred.at(p.job.x() + c, p.job.y() + r) = block[static_cast<std::size_t>(r) * p.job.width + c];
        }
      }
    }
  }
  return pred;
}

// Raster-scan estimation of one P frame.
inline FrameResult estimate_frame(const LumaPlane& cur, const ReferenceList& refs, const SearchParams& params) {
  if (!cur.mb_aligned()) throw std::invalid_argument("estimate_frame: frame not macroblock aligned");
  for (const PaddedReference& r : refs) {
    if (r.width() != cur.width() || r.height() != cur.height()) {
      throw std::invalid_argument("estimate_frame: reference dimensions differ from current frame");
    }
  }
  MvField field(cur.width(), cur.height());
  FrameResult out;
  for (int y = 0; y < cur.height(); y += kMbSize) {
    for (int x = 0; x < cur.width(); x += kMbSize) {
      MbModeResult mb = estimate_mb(cur, refs, field, x, y, params);
      for (const FinalPartition& p : mb.partitions) {
        field.fill(p.job.x() / 4, p.job.y() / 4, p.job.width / 4, p.job.height / 4, p.mv);
      }
      out.mbs.push_back(std::move(mb));
    }
  }
  out.prediction = assemble_prediction(cur.width(), cur.height(), out.mbs, refs);
  return out;
}

}  // namespace subme
