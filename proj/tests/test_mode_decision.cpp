#include <gtest/gtest.h>

#include <map>
#include <random>
#include <tuple>

#include "subme/mode_decision.hpp"
#include "test_support.hpp"

namespace subme {
namespace {

SearchParams params_for(Strategy s, int range = 8) {
  SearchParams p;
  p.strategy = s;
  p.range = range;
  return p;
}

// cur rows [0, split) move by (-top_dx) px relative to ref, rows below by (-bottom_dx).
LumaPlane split_motion(const LumaPlane& ref, int split, int top_dx, int bottom_dx) {
  const LumaPlane top = test::translated(ref, top_dx, 0);
  const LumaPlane bottom = test::translated(ref, bottom_dx, 0);
  LumaPlane out(ref.width(), ref.height());
  for (int y = 0; y < ref.height(); ++y) {
    for (int x = 0; x < ref.width(); ++x) out.at(x, y) = y < split ? top.at(x, y) : bottom.at(x, y);
  }
  return out;
}

// Mode decision recomputed from the traces: chosen-reference rough COSTs,
// per-quadrant sub-mode argmin, then MB-mode argmin; ties keep the earlier entry.
std::tuple<MbMode, Cost> recomputed_decision(const MbModeResult& mb) {
  std::array<Cost, 4> mode_cost{};
  std::map<int, std::array<Cost, 4>> quad;  // per-quadrant sums, indexed by sub-mode
  for (const PartitionTrace& t : mb.traces) {
    if (!t.chosen_ref) continue;
    if (t.mode != MbMode::p8x8) {
      mode_cost[static_cast<std::size_t>(t.mode)] += t.rough.cost;
    } else {
      const int q = (t.job.off_y / 8) * 2 + t.job.off_x / 8;
      quad[q][static_cast<std::size_t>(*t.sub_mode)] += t.rough.cost;
    }
  }
  for (auto& [key, sums] : quad) {
    Cost best = sums[0];
    for (std::size_t s = 1; s < 4; ++s) best = sums[s] < best ? sums[s] : best;
    mode_cost[3] += best;
  }
  std::size_t win = 0;
  for (std::size_t m = 1; m < 4; ++m) {
    if (mode_cost[m] < mode_cost[win]) win = m;
  }
  return {kMbModes[win], mode_cost[win]};
}

TEST(ModeLayout, PartitionsTileTheMacroblock) {
  for (MbMode m : kMbModes) {
    int area = 0;
    for (const Geometry& g : mode_layout(m)) area += g.width * g.height;
    EXPECT_EQ(area, 256);
  }
  for (SubMode s : kSubModes) {
    int area = 0;
    for (const Geometry& g : sub_mode_layout(s, 8, 0)) {
      area += g.width * g.height;
      EXPECT_TRUE(valid_partition_size(g.width, g.height));
      EXPECT_GE(g.off_x, 8);
    }
    EXPECT_EQ(area, 64);
  }
}

TEST(EstimateMb, StaticMacroblockPicks16x16AtZero) {
  const LumaPlane p = test::smooth_plane(48, 48, 1);
  const PaddedReference ref(p, 8);
  const ReferenceList refs{std::cref(ref)};
  const MvField field(48, 48);
  for (Strategy s : kAllStrategies) {
    const MbModeResult mb = estimate_mb(p, refs, field, 16, 16, params_for(s));
    EXPECT_EQ(mb.mode, MbMode::p16x16) << to_string(s);
    ASSERT_EQ(mb.partitions.size(), 1u);
    EXPECT_EQ(mb.partitions[0].mv, (MotionVector{0, 0}));
  }
}

TEST(EstimateMb, OpposingHalvesPick16x8) {
  const LumaPlane ref_plane = test::smooth_plane(64, 64, 2);
  const LumaPlane cur = split_motion(ref_plane, 24, -8, 8);  // top samples ref at +8 px, bottom at -8 px
  const PaddedReference ref(ref_plane, 16);
  const ReferenceList refs{std::cref(ref)};
  const MvField field(64, 64);
  for (Strategy s : kAllStrategies) {
    const MbModeResult mb = estimate_mb(cur, refs, field, 16, 16, params_for(s, 16));
    EXPECT_EQ(mb.mode, MbMode::p16x8) << to_string(s);
    EXPECT_EQ(std::get<0>(recomputed_decision(mb)), MbMode::p16x8);
    ASSERT_EQ(mb.partitions.size(), 2u);
    EXPECT_EQ(mb.partitions[0].mv, (MotionVector{32, 0})) << to_string(s);
    EXPECT_EQ(mb.partitions[1].mv, (MotionVector{-32, 0})) << to_string(s);
    EXPECT_EQ(mb.partitions[0].cost, cost(0, {32, 0}, {0, 0}, LambdaModel::from_qp(28)));
  }
}

TEST(EstimateMb, PredictorFollowsCausalNeighbours) {
  const LumaPlane ref_plane = test::smooth_plane(48, 48, 2);
  const LumaPlane cur = split_motion(ref_plane, 8, -2, 2);
  const PaddedReference ref(ref_plane, 8);
  const ReferenceList refs{std::cref(ref)};
  const MvField field(48, 48);
  const MbModeResult mb = estimate_mb(cur, refs, field, 0, 0, params_for(Strategy::full));
  for (const PartitionTrace& t : mb.traces) {
    if (t.mode != MbMode::p16x8) continue;
    if (t.job.off_y == 0) {
      EXPECT_EQ(t.rough.mv, (MotionVector{8, 0}));
    }
    // second partition: only the top neighbour (8, 0) exists, so median(0, 8, 0)
    EXPECT_EQ(t.job.pred_mv, (MotionVector{0, 0}));
  }
  MvField decided(48, 48);
  decided.fill(0, 0, 4, 4, {12, -4});
  const MbModeResult right = estimate_mb(cur, refs, decided, 16, 0, params_for(Strategy::full));
  EXPECT_EQ(right.traces.front().job.pred_mv, (MotionVector{12, -4}));  // left only
}

TEST(EstimateMb, ModeChoiceIsArgminOfSummedCosts) {
  std::mt19937 rng(5);
  std::uniform_int_distribution<int> m(-3, 3);
  for (int trial = 0; trial < 6; ++trial) {
    const LumaPlane ref_plane = test::smooth_plane(64, 64, rng());
    const LumaPlane cur = split_motion(ref_plane, 20 + trial, m(rng), m(rng));
    const PaddedReference ref(ref_plane, 8);
    const ReferenceList refs{std::cref(ref)};
    for (Strategy s : kAllStrategies) {
      const FrameResult fr = estimate_frame(cur, refs, params_for(s));
      for (const MbModeResult& mb : fr.mbs) {
        const auto [mode, total] = recomputed_decision(mb);
        ASSERT_EQ(mb.mode, mode) << to_string(s);
        ASSERT_EQ(mb.total_rough_cost, total);
        Cost final_total = 0;
        for (const FinalPartition& p : mb.partitions) final_total += p.cost;
        ASSERT_EQ(mb.total_final_cost, final_total);
        ASSERT_LE(mb.total_final_cost, mb.total_rough_cost);
      }
    }
  }
}

TEST(EstimateMb, OnlyTheWinningModeIsRefined) {
  const LumaPlane ref_plane = test::smooth_plane(48, 48, 9);
  const LumaPlane cur = split_motion(ref_plane, 21, -1, 1);
  const PaddedReference ref(ref_plane, 8);
  const ReferenceList refs{std::cref(ref)};
  const MvField field(48, 48);
  for (Strategy s : {Strategy::rfsme, Strategy::ie_sme}) {
    const MbModeResult mb = estimate_mb(cur, refs, field, 16, 16, params_for(s));
    int winners = 0;
    for (const PartitionTrace& t : mb.traces) {
      EXPECT_EQ(t.precise.has_value(), t.winner);
      if (t.winner) {
        ++winners;
        EXPECT_EQ(t.mode, mb.mode);
      }
    }
    EXPECT_EQ(winners, static_cast<int>(mb.partitions.size()));
    EXPECT_EQ(mb.refined_partitions, winners);
  }
  for (Strategy s : {Strategy::full, Strategy::cbfps, Strategy::fpme}) {
    const MbModeResult mb = estimate_mb(cur, refs, field, 16, 16, params_for(s));
    EXPECT_EQ(mb.refined_partitions, 0);
  }
}

TEST(EstimateMb, PointTotalsPerStrategy) {
  const LumaPlane ref_plane = test::smooth_plane(48, 48, 4);
  const LumaPlane cur = split_motion(ref_plane, 19, 1, -1);
  const PaddedReference ref(ref_plane, 8);
  const ReferenceList refs{std::cref(ref)};
  const MvField field(48, 48);
  // 1 + 2 + 2 + 4 * (1 + 2 + 2 + 4) partitions
  constexpr int kPartitionsPerMb = 41;

  const MbModeResult full = baseline_estimate_mb(cur, refs, field, 16, 16, params_for(Strategy::full));
  EXPECT_EQ(full.traces.size(), static_cast<std::size_t>(kPartitionsPerMb));
  EXPECT_EQ(full.points, 16 * kPartitionsPerMb);

  const MbModeResult ie = estimate_mb(cur, refs, field, 16, 16, params_for(Strategy::ie_sme));
  EXPECT_EQ(ie.points, 16 * ie.refined_partitions);

  const MbModeResult rf = estimate_mb(cur, refs, field, 16, 16, params_for(Strategy::rfsme));
  int rough = 0;
  int precise = 0;
  for (const PartitionTrace& t : rf.traces) {
    EXPECT_LE(t.rough_points(), 4);
    EXPECT_LE(t.precise_points(), 8);
    rough += t.rough_points();
    precise += t.precise_points();
  }
  EXPECT_EQ(rf.points, rough + precise);
}

TEST(EstimateMb, RoughOnEveryReferencePreciseOnlyOnChosen) {
  const LumaPlane p = test::smooth_plane(48, 48, 3);
  const PaddedReference r0(p, 8);
  const PaddedReference r1(p, 8);
  const PaddedReference r2(p, 8);
  const ReferenceList refs{std::cref(r0), std::cref(r1), std::cref(r2)};
  const MvField field(48, 48);
  const MbModeResult mb = estimate_mb(p, refs, field, 16, 16, params_for(Strategy::rfsme));
  EXPECT_EQ(mb.traces.size(), 3u * 41u);
  for (const PartitionTrace& t : mb.traces) {
    EXPECT_EQ(t.chosen_ref, t.job.ref_index == 0);  // identical references tie toward the nearest
    if (t.precise) {
      EXPECT_EQ(t.job.ref_index, 0);
    }
  }
  EXPECT_EQ(mb.refined_partitions, 1);
}

TEST(EstimateMb, BestReferenceByRoughCost) {
  const LumaPlane base = test::smooth_plane(48, 48, 21);
  const LumaPlane cur = test::translated(base, 1, 0);
  const LumaPlane noisy = test::random_plane(48, 48, 22);
  const PaddedReference far_match(base, 8);
  const PaddedReference unrelated(noisy, 8);
  const ReferenceList refs{std::cref(unrelated), std::cref(far_match)};
  const MvField field(48, 48);
  const MbModeResult mb = estimate_mb(cur, refs, field, 16, 16, params_for(Strategy::rfsme));
  for (const FinalPartition& fp : mb.partitions) EXPECT_EQ(fp.job.ref_index, 1);
  EXPECT_EQ(mb.partitions.front().mv, (MotionVector{-4, 0}));
}

TEST(BaselineEstimateMb, RejectsTwoPhaseStrategies) {
  const LumaPlane p = test::smooth_plane(32, 32, 3);
  const PaddedReference ref(p, 8);
  const ReferenceList refs{std::cref(ref)};
  const MvField field(32, 32);
  EXPECT_THROW(baseline_estimate_mb(p, refs, field, 0, 0, params_for(Strategy::rfsme)), std::invalid_argument);
  EXPECT_THROW(baseline_estimate_mb(p, refs, field, 0, 0, params_for(Strategy::ie_sme)), std::invalid_argument);
  EXPECT_NO_THROW(baseline_estimate_mb(p, refs, field, 0, 0, params_for(Strategy::cbfps)));
}

TEST(EstimateFrame, PredictionMatchesDecidedVectors) {
  const LumaPlane ref_plane = test::smooth_plane(48, 32, 8);
  const LumaPlane cur = split_motion(ref_plane, 13, 1, -2);
  const PaddedReference ref(ref_plane, 8);
  const ReferenceList refs{std::cref(ref)};
  const FrameResult fr = estimate_frame(cur, refs, params_for(Strategy::rfsme));
  ASSERT_EQ(fr.mbs.size(), 6u);
  for (const MbModeResult& mb : fr.mbs) {
    for (const FinalPartition& p : mb.partitions) {
      const QuarterPos o = p.job.quarter_origin();
      const auto block = fetch_block(ref, {o.x + p.mv.x, o.y + p.mv.y}, p.job.width, p.job.height);
      for (int r = 0; r < p.job.height; ++r) {
        for (int c = 0; c < p.job.width; ++c) {
          ASSERT_EQ(fr.prediction.at(p.job.x() + c, p.job.y() + r), block[static_cast<std::size_t>(r * p.job.width + c)]);
        }
      }
    }
  }
}

TEST(EstimateFrame, RejectsBadGeometry) {
  const LumaPlane odd(40, 32);
  const LumaPlane ok(48, 32);
  const PaddedReference small(LumaPlane(32, 32), 8);
  const PaddedReference okref(ok, 8);
  EXPECT_THROW(estimate_frame(odd, ReferenceList{std::cref(small)}, params_for(Strategy::full)), std::invalid_argument);
  EXPECT_THROW(estimate_frame(ok, ReferenceList{std::cref(small)}, params_for(Strategy::full)), std::invalid_argument);
  EXPECT_THROW(estimate_frame(ok, ReferenceList{}, params_for(Strategy::full)), std::invalid_argument);
}

}  // namespace
}  // namespace subme
