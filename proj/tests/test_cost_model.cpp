#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "subme/cost_model.hpp"
#include "test_support.hpp"

namespace subme {
namespace {

TEST(Sad, IdenticalBlocksIsZero) {
  const LumaPlane p = test::random_plane(8, 8, 1);
  EXPECT_EQ(sad(BlockView::of(p, 0, 0, 8, 8), BlockView::of(p, 0, 0, 8, 8)), 0);
}

TEST(Sad, ZerosVersusOnes) {
  const std::vector<std::uint8_t> zeros(16, 0), ones(16, 1);
  EXPECT_EQ(sad(BlockView::of(zeros, 4, 4), BlockView::of(ones, 4, 4)), 16);
}

TEST(Sad, MatchesScalarLoopOnRandomBlocks) {
  std::mt19937 rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const LumaPlane a = test::random_plane(8, 8, rng());
    const LumaPlane b = test::random_plane(8, 8, rng());
    Cost expect = 0;
    for (int y = 0; y < 8; ++y) {
      for (int x = 0; x < 8; ++x) expect += std::abs(a.at(x, y) - b.at(x, y));
    }
    ASSERT_EQ(sad(BlockView::of(a, 0, 0, 8, 8), BlockView::of(b, 0, 0, 8, 8)), expect);
  }
}

TEST(Sad, StridedViewOfLargerPlane) {
  const LumaPlane big = test::random_plane(32, 32, 2);
  std::vector<std::uint8_t> copy;
  for (int y = 5; y < 13; ++y) {
    for (int x = 3; x < 7; ++x) copy.push_back(big.at(x, y));
  }
  EXPECT_EQ(sad(BlockView::of(big, 3, 5, 4, 8), BlockView::of(copy, 4, 8)), 0);
}

TEST(Sad, DimensionMismatchThrows) {
  const std::vector<std::uint8_t> a(16), b(32);
  EXPECT_THROW(sad(BlockView::of(a, 4, 4), BlockView::of(b, 8, 4)), std::invalid_argument);
}

TEST(MvBits, HandEvaluatedLengths) {
  EXPECT_EQ(se_code_length(0), 1);
  EXPECT_EQ(se_code_length(1), 3);
  EXPECT_EQ(se_code_length(-1), 3);
  EXPECT_EQ(se_code_length(2), 5);
  EXPECT_EQ(se_code_length(-2), 5);
  EXPECT_EQ(se_code_length(4), 7);
  EXPECT_EQ(mv_bits({3, 7}, {3, 7}), 2);
  EXPECT_EQ(mv_bits({1, -1}, {0, 0}), 6);
  EXPECT_EQ(mv_bits({6, 4}, {4, 4}), 6);
}

TEST(MvBits, SymmetricAndMonotone) {
  for (int v = 0; v < 300; ++v) {
    ASSERT_EQ(se_code_length(v), se_code_length(-v));
    ASSERT_LE(se_code_length(v), se_code_length(v + 1));
  }
}

TEST(MvBits, MatchesCodeNumDefinition) {
  // length = 2 * floor(log2(k + 1)) + 1 with k the se() code number
  for (int v = -500; v <= 500; ++v) {
    const int k = v > 0 ? 2 * v - 1 : -2 * v;
    const int expect = 2 * static_cast<int>(std::floor(std::log2(k + 1.0))) + 1;
    ASSERT_EQ(se_code_length(v), expect) << v;
  }
}

TEST(Lambda, Qp28Value) {
  const LambdaModel l = LambdaModel::from_qp(28);
  EXPECT_NEAR(l.lambda_motion, 5.854, 5e-4);
}

TEST(Cost, ZeroSadAtPredictor) {
  EXPECT_EQ(cost(0, {8, 4}, {8, 4}, LambdaModel::from_qp(28)), 12);
}

TEST(Cost, ZeroLambdaIsSad) {
  const LambdaModel l = LambdaModel::fixed(0.0);
  for (int x = -20; x <= 20; x += 3) EXPECT_EQ(cost(77, {x, -x}, {0, 0}, l), 77);
}

TEST(Cost, SadPlusRoundedRate) {
  EXPECT_EQ(cost(100, {1, -1}, {0, 0}, LambdaModel::fixed(5.854)), 135);
}

TEST(Cost, MonotoneInSad) {
  const LambdaModel l = LambdaModel::from_qp(30);
  for (Cost s = 0; s < 200; ++s) ASSERT_LT(cost(s, {5, 2}, {0, 0}, l), cost(s + 1, {5, 2}, {0, 0}, l));
}

TEST(Cost, ArgminInvariantUnderCommonScaling) {
  // argmin over candidates of SAD + lambda*R is unchanged when SAD and lambda
  // scale by the same positive factor; checked with exact integer arithmetic.
  std::mt19937 rng(17);
  std::uniform_int_distribution<int> sad_d(0, 2000), comp(-40, 40), lam(1, 20), scale(1, 9);
  for (int trial = 0; trial < 300; ++trial) {
    const MotionVector pred{comp(rng), comp(rng)};
    std::vector<std::pair<MotionVector, Cost>> cands;
    for (int i = 0; i < 12; ++i) cands.push_back({{comp(rng), comp(rng)}, sad_d(rng)});
    const Cost lambda = lam(rng);
    const Cost k = scale(rng);
    auto argmin = [&](Cost mult) {
      std::size_t best = 0;
      auto value = [&](std::size_t i) { return mult * cands[i].second + mult * lambda * mv_bits(cands[i].first, pred); };
      for (std::size_t i = 1; i < cands.size(); ++i) {
        if (value(i) < value(best)) best = i;
      }
      return best;
    };
    ASSERT_EQ(argmin(1), argmin(k));
  }
}

TEST(PredictMv, AllNeighboursEqual) {
  const NeighborMv n{{4, -8}, true};
  EXPECT_EQ(predict_mv(n, n, n), (MotionVector{4, -8}));
}

TEST(PredictMv, ComponentWiseMedian) {
  EXPECT_EQ(predict_mv({{0, 0}, true}, {{4, 0}, true}, {{8, 4}, true}), (MotionVector{4, 0}));
  EXPECT_EQ(predict_mv({{9, -3}, true}, {{-2, 7}, true}, {{4, 1}, true}), (MotionVector{4, 1}));
}

TEST(PredictMv, NoNeighbours) { EXPECT_EQ(predict_mv({}, {}, {}), (MotionVector{0, 0})); }

TEST(PredictMv, OnlyLeftAvailableUsesLeft) {
  EXPECT_EQ(predict_mv({{12, -5}, true}, {}, {}), (MotionVector{12, -5}));
}

TEST(PredictMv, MissingNeighbourCountsAsZero) {
  // left unavailable, top (8,8), top-right (4,-4): median(0,8,4)=4, median(0,8,-4)=0
  EXPECT_EQ(predict_mv({}, {{8, 8}, true}, {{4, -4}, true}), (MotionVector{4, 0}));
}

}  // namespace
}  // namespace subme
