// Copyright 2026 The perceff Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "perceff/effort.hpp"

using namespace perceff;
using oracle::kin;

TEST(FpBrakeDemand, Examples)
{
  const ReachParams p;
  EXPECT_NEAR(fp_brake_demand(kin(25, 10, 0), p), 100.0 / 44.0, 1e-15);
  EXPECT_NEAR(fp_brake_demand(kin(25, 10, 0), p), 2.2727, 1e-4);
  EXPECT_EQ(fp_brake_demand(kin(25, 10, 10), p), 0.0);
  EXPECT_EQ(fp_brake_demand(kin(2.5, 10, 0), p), 10.0);
}

TEST(FpBrakeDemand, CappedAndBehind)
{
  const ReachParams p;
  EXPECT_EQ(fp_brake_demand(kin(3.5, 10, 0), p), 10.0);  // 100 / 1 = 100 -> cap
  auto k = kin(25, 10, 0);
  k.ahead = false;
  EXPECT_EQ(fp_brake_demand(k, p), 0.0);
}

TEST(FnBrakeDemand, ReducesToPhantomFormula)
{
  const ReachParams p;
  const auto k = kin(25, 10, 0);
  EXPECT_EQ(fn_brake_demand(k, p, MdrMode::kConsistent).value, fp_brake_demand(k, p));
}

TEST(FnBrakeDemand, AsPrintedAtZeroObjectAcceleration)
{
  // The literal relation carries +1/2 on the ego term, so at a_FN = 0 it
  // yields 1.5 dv^2 / D rather than dv^2 / (2 D).
  const ReachParams p;
  const auto b = fn_brake_demand(kin(25, 10, 0), p, MdrMode::kAsPrinted);
  EXPECT_FALSE(b.no_positive_root);
  EXPECT_NEAR(b.value, 1.5 * 100.0 / 22.0, 1e-12);
  EXPECT_NEAR(printed_mdr_residual(kin(25, 10, 0), p, b.value), 0.0, 1e-9);
}

TEST(FnBrakeDemand, ConsistentWithBrakingLead)
{
  const ReachParams p;
  const double dv = 10.6, d = 25 - 3 - 0.09;
  const double expected = dv * dv / (2 * d) + 2.0;
  const auto b = fn_brake_demand(kin(25, 10, 0, -2), p, MdrMode::kConsistent);
  EXPECT_NEAR(b.value, expected, 1e-12);
  EXPECT_NEAR(b.value, 4.5641, 1e-4);
}

TEST(FnBrakeDemand, DivergingIsZero)
{
  const ReachParams p;
  EXPECT_EQ(fn_brake_demand(kin(25, 8, 10, 0.5), p, MdrMode::kConsistent).value, 0.0);
  EXPECT_EQ(fn_brake_demand(kin(25, 10, 10, 0.0), p, MdrMode::kAsPrinted).value, 0.0);
}

TEST(FnBrakeDemand, ReactionDistanceExhaustedHitsCap)
{
  const ReachParams p;
  EXPECT_EQ(fn_brake_demand(kin(2.0, 10, 0, 0), p, MdrMode::kConsistent).value, 10.0);
}

TEST(FnBrakeDemand, AsPrintedNoPositiveRootIsFlagged)
{
  // accelerating lead: -1/2 a x^2 + 1.5 dv x - D has no real root when
  // 2.25 dv^2 < 2 a D
  const ReachParams p;
  const auto k = kin(50, 10, 5, 3.0);
  const auto s = solve_printed_mdr(k, p);
  EXPECT_FALSE(s.solvable);
  const auto b = fn_brake_demand(k, p, MdrMode::kAsPrinted);
  EXPECT_TRUE(b.no_positive_root);
  EXPECT_EQ(b.value, p.a_brake_max);
}

TEST(FnBrakeDemand, PropertyReductionAndCaps)
{
  const ReachParams p;
  auto g = oracle::rng(31);
  for (int i = 0; i < 2000; ++i) {
    const auto k = kin(oracle::uniform(g, 0, 80), oracle::uniform(g, 0, 35), oracle::uniform(g, 0, 35));
    const double fp = fp_brake_demand(k, p);
    const double fn = fn_brake_demand(k, p, MdrMode::kConsistent).value;
    ASSERT_NEAR(fn, fp, 1e-12);
    const double ref = oracle::phantom_brake(k.range, k.v_ego - k.v_obj_lon, p.t_react, p.a_brake_max);
    ASSERT_NEAR(fp, ref, 1e-12);

    const auto ka = kin(oracle::uniform(g, 0, 80), oracle::uniform(g, 0, 35), oracle::uniform(g, 0, 35),
                        oracle::uniform(g, -8, 4));
    for (MdrMode m : {MdrMode::kConsistent, MdrMode::kAsPrinted}) {
      const double v = fn_brake_demand(ka, p, m).value;
      ASSERT_GE(v, 0.0);
      ASSERT_LE(v, p.a_brake_max);
    }
  }
}

TEST(FnBrakeDemand, PropertyAsPrintedResidual)
{
  const ReachParams p;
  auto g = oracle::rng(32);
  int solved = 0;
  while (solved < 1000) {
    const auto k = kin(oracle::uniform(g, 1, 80), oracle::uniform(g, 0, 35), oracle::uniform(g, 0, 35),
                       oracle::uniform(g, -8, 4));
    const auto s = solve_printed_mdr(k, p);
    if (!s.solvable || s.unclamped + k.a_obj_lon == 0.0) continue;
    ++solved;
    ASSERT_LE(std::abs(printed_mdr_residual(k, p, s.unclamped)), 1e-9)
      << "R=" << k.range << " v=" << k.v_ego << " vfn=" << k.v_obj_lon << " a=" << k.a_obj_lon;
  }
}

TEST(FnBrakeDemand, PropertyMonotoneInEgoSpeed)
{
  const ReachParams p;
  auto g = oracle::rng(33);
  for (int i = 0; i < 500; ++i) {
    const double r = oracle::uniform(g, 5, 80);
    const double vo = oracle::uniform(g, 0, 20);
    const double a = oracle::uniform(g, -6, 3);
    double prev = -1.0;
    for (double v = 0.0; v <= 40.0; v += 0.25) {
      auto k = kin(r, v, vo, a);
      const double u0 = v - vo;
      if (r - u0 * p.t_react + 0.5 * a * p.t_react * p.t_react <= 0.0) break;
      const double cur = fn_brake_demand(k, p, MdrMode::kConsistent).value;
      ASSERT_GE(cur, prev - 1e-12);
      prev = cur;
    }
  }
}

TEST(LeaFrame, WideningInLane)
{
  const ReachParams p;
  const double lea = lea_frame(kin(20, 10, 0, 0, 0.7, 0.0), 2.3, 1.8, 1.8, p);
  EXPECT_NEAR(lea, 0.8, 1e-12);
}

TEST(LeaFrame, AlreadyClearAndParallel)
{
  const ReachParams p;
  EXPECT_EQ(lea_frame(kin(20, 10, 0, 0, 2.3, 0.0), 2.0, 1.8, 1.8, p), 0.0);
  EXPECT_EQ(lea_frame(kin(20, 10, 0, 0, -3.0, 0.0), 2.0, 1.8, 1.8, p), 0.0);
}

TEST(LeaFrame, ConvergingCutIn)
{
  const ReachParams p;
  const double lea = lea_frame(kin(20, 10, 0, 0, 3.0, -1.0), 2.3, 1.8, 1.8, p);
  EXPECT_NEAR(lea, 1.0, 1e-12);
}

TEST(LeaFrame, NoEvasionWindowReturnsCap)
{
  const ReachParams p;
  EXPECT_EQ(lea_frame(kin(20, 10, 0, 0, 0.0, 0.0), 0.3, 1.8, 1.8, p), 5.0);
  EXPECT_EQ(lea_frame(kin(20, 10, 0, 0, 0.0, 0.0), 0.0, 1.8, 1.8, p), 5.0);
}

TEST(LeaFrame, ZeroOffsetTieBreak)
{
  const ReachParams p;
  // d_y = 0 takes the side of the lateral velocity: moving away
  const double away = lea_frame(kin(20, 10, 0, 0, 0.0, 0.5), 2.3, 1.8, 1.8, p);
  EXPECT_NEAR(away, 2.0 * (2.3 - 1.0) / 4.0, 1e-12);
  const double still = lea_frame(kin(20, 10, 0, 0, 0.0, 0.0), 2.3, 1.8, 1.8, p);
  EXPECT_NEAR(still, 2.0 * 2.3 / 4.0, 1e-12);
}

TEST(LeaFrame, PropertyStrategyOptimalityAndCap)
{
  const ReachParams p;
  auto g = oracle::rng(34);
  for (int i = 0; i < 2000; ++i) {
    const double dy = oracle::uniform(g, -6, 6);
    const double vy = oracle::uniform(g, -3, 3);
    const double tc = oracle::uniform(g, 0, 5);
    const double w1 = oracle::uniform(g, 1.5, 2.6);
    const double w2 = oracle::uniform(g, 1.5, 2.6);
    const double lea = lea_frame(kin(20, 10, 0, 0, dy, vy), tc, w1, w2, p);
    ASSERT_GE(lea, 0.0);
    ASSERT_LE(lea, p.a_lat_cap);
    const double te = tc - p.t_react;
    if (te <= 0.0) continue;
    // independent evaluation of both strategies
    const double wc = 0.5 * (w1 + w2) + p.safety_margin;
    const double sgn = dy != 0.0 ? (dy > 0 ? 1.0 : -1.0) : (vy < 0 ? -1.0 : 1.0);
    const double c = sgn * vy;
    const double aw = 2.0 * std::max(0.0, std::max(0.0, wc - std::abs(dy)) - c * te) / (te * te);
    const double ac = 2.0 * std::max(0.0, wc + std::abs(dy) + c * te) / (te * te);
    ASSERT_LE(lea, aw + 1e-12);
    ASSERT_LE(lea, ac + 1e-12);
    ASSERT_NEAR(lea, std::min({aw, ac, p.a_lat_cap}), 1e-12);
    if (std::abs(dy) >= wc && c >= 0.0) { ASSERT_EQ(lea, 0.0); }
  }
}

namespace
{

/// One-object scene with the given per-frame object states; the ego sits at
/// the origin moving at v_ego in every frame.
Scene scene_of(const std::vector<AgentState> & objs, double v_ego)
{
  Scene s;
  s.scene_id = "s";
  for (std::size_t i = 0; i < objs.size(); ++i) {
    Frame f;
    f.timestamp = 0.5 * static_cast<double>(i);
    f.ego = oracle::agent("ego", 0, 0, v_ego, 0);
    f.detections.push_back(objs[i]);
    s.frames.push_back(f);
  }
  return s;
}

ErrorTrack track_of(const Scene & s, ErrorKind kind)
{
  ErrorTrack t;
  t.kind = kind;
  t.identity = "X";
  t.scene_id = s.scene_id;
  for (std::size_t i = 0; i < s.frames.size(); ++i) {
    const auto & o = s.frames[i].detections[0];
    t.occurrences.push_back({i, project_to_ego(s.frames[i].ego, o), o});
  }
  return t;
}

}  // namespace

TEST(ScoreTrack, PhantomOverThreeFrames)
{
  const ReachParams p;
  const auto obj = oracle::agent("X", 29.5, 0);
  const auto s = scene_of({obj, obj, obj}, 10.0);
  const auto te = score_track(track_of(s, ErrorKind::kFP), s, GateKind::kRSB, p);
  ASSERT_EQ(te.n_gated, 3u);
  EXPECT_DOUBLE_EQ(te.duration, 1.5);
  ASSERT_TRUE(te.fsr);
  EXPECT_FALSE(te.mdr);
  EXPECT_NEAR(*te.fsr, 1.5 * 100.0 / 44.0, 1e-12);
  EXPECT_NEAR(*te.fsr, 3.409, 1e-3);
  // FSR is also T_cycle times the sum of per-frame demands
  double sum = 0.0;
  for (const auto & f : te.frames) sum += f.a_brake;
  EXPECT_NEAR(*te.fsr, p.t_cycle * sum, 1e-12);
}

TEST(ScoreTrack, FsrFromGivenPerFrameDemands)
{
  // a = [2, 1, 1] at v_ego = 10, static phantoms: R = dv^2/(2a) + dv t_r
  const ReachParams p;
  std::vector<AgentState> objs;
  for (double a : {2.0, 1.0, 1.0}) objs.push_back(oracle::agent("X", 100.0 / (2 * a) + 3.0 + 4.5, 0));
  const auto s = scene_of(objs, 10.0);
  ReachParams far = p;
  far.t_horizon = 30.0;  // keep the 53 m phantom inside the gate
  const auto te = score_track(track_of(s, ErrorKind::kFP), s, GateKind::kRSB, far);
  ASSERT_EQ(te.n_gated, 3u);
  EXPECT_NEAR(te.frames[0].a_brake, 2.0, 1e-12);
  EXPECT_NEAR(*te.fsr, 2.0, 1e-12);
}

TEST(ScoreTrack, MdrIsPeak)
{
  const ReachParams p;
  std::vector<AgentState> objs;
  for (double a : {1.0, 4.6, 0.2}) objs.push_back(oracle::agent("X", 100.0 / (2 * a) + 3.0 + 4.5, 0));
  const auto s = scene_of(objs, 10.0);
  ReachParams far = p;
  far.t_horizon = 60.0;
  const auto te = score_track(track_of(s, ErrorKind::kFN), s, GateKind::kRSB, far);
  ASSERT_EQ(te.n_gated, 3u);
  ASSERT_TRUE(te.mdr);
  EXPECT_NEAR(*te.mdr, 4.6, 1e-12);
  EXPECT_FALSE(te.fsr);
}

TEST(ScoreTrack, NothingGated)
{
  const ReachParams p;
  const auto obj = oracle::agent("X", 500, 0);
  const auto s = scene_of({obj, obj}, 0.0);
  for (ErrorKind kind : {ErrorKind::kFN, ErrorKind::kFP}) {
    const auto te = score_track(track_of(s, kind), s, GateKind::kRSB, p);
    EXPECT_EQ(te.n_gated, 0u);
    EXPECT_EQ(te.duration, 0.0);
    EXPECT_EQ(te.lea_peak, 0.0);
    EXPECT_EQ(kind == ErrorKind::kFN ? *te.mdr : *te.fsr, 0.0);
    for (const auto & f : te.frames) {
      EXPECT_FALSE(f.gated);
      EXPECT_EQ(f.a_brake, 0.0);
      EXPECT_EQ(f.lea, 0.0);
    }
  }
}

TEST(ScoreTrack, PhantomAccelerationIgnored)
{
  const ReachParams p;
  auto obj = oracle::agent("X", 29.5, 0);
  obj.accel_lon = -5.0;  // constructed directly; a phantom is scored at constant velocity
  const auto s = scene_of({obj}, 10.0);
  const auto te = score_track(track_of(s, ErrorKind::kFP), s, GateKind::kRSB, p);
  EXPECT_NEAR(te.frames[0].a_brake, 100.0 / 44.0, 1e-12);
}

TEST(ScoreTrack, FnBehindGetsNoBrakingButLateral)
{
  const ReachParams p;
  const auto obj = oracle::agent("X", -6, 0.5, 14, 0);  // closing from behind
  const auto s = scene_of({obj}, 10.0);
  const auto te = score_track(track_of(s, ErrorKind::kFN), s, GateKind::kRSB, p);
  ASSERT_EQ(te.n_gated, 1u);
  EXPECT_EQ(te.frames[0].a_brake, 0.0);
  EXPECT_GT(te.frames[0].lea, 0.0);
}

TEST(ScoreTrack, PropertyFsrGrowsWithEveryPositiveFrame)
{
  const ReachParams p;
  auto g = oracle::rng(35);
  for (int i = 0; i < 100; ++i) {
    std::vector<AgentState> objs;
    const int n = 1 + static_cast<int>(g() % 6);
    for (int j = 0; j < n; ++j) objs.push_back(oracle::agent("X", oracle::uniform(g, 12, 30), 0));
    auto s = scene_of(objs, 10.0);
    const auto before = score_track(track_of(s, ErrorKind::kFP), s, GateKind::kRSB, p);
    objs.push_back(oracle::agent("X", oracle::uniform(g, 12, 30), 0));
    s = scene_of(objs, 10.0);
    const auto after = score_track(track_of(s, ErrorKind::kFP), s, GateKind::kRSB, p);
    ASSERT_GT(after.frames.back().a_brake, 0.0);
    ASSERT_GT(*after.fsr, *before.fsr);
  }
}

TEST(MdrMode, ParseAndPrint)
{
  EXPECT_EQ(parse_mdr_mode("consistent"), MdrMode::kConsistent);
  EXPECT_EQ(parse_mdr_mode("as-printed"), MdrMode::kAsPrinted);
  EXPECT_THROW(parse_mdr_mode("literal"), InputError);
  EXPECT_EQ(to_string(MdrMode::kAsPrinted), "as-printed");
}
