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

#include <algorithm>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "perceff/matching.hpp"

using namespace perceff;

namespace
{

AgentState at(const std::string & id, double x, double y, ClassLabel cls = ClassLabel::kCar)
{
  auto a = oracle::agent(id, x, y);
  a.class_label = cls;
  return a;
}

Frame frame_of(std::vector<AgentState> gt, std::vector<AgentState> det)
{
  Frame f;
  f.ego = oracle::agent("ego", -50, 0);
  f.gt_objects = std::move(gt);
  f.detections = std::move(det);
  return f;
}

/// Random frame with `ng` ground-truth and `nd` detections clustered so that
/// a good share of pairs fall within the threshold.
Frame random_frame(std::mt19937_64 & g, int ng, int nd)
{
  Frame f = frame_of({}, {});
  for (int i = 0; i < ng; ++i) {
    f.gt_objects.push_back(at("g" + std::to_string(i), oracle::uniform(g, 0, 6), oracle::uniform(g, 0, 6)));
  }
  for (int j = 0; j < nd; ++j) {
    f.detections.push_back(at("d" + std::to_string(j), oracle::uniform(g, 0, 6), oracle::uniform(g, 0, 6)));
  }
  return f;
}

double total_in_gt_order(const FrameMatchResult & r)
{
  double total = 0.0;
  for (const auto & m : r.matches) total += m.distance;  // matches are sorted by gt id
  return total;
}

}  // namespace

TEST(MatchFrame, SingleAdmissiblePair)
{
  const auto r = match_frame(frame_of({at("g", 0, 0)}, {at("d", 0.5, 0)}), 0, ClassLabel::kCar, 2.0);
  ASSERT_EQ(r.matches.size(), 1u);
  EXPECT_DOUBLE_EQ(r.matches[0].distance, 0.5);
  EXPECT_TRUE(r.fn_ids.empty());
  EXPECT_TRUE(r.fp_ids.empty());
}

TEST(MatchFrame, NearerGroundTruthWins)
{
  const auto r = match_frame(frame_of({at("g1", 0, 0), at("g2", 3, 0)}, {at("d", 1, 0)}), 0,
                             ClassLabel::kCar, 2.0);
  ASSERT_EQ(r.matches.size(), 1u);
  EXPECT_EQ(r.matches[0].gt_id, "g1");
  EXPECT_EQ(r.fn_ids, std::vector<std::string>{"g2"});
}

TEST(MatchFrame, OffsetBeyondThresholdIsMissAndPhantom)
{
  const auto r = match_frame(frame_of({at("g", 0, 0)}, {at("d", 2.1, 0)}), 0, ClassLabel::kCar, 2.0);
  EXPECT_TRUE(r.matches.empty());
  EXPECT_EQ(r.fn_ids.size(), 1u);
  EXPECT_EQ(r.fp_ids.size(), 1u);
}

TEST(MatchFrame, ExactlyAtThresholdIsAdmissible)
{
  const auto r = match_frame(frame_of({at("g", 0, 0)}, {at("d", 2.0, 0)}), 0, ClassLabel::kCar, 2.0);
  EXPECT_EQ(r.matches.size(), 1u);
}

TEST(MatchFrame, PerClassOnly)
{
  const auto f = frame_of({at("g", 0, 0, ClassLabel::kCar)}, {at("d", 0.1, 0, ClassLabel::kTruck)});
  const auto cars = match_frame(f, 0, ClassLabel::kCar, 2.0);
  EXPECT_EQ(cars.fn_ids.size(), 1u);
  EXPECT_TRUE(cars.fp_ids.empty());
  const auto trucks = match_frame(f, 0, ClassLabel::kTruck, 2.0);
  EXPECT_TRUE(trucks.fn_ids.empty());
  EXPECT_EQ(trucks.fp_ids.size(), 1u);
}

TEST(MatchFrame, CardinalityBeforeDistance)
{
  // greedy nearest would pair g1-d1 (0.1) and strand g2; the optimum pairs both
  const auto r = match_frame(frame_of({at("g1", 0, 0), at("g2", 1.9, 0)}, {at("d1", 0.1, 0), at("d2", -1.8, 0)}),
                             0, ClassLabel::kCar, 2.0);
  ASSERT_EQ(r.matches.size(), 2u);
  EXPECT_EQ(r.matches[0].det_id, "d2");
  EXPECT_EQ(r.matches[1].det_id, "d1");
}

TEST(MatchFrame, EmptyLists)
{
  const auto r = match_frame(frame_of({}, {}), 3, ClassLabel::kCar);
  EXPECT_EQ(r.frame_index, 3u);
  EXPECT_TRUE(r.matches.empty() && r.fn_ids.empty() && r.fp_ids.empty());
}

TEST(MatchFrame, PropertyOptimalityThresholdPartition)
{
  auto g = oracle::rng(7);
  for (int it = 0; it < 300; ++it) {
    const int ng = static_cast<int>(g() % 7);
    const int nd = static_cast<int>(g() % 7);
    const Frame f = random_frame(g, ng, nd);
    const auto r = match_frame(f, 0, ClassLabel::kCar, 2.0);

    std::vector<std::vector<double>> dist(ng, std::vector<double>(nd));
    for (int i = 0; i < ng; ++i) {
      for (int j = 0; j < nd; ++j) {
        dist[i][j] = (f.gt_objects[i].position - f.detections[j].position).norm();
      }
    }
    const auto best = oracle::brute_force_matching(dist, 2.0);
    ASSERT_EQ(r.matches.size(), best.cardinality);
    ASSERT_EQ(total_in_gt_order(r), best.total);

    std::set<std::string> gts, dets;
    for (const auto & m : r.matches) {
      ASSERT_LE(m.distance, 2.0);
      ASSERT_TRUE(gts.insert(m.gt_id).second);
      ASSERT_TRUE(dets.insert(m.det_id).second);
    }
    for (const auto & id : r.fn_ids) ASSERT_EQ(gts.count(id), 0u);
    for (const auto & id : r.fp_ids) ASSERT_EQ(dets.count(id), 0u);
    ASSERT_EQ(static_cast<std::size_t>(ng), r.matches.size() + r.fn_ids.size());
    ASSERT_EQ(static_cast<std::size_t>(nd), r.matches.size() + r.fp_ids.size());
  }
}

TEST(MatchFrame, PropertyPermutationInvariance)
{
  auto g = oracle::rng(8);
  for (int it = 0; it < 200; ++it) {
    Frame f = random_frame(g, static_cast<int>(g() % 7), static_cast<int>(g() % 7));
    const auto r1 = match_frame(f, 0, ClassLabel::kCar, 2.0);
    std::shuffle(f.gt_objects.begin(), f.gt_objects.end(), g);
    std::shuffle(f.detections.begin(), f.detections.end(), g);
    const auto r2 = match_frame(f, 0, ClassLabel::kCar, 2.0);
    ASSERT_EQ(r1.matches.size(), r2.matches.size());
    for (std::size_t i = 0; i < r1.matches.size(); ++i) {
      EXPECT_EQ(r1.matches[i].gt_id, r2.matches[i].gt_id);
      EXPECT_EQ(r1.matches[i].det_id, r2.matches[i].det_id);
      EXPECT_EQ(r1.matches[i].distance, r2.matches[i].distance);
    }
    EXPECT_EQ(r1.fn_ids, r2.fn_ids);
    EXPECT_EQ(r1.fp_ids, r2.fp_ids);
  }
}

TEST(SolveAssignment, SmallSquare)
{
  const std::vector<std::vector<double>> c{{4, 1, 3}, {2, 0, 5}, {3, 2, 2}};
  const auto a = solve_assignment(c);
  double total = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) total += c[i][a[i]];
  EXPECT_EQ(total, 5.0);
}

namespace
{

Scene scene_with(const std::vector<std::pair<std::vector<AgentState>, std::vector<AgentState>>> & frames)
{
  Scene s;
  s.scene_id = "s";
  for (std::size_t i = 0; i < frames.size(); ++i) {
    Frame f = frame_of(frames[i].first, frames[i].second);
    f.timestamp = 0.5 * static_cast<double>(i);
    s.frames.push_back(f);
  }
  return s;
}

std::vector<ErrorTrack> tracks_of(const Scene & s)
{
  std::vector<FrameMatchResult> per;
  for (std::size_t i = 0; i < s.frames.size(); ++i) per.push_back(match_frame(s.frames[i], i, ClassLabel::kCar));
  return build_error_tracks(s, per);
}

}  // namespace

TEST(BuildErrorTracks, ConsecutiveMissesFormOneTrack)
{
  const auto g = at("G", 20, 0);
  const auto d = at("D", 20, 0);
  const auto s = scene_with({{{g}, {d}}, {{g}, {}}, {{g}, {}}, {{g}, {}}, {{g}, {d}}});
  const auto t = tracks_of(s);
  ASSERT_EQ(t.size(), 1u);
  EXPECT_EQ(t[0].kind, ErrorKind::kFN);
  EXPECT_EQ(t[0].identity, "G");
  ASSERT_EQ(t[0].occurrences.size(), 3u);
  EXPECT_EQ(t[0].occurrences[0].frame_index, 1u);
  EXPECT_EQ(t[0].occurrences[2].frame_index, 3u);
  EXPECT_DOUBLE_EQ(t[0].occurrences[0].kinematics.range, 65.5);
  EXPECT_EQ(t[0].scene_id, "s");
}

TEST(BuildErrorTracks, RedetectedPhantomStartsNewTrack)
{
  const auto p1 = at("P1", 20, 0);
  const auto p2 = at("P2", 20, 0);
  const auto s = scene_with({{{}, {}}, {{}, {p1}}, {{}, {p1}}, {{}, {p1}}, {{}, {}}, {{}, {p2}}, {{}, {p2}}});
  const auto t = tracks_of(s);
  ASSERT_EQ(t.size(), 2u);
  EXPECT_EQ(t[0].identity, "P1");
  EXPECT_EQ(t[0].occurrences.size(), 3u);
  EXPECT_EQ(t[1].identity, "P2");
  EXPECT_EQ(t[1].occurrences.size(), 2u);
  EXPECT_EQ(t[1].kind, ErrorKind::kFP);
}

TEST(BuildErrorTracks, GapKeepsOneTrack)
{
  const auto g = at("G", 20, 0);
  const auto d = at("D", 20, 0);
  std::vector<std::pair<std::vector<AgentState>, std::vector<AgentState>>> frames(8, {{g}, {d}});
  frames[2] = {{g}, {}};
  frames[7] = {{g}, {}};
  const auto t = tracks_of(scene_with(frames));
  ASSERT_EQ(t.size(), 1u);
  ASSERT_EQ(t[0].occurrences.size(), 2u);
  EXPECT_EQ(t[0].occurrences[0].frame_index, 2u);
  EXPECT_EQ(t[0].occurrences[1].frame_index, 7u);
}

TEST(BuildErrorTracks, SortedByKindThenIdentity)
{
  const auto s = scene_with({{{at("B", 20, 0), at("A", 40, 0)}, {at("Z", 60, 0), at("Y", 80, 0)}}});
  const auto t = tracks_of(s);
  ASSERT_EQ(t.size(), 4u);
  EXPECT_EQ(t[0].identity, "A");
  EXPECT_EQ(t[1].identity, "B");
  EXPECT_EQ(t[2].identity, "Y");
  EXPECT_EQ(t[3].identity, "Z");
}

TEST(BuildErrorTracks, UnknownIdIsInvariantViolation)
{
  const auto s = scene_with({{{at("G", 20, 0)}, {}}});
  FrameMatchResult r;
  r.fn_ids = {"nope"};
  EXPECT_THROW(build_error_tracks(s, {r}), InvariantError);
}

TEST(PrecisionRecall, Examples)
{
  FrameMatchResult all;
  all.matches = {{"g", "d", 0.1}};
  auto pr = precision_recall({all});
  EXPECT_EQ(pr.precision, 1.0);
  EXPECT_EQ(pr.recall, 1.0);

  FrameMatchResult a, b;
  a.matches = {{"g1", "d1", 0}, {"g2", "d2", 0}};
  a.fp_ids = {"d3"};
  b.matches = {{"g3", "d4", 0}};
  b.fn_ids = {"g4"};
  pr = precision_recall({a, b});
  EXPECT_EQ(pr.precision, 0.75);
  EXPECT_EQ(pr.recall, 0.75);

  pr = precision_recall({FrameMatchResult{}});
  EXPECT_EQ(pr.precision, 1.0);
  EXPECT_EQ(pr.recall, 1.0);
}
