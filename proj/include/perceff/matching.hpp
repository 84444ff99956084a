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

#ifndef PERCEFF__MATCHING_HPP_
#define PERCEFF__MATCHING_HPP_

#include <algorithm>
#include <cstddef>
#include <limits>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "perceff/model.hpp"

namespace perceff
{

inline constexpr double kDefaultMatchThreshold = 2.0;

struct Match
{
  std::string gt_id;
  std::string det_id;
  double distance = 0.0;
};

struct FrameMatchResult
{
  std::size_t frame_index = 0;
  std::vector<Match> matches;
  std::vector<std::string> fn_ids;
  std::vector<std::string> fp_ids;
};

/// Minimum-cost assignment on a rows x cols cost matrix (rows <= cols) using
/// the shortest augmenting path formulation with row/column potentials.
/// Returns, for each row, the assigned column.
inline std::vector<std::size_t> solve_assignment(const std::vector<std::vector<double>> & cost)
{
  const std::size_t n = cost.size();
  if (n == 0) return {};
  const std::size_t m = cost.front().size();
  const double inf = std::numeric_limits<double>::infinity();

  // 1-based with a virtual column 0
  std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0);
  std::vector<std::size_t> p(m + 1, 0), way(m + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(m + 1, inf);
    std::vector<char> used(m + 1, 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = p[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= m; ++j) {
        if (used[j]) continue;
        const double cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= m; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  std::vector<std::size_t> row_to_col(n, 0);
  for (std::size_t j = 1; j <= m; ++j) {
    if (p[j] != 0) row_to_col[p[j] - 1] = j - 1;
  }
  return row_to_col;
}

namespace detail
{

inline std::vector<const AgentState *> of_class(const std::vector<AgentState> & objs,
                                                ClassLabel cls)
{
  std::vector<const AgentState *> out;
  for (const auto & o : objs) {
    if (o.class_label == cls) out.push_back(&o);
  }
  std::sort(out.begin(), out.end(),
            [](const AgentState * a, const AgentState * b) { return a->id < b->id; });
  return out;
}

}  // namespace detail

/// Matches ground truth to detections of one class by center distance.
///
/// Pairs farther apart than `threshold` are not edges of the assignment
/// problem. Among assignments with the largest number of admissible pairs the
/// one with the least total distance is returned. Objects are ordered by id
/// before solving so the result does not depend on input order.
inline FrameMatchResult match_frame(const Frame & frame, std::size_t frame_index,
                                    ClassLabel cls, double threshold = kDefaultMatchThreshold)
{
  FrameMatchResult result;
  result.frame_index = frame_index;
  const auto gts = detail::of_class(frame.gt_objects, cls);
  const auto dets = detail::of_class(frame.detections, cls);

  const std::size_t ng = gts.size();
  const std::size_t nd = dets.size();
  std::vector<std::vector<double>> dist(ng, std::vector<double>(nd, 0.0));
  std::vector<std::vector<char>> admissible(ng, std::vector<char>(nd, 0));
  for (std::size_t i = 0; i < ng; ++i) {
    for (std::size_t j = 0; j < nd; ++j) {
      dist[i][j] = (gts[i]->position - dets[j]->position).norm();
      admissible[i][j] = dist[i][j] <= threshold;
    }
  }

  // Every admissible pair is rewarded by `bonus`, which exceeds any possible
  // sum of admissible distances; forbidden pairs cost the same as leaving
  // both ends unmatched, so they are never preferred and are dropped below.
  const double bonus = threshold * static_cast<double>(std::min(ng, nd) + 1) + 1.0;
  const bool transpose = ng > nd;
  const std::size_t rows = transpose ? nd : ng;
  const std::size_t cols = transpose ? ng : nd;
  std::vector<std::vector<double>> cost(rows, std::vector<double>(cols, 0.0));
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      const std::size_t i = transpose ? c : r;
      const std::size_t j = transpose ? r : c;
      cost[r][c] = admissible[i][j] ? dist[i][j] - bonus : 0.0;
    }
  }

  std::vector<char> gt_used(ng, 0), det_used(nd, 0);
  const auto row_to_col = solve_assignment(cost);
  for (std::size_t r = 0; r < row_to_col.size(); ++r) {
    const std::size_t i = transpose ? row_to_col[r] : r;
    const std::size_t j = transpose ? r : row_to_col[r];
    if (!admissible[i][j]) continue;
    gt_used[i] = det_used[j] = 1;
    result.matches.push_back({gts[i]->id, dets[j]->id, dist[i][j]});
  }
  std::sort(result.matches.begin(), result.matches.end(),
            [](const Match & a, const Match & b) { return a.gt_id < b.gt_id; });
  for (std::size_t i = 0; i < ng; ++i) {
    if (!gt_used[i]) result.fn_ids.push_back(gts[i]->id);
  }
  for (std::size_t j = 0; j < nd; ++j) {
    if (!det_used[j]) result.fp_ids.push_back(dets[j]->id);
  }
  return result;
}

enum class ErrorKind { kFN, kFP };

inline std::string_view to_string(ErrorKind k) { return k == ErrorKind::kFN ? "FN" : "FP"; }

struct Occurrence
{
  std::size_t frame_index = 0;
  RelativeKinematics kinematics;
  AgentState object;  // the missed gt object or the phantom detection
};

/// One FN or FP identity and every frame in which it is an error.
struct ErrorTrack
{
  ErrorKind kind = ErrorKind::kFN;
  std::string identity;
  ClassLabel class_label = ClassLabel::kCar;
  std::vector<Occurrence> occurrences;
  std::string scene_id;
};

/// Groups unmatched objects by identity. FN occurrences of one gt id form a
/// single track even across gaps; a phantom re-detected under a new id starts
/// a new track. Output is sorted by (kind, identity).
inline std::vector<ErrorTrack> build_error_tracks(const Scene & scene,
                                                  const std::vector<FrameMatchResult> & per_frame)
{
  std::map<std::pair<ErrorKind, std::string>, ErrorTrack> tracks;
  auto add = [&](ErrorKind kind, const AgentState & ego, const AgentState & obj,
                 std::size_t fi) {
    auto & t = tracks[{kind, obj.id}];
    if (t.occurrences.empty()) {
      t.kind = kind;
      t.identity = obj.id;
      t.class_label = obj.class_label;
      t.scene_id = scene.scene_id;
    }
    t.occurrences.push_back({fi, project_to_ego(ego, obj), obj});
  };
  auto find = [](const std::vector<AgentState> & objs, const std::string & id) {
    auto it = std::find_if(objs.begin(), objs.end(),
                           [&](const AgentState & a) { return a.id == id; });
    if (it == objs.end()) throw InvariantError("match result refers to unknown id " + id);
    return it;
  };

  for (const auto & fr : per_frame) {
    if (fr.frame_index >= scene.frames.size()) {
      throw InvariantError("match result frame index out of range");
    }
    const Frame & f = scene.frames[fr.frame_index];
    for (const auto & id : fr.fn_ids) add(ErrorKind::kFN, f.ego, *find(f.gt_objects, id), fr.frame_index);
    for (const auto & id : fr.fp_ids) add(ErrorKind::kFP, f.ego, *find(f.detections, id), fr.frame_index);
  }

  std::vector<ErrorTrack> out;
  out.reserve(tracks.size());
  for (auto & [key, t] : tracks) {
    std::sort(t.occurrences.begin(), t.occurrences.end(),
              [](const Occurrence & a, const Occurrence & b) { return a.frame_index < b.frame_index; });
    out.push_back(std::move(t));
  }
  return out;
}

struct PrecisionRecall
{
  double precision = 1.0;
  double recall = 1.0;
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
};

/// Pooled over all frames; 0/0 is defined as 1.
inline PrecisionRecall precision_recall(const std::vector<FrameMatchResult> & per_frame)
{
  PrecisionRecall pr;
  for (const auto & f : per_frame) {
    pr.tp += f.matches.size();
    pr.fp += f.fp_ids.size();
    pr.fn += f.fn_ids.size();
  }
  const auto ratio = [](std::size_t num, std::size_t den) {
    return den == 0 ? 1.0 : static_cast<double>(num) / static_cast<double>(den);
  };
  pr.precision = ratio(pr.tp, pr.tp + pr.fp);
  pr.recall = ratio(pr.tp, pr.tp + pr.fn);
  return pr;
}

}  // namespace perceff

#endif  // PERCEFF__MATCHING_HPP_
