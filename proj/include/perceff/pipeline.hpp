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

#ifndef PERCEFF__PIPELINE_HPP_
#define PERCEFF__PIPELINE_HPP_

#include <string>
#include <vector>

#include "perceff/analysis.hpp"
#include "perceff/classic.hpp"
#include "perceff/effort.hpp"
#include "perceff/gate.hpp"
#include "perceff/matching.hpp"
#include "perceff/model.hpp"

namespace perceff
{

struct EvalOptions
{
  GateKind gate = GateKind::kRSB;
  MdrMode mdr_mode = MdrMode::kConsistent;
  std::vector<ClassLabel> classes{ClassLabel::kCar, ClassLabel::kTruck};
  double match_threshold = kDefaultMatchThreshold;
  ReachParams params;
};

struct ClassEvaluation
{
  ClassLabel class_label = ClassLabel::kCar;
  std::vector<FrameMatchResult> matches;
  std::vector<ErrorTrack> tracks;
  std::vector<TrackEffort> efforts;
  std::vector<TrackSummary> summaries;
};

struct SceneEvaluation
{
  std::string scene_id;
  std::vector<ClassEvaluation> classes;
};

namespace detail
{

inline void check_effort_invariants(const TrackEffort & te, const ReachParams & p)
{
  auto fail = [&](const std::string & what) {
    throw InvariantError(te.scene_id + "/" + te.identity + ": " + what);
  };
  for (const auto & f : te.frames) {
    if (!(f.a_brake >= 0.0 && f.a_brake <= p.a_brake_max)) fail("a_brake outside [0, cap]");
    if (!(f.lea >= 0.0 && f.lea <= p.a_lat_cap)) fail("lea outside [0, cap]");
    if (!f.gated && (f.a_brake != 0.0 || f.lea != 0.0)) fail("ungated frame carries effort");
    if (f.gated && f.t_coll && (*f.t_coll < 0.0 || *f.t_coll > p.t_horizon + 1e-9)) {
      fail("t_coll outside horizon");
    }
  }
}

}  // namespace detail

/// Match, build error tracks, gate, score and summarize one scene for each
/// requested class. The scene's own cycle time overrides params.t_cycle.
inline SceneEvaluation evaluate_scene(const Scene & scene, const EvalOptions & opts)
{
  ReachParams params = opts.params;
  params.t_cycle = scene.t_cycle;

  SceneEvaluation out;
  out.scene_id = scene.scene_id;
  for (ClassLabel cls : opts.classes) {
    ClassEvaluation ce;
    ce.class_label = cls;
    for (std::size_t i = 0; i < scene.frames.size(); ++i) {
      ce.matches.push_back(match_frame(scene.frames[i], i, cls, opts.match_threshold));
    }
    ce.tracks = build_error_tracks(scene, ce.matches);
    for (const auto & track : ce.tracks) {
      TrackEffort te = score_track(track, scene, opts.gate, params, opts.mdr_mode);
      detail::check_effort_invariants(te, params);
      const ClassicScores cs = classic_scores(track, te, params);
      ce.summaries.push_back(summarize(te, cs, opts.gate, params));
      ce.efforts.push_back(std::move(te));
    }
    out.classes.push_back(std::move(ce));
  }
  return out;
}

}  // namespace perceff

#endif  // PERCEFF__PIPELINE_HPP_
