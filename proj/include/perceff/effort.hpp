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

#ifndef PERCEFF__EFFORT_HPP_
#define PERCEFF__EFFORT_HPP_

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "perceff/gate.hpp"
#include "perceff/matching.hpp"
#include "perceff/model.hpp"

namespace perceff
{

/// How the missed-object braking demand is solved.
///
/// kConsistent uses the gap-consumption closed form, in which the ego
/// distance under braking is v*T - a*T^2/2. It coincides with the phantom
/// braking demand when the object does not accelerate.
///
/// kAsPrinted keeps the published relation, whose ego term carries +1/2
/// instead of -1/2, and solves it as a quadratic in the speed-matching time.
enum class MdrMode { kConsistent, kAsPrinted };

inline std::string_view to_string(MdrMode m)
{
  return m == MdrMode::kConsistent ? "consistent" : "as-printed";
}

inline MdrMode parse_mdr_mode(std::string_view s)
{
  if (s == "consistent") return MdrMode::kConsistent;
  if (s == "as-printed" || s == "as_printed") return MdrMode::kAsPrinted;
  throw InputError("unknown mdr mode '" + std::string(s) + "' (expected consistent or as-printed)");
}

/// Constant deceleration the ego needs to stop closing on a constant-velocity
/// phantom ahead, after the reaction delay. Capped at a_brake_max.
inline double fp_brake_demand(const RelativeKinematics & k, const ReachParams & params)
{
  if (!k.ahead) return 0.0;
  const double dv = k.closing_speed();
  if (dv <= 0.0) return 0.0;
  const double margin = k.range - dv * params.t_react;
  if (margin <= 0.0) return params.a_brake_max;
  return std::min(dv * dv / (2.0 * margin), params.a_brake_max);
}

struct BrakeDemand
{
  double value = 0.0;
  /// Set when the as-printed relation has no positive root; value is then
  /// the capability cap.
  bool no_positive_root = false;
};

/// Solution details of the as-printed relation, exposed for auditing.
struct PrintedSolution
{
  bool solvable = false;
  double match_time = 0.0;   // positive root x = dv / (a_brake + a_obj)
  double unclamped = 0.0;    // a_brake before clamping
};

/// Solves -a/2 x^2 + 3/2 dv x - D = 0 for the smallest positive x, where
/// dv = u0 - a t_r and D = R - u0 t_r + a t_r^2 / 2.
inline PrintedSolution solve_printed_mdr(const RelativeKinematics & k, const ReachParams & params)
{
  const double tr = params.t_react;
  const double a = k.a_obj_lon;
  const double u0 = k.closing_speed();
  const double dv = u0 - a * tr;
  const double gap = k.range - u0 * tr + 0.5 * a * tr * tr;

  const double qa = -0.5 * a;
  const double qb = 1.5 * dv;
  const double qc = -gap;

  PrintedSolution s;
  double best = -1.0;
  auto consider = [&](double x) {
    if (x > 0.0 && std::isfinite(x) && (best < 0.0 || x < best)) best = x;
  };
  if (qa == 0.0) {
    if (qb != 0.0) consider(-qc / qb);
  } else {
    const double disc = qb * qb - 4.0 * qa * qc;
    if (disc >= 0.0) {
      // numerically stable pair of roots
      const double q = -0.5 * (qb + std::copysign(std::sqrt(disc), qb));
      if (q != 0.0) {
        consider(q / qa);
        consider(qc / q);
      } else {
        consider(0.0);
      }
    }
  }
  if (best > 0.0) {
    s.solvable = true;
    s.match_time = best;
    s.unclamped = dv / best - a;
  }
  return s;
}

/// Left minus right side of the as-printed relation at a given a_brake.
inline double printed_mdr_residual(const RelativeKinematics & k, const ReachParams & params,
                                   double a_brake)
{
  const double tr = params.t_react;
  const double a = k.a_obj_lon;
  const double v_ego = k.v_ego;
  const double v_obj = k.v_obj_lon;
  const double dv = v_ego - v_obj - a * tr;
  const double denom = a_brake + a;
  const double x = dv / denom;
  const double lhs = v_ego * tr + v_ego * dv / denom + 0.5 * dv * dv / denom;
  const double rhs = k.range + v_obj * tr + v_obj * dv / denom + 0.5 * a * (tr + x) * (tr + x);
  return lhs - rhs;
}

/// Braking demand for a missed object that keeps its own longitudinal
/// acceleration. Objects behind the ego get 0.
inline BrakeDemand fn_brake_demand(const RelativeKinematics & k, const ReachParams & params,
                                   MdrMode mode = MdrMode::kConsistent)
{
  if (!k.ahead) return {};
  const double tr = params.t_react;
  const double a = k.a_obj_lon;
  const double u0 = k.closing_speed();
  const double dv = u0 - a * tr;
  if (dv <= 0.0) return {};

  if (mode == MdrMode::kConsistent) {
    const double gap = k.range - u0 * tr + 0.5 * a * tr * tr;
    if (gap <= 0.0) return {params.a_brake_max, false};
    const double req = dv * dv / (2.0 * gap) - a;
    return {std::clamp(req, 0.0, params.a_brake_max), false};
  }

  const PrintedSolution s = solve_printed_mdr(k, params);
  if (!s.solvable) return {params.a_brake_max, true};
  return {std::clamp(s.unclamped, 0.0, params.a_brake_max), false};
}

/// Minimum constant lateral acceleration that avoids a collision predicted at
/// `t_coll`, choosing the cheaper of widening the current gap or crossing to
/// the other side. Capped at a_lat_cap.
inline double lea_frame(const RelativeKinematics & k, double t_coll, double ego_width,
                        double obj_width, const ReachParams & params)
{
  const double clearance = 0.5 * (ego_width + obj_width) + params.safety_margin;
  const double t_eva = t_coll - params.t_react;
  if (t_eva <= 0.0) return params.a_lat_cap;

  // positive when the lateral offset is growing
  double side = k.d_y > 0.0 ? 1.0 : (k.d_y < 0.0 ? -1.0 : 0.0);
  if (side == 0.0) side = k.v_rel_y < 0.0 ? -1.0 : 1.0;
  const double diverging = side * k.v_rel_y;

  const double abs_dy = std::abs(k.d_y);
  const double y_widen = std::max(0.0, clearance - abs_dy) - diverging * t_eva;
  const double y_cross = clearance + abs_dy + diverging * t_eva;
  const double t2 = t_eva * t_eva;
  const double a_widen = 2.0 * std::max(0.0, y_widen) / t2;
  const double a_cross = 2.0 * std::max(0.0, y_cross) / t2;
  return std::min(std::min(a_widen, a_cross), params.a_lat_cap);
}

struct FrameEffort
{
  std::size_t frame_index = 0;
  double a_brake = 0.0;
  double lea = 0.0;
  std::optional<double> t_coll;
  bool gated = false;
  bool no_positive_root = false;
};

struct TrackEffort
{
  ErrorKind kind = ErrorKind::kFN;
  std::string identity;
  ClassLabel class_label = ClassLabel::kCar;
  std::string scene_id;
  std::vector<FrameEffort> frames;
  std::optional<double> fsr;  // FP tracks only
  std::optional<double> mdr;  // FN tracks only
  double lea_peak = 0.0;
  double max_a_brake = 0.0;
  std::size_t n_gated = 0;
  double duration = 0.0;
};

/// Runs the selected gate for one occurrence of an error track.
inline GateResult gate_occurrence(const AgentState & ego, const Occurrence & occ, ErrorKind kind,
                                  GateKind gate, const ReachParams & params)
{
  if (gate == GateKind::kRSB) return rsb_first_collision(ego, occ.object, params);
  // missed objects keep their own acceleration; phantoms and the ego do not
  const Rollout rollout{0.0, kind == ErrorKind::kFN ? occ.object.accel_lon : 0.0};
  return sat_first_collision(ego, occ.object, rollout, params);
}

/// Scores every occurrence of `track`. Only gated frames carry effort and
/// count toward the track duration.
inline TrackEffort score_track(const ErrorTrack & track, const Scene & scene, GateKind gate,
                               const ReachParams & params, MdrMode mode = MdrMode::kConsistent)
{
  TrackEffort te;
  te.kind = track.kind;
  te.identity = track.identity;
  te.class_label = track.class_label;
  te.scene_id = track.scene_id;
  double sum_brake = 0.0;
  double peak_brake = 0.0;
  double peak_lea = 0.0;

  for (const auto & occ : track.occurrences) {
    const AgentState & ego = scene.frames.at(occ.frame_index).ego;
    FrameEffort fe;
    fe.frame_index = occ.frame_index;
    const GateResult g = gate_occurrence(ego, occ, track.kind, gate, params);
    fe.gated = g.collides;
    if (fe.gated) {
      fe.t_coll = g.t_coll;
      if (track.kind == ErrorKind::kFP) {
        RelativeKinematics cv = occ.kinematics;
        cv.a_obj_lon = 0.0;
        fe.a_brake = fp_brake_demand(cv, params);
      } else {
        const BrakeDemand b = fn_brake_demand(occ.kinematics, params, mode);
        fe.a_brake = b.value;
        fe.no_positive_root = b.no_positive_root;
      }
      fe.lea = lea_frame(occ.kinematics, g.t_coll, ego.width, occ.object.width, params);
      ++te.n_gated;
      sum_brake += fe.a_brake;
      peak_brake = std::max(peak_brake, fe.a_brake);
      peak_lea = std::max(peak_lea, fe.lea);
    }
    te.frames.push_back(fe);
  }

  te.duration = static_cast<double>(te.n_gated) * params.t_cycle;
  te.lea_peak = peak_lea;
  te.max_a_brake = peak_brake;
  if (track.kind == ErrorKind::kFP) {
    const double a_avg = te.n_gated == 0 ? 0.0 : sum_brake / static_cast<double>(te.n_gated);
    te.fsr = te.duration * a_avg;
  } else {
    te.mdr = peak_brake;
  }
  return te;
}

}  // namespace perceff

#endif  // PERCEFF__EFFORT_HPP_
