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

// Parametric scenes with one injected perception error and the expected
// effort values for it. The expected values are computed here from the
// template parameters in closed form and do not call the gate or effort
// code, so they can serve as an end-to-end oracle for the pipeline.

#ifndef PERCEFF__SYNTH_HPP_
#define PERCEFF__SYNTH_HPP_

#include <algorithm>
#include <cmath>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "perceff/model.hpp"

namespace perceff::synth
{

using nlohmann::json;

enum class TemplateKind { kLeadMiss, kPhantomStatic, kCutInConverge, kAdjacentPass };

inline std::string_view to_string(TemplateKind k)
{
  switch (k) {
    case TemplateKind::kLeadMiss:
      return "lead-miss";
    case TemplateKind::kPhantomStatic:
      return "phantom-static";
    case TemplateKind::kCutInConverge:
      return "cut-in-converge";
    case TemplateKind::kAdjacentPass:
      return "adjacent-pass";
  }
  return "?";
}

inline TemplateKind parse_template(std::string_view s)
{
  for (auto k : {TemplateKind::kLeadMiss, TemplateKind::kPhantomStatic,
                 TemplateKind::kCutInConverge, TemplateKind::kAdjacentPass}) {
    if (s == to_string(k)) return k;
  }
  throw InputError("unknown template '" + std::string(s) + "'");
}

/// All lengths and speeds are along/against the ego lane (+x). `gap` is the
/// initial bumper-to-bumper distance to the object ahead.
struct ScenarioTemplate
{
  TemplateKind kind = TemplateKind::kLeadMiss;
  double gap = 25.0;
  double v_ego = 10.0;
  double v_obj = 0.0;
  double a_obj = 0.0;
  double d_y = 0.0;
  double v_lat = 0.0;
  int n_frames = 1;
  double t_cycle = 0.5;
};

/// Reference parameters of each template.
inline ScenarioTemplate defaults(TemplateKind kind)
{
  ScenarioTemplate t;
  t.kind = kind;
  switch (kind) {
    case TemplateKind::kLeadMiss:
      break;
    case TemplateKind::kPhantomStatic:
      t.n_frames = 3;
      break;
    case TemplateKind::kCutInConverge:
      t.gap = 22.5;
      t.d_y = 3.0;
      t.v_lat = -1.0;
      break;
    case TemplateKind::kAdjacentPass:
      t.gap = 10.0;
      t.v_ego = 12.0;
      t.v_obj = 10.0;
      t.d_y = 3.0;
      t.n_frames = 3;
      break;
  }
  return t;
}

struct ExpectedFrame
{
  std::size_t frame_index = 0;
  bool gated = false;
  std::optional<double> t_coll;
  double a_brake = 0.0;
  double lea = 0.0;
};

struct ExpectedTrack
{
  std::string kind;  // "FN" or "FP"
  std::string identity;
  std::vector<ExpectedFrame> frames;
  std::size_t n_gated = 0;
  std::optional<double> fsr;
  std::optional<double> mdr;
  double lea_peak = 0.0;
};

struct Sidecar
{
  std::string scene_id;
  ScenarioTemplate scenario;
  ExpectedTrack rsb;
  ExpectedTrack sat;
};

struct Generated
{
  Scene scene;
  Sidecar expected;
};

namespace oracle
{

/// Ground-truth state of the object and ego at time t after the start.
struct Snapshot
{
  double ego_x = 0.0;
  double obj_x = 0.0;  // center
  double obj_y = 0.0;
  double obj_v = 0.0;  // along +x
  double obj_a = 0.0;
};

/// Distance travelled under constant acceleration, stopping instead of
/// reversing when braking.
inline double travel(double v0, double a, double t)
{
  if (a < 0.0 && v0 >= 0.0 && t > v0 / -a) return v0 * v0 / (-2.0 * a);
  return v0 * t + 0.5 * a * t * t;
}

inline double speed_after(double v0, double a, double t)
{
  if (a < 0.0 && v0 >= 0.0 && t > v0 / -a) return 0.0;
  return v0 + a * t;
}

/// Signed lateral closing rate: negative while the offset shrinks.
inline double lateral_rate(double d_y, double v_rel_y)
{
  double side = d_y > 0.0 ? 1.0 : (d_y < 0.0 ? -1.0 : (v_rel_y < 0.0 ? -1.0 : 1.0));
  return side * v_rel_y;
}

/// Reachable-ellipse overlap for two axis-aligned agents of identical size:
/// (|d|^2)^2 <= 4 (a^2 dx^2 + b^2 dy^2), the squared center-line support
/// condition with both semi-axes equal.
inline std::optional<double> rsb_time(double dx0, double dy0, double vdx, double vdy,
                                      const ReachParams & p)
{
  const int n = p.steps();
  for (int k = 0; k <= n; ++k) {
    const double tau = k * p.dt;
    const double dx = dx0 + vdx * tau;
    const double dy = dy0 + vdy * tau;
    const double a = 0.5 * p.default_length + 0.5 * p.lon_growth() * tau * tau;
    const double b = 0.5 * p.default_width + 0.5 * p.a_lat_max * tau * tau;
    const double r2 = dx * dx + dy * dy;
    if (r2 * r2 <= 4.0 * (a * a * dx * dx + b * b * dy * dy)) return tau;
  }
  return std::nullopt;
}

/// Axis-aligned footprint overlap along a straight rollout: the object keeps
/// its acceleration (stopping, never reversing), the ego holds its speed.
inline std::optional<double> sat_time(double dx0, double dy0, double v_ego, double v_obj,
                                      double a_obj, double v_lat, const ReachParams & p)
{
  const int n = p.steps();
  for (int k = 0; k <= n; ++k) {
    const double tau = k * p.dt;
    const double dx = dx0 + travel(v_obj, a_obj, tau) - v_ego * tau;
    const double dy = dy0 + v_lat * tau;
    if (std::abs(dx) <= p.default_length && std::abs(dy) <= p.default_width) return tau;
  }
  return std::nullopt;
}

inline double brake_demand(double range, double v_ego, double v_obj, double a_obj,
                           const ReachParams & p)
{
  const double tr = p.t_react;
  const double closing = v_ego - v_obj;
  const double dv_after_react = closing - a_obj * tr;
  if (dv_after_react <= 0.0) return 0.0;
  const double gap_after_react = range - closing * tr + 0.5 * a_obj * tr * tr;
  if (gap_after_react <= 0.0) return p.a_brake_max;
  const double req = dv_after_react * dv_after_react / (2.0 * gap_after_react) - a_obj;
  return std::min(std::max(req, 0.0), p.a_brake_max);
}

inline double lateral_demand(double d_y, double v_rel_y, double t_coll, const ReachParams & p)
{
  const double t_eva = t_coll - p.t_react;
  if (t_eva <= 0.0) return p.a_lat_cap;
  const double w_c = p.default_width + p.safety_margin;
  const double rate = lateral_rate(d_y, v_rel_y);
  const double widen = std::max(0.0, std::max(0.0, w_c - std::abs(d_y)) - rate * t_eva);
  const double cross = std::max(0.0, w_c + std::abs(d_y) + rate * t_eva);
  return std::min(2.0 * std::min(widen, cross) / (t_eva * t_eva), p.a_lat_cap);
}

}  // namespace oracle

namespace detail
{

inline void validate(const ScenarioTemplate & t, const ReachParams & p)
{
  auto bad = [](const std::string & what) { throw InputError("invalid template parameters: " + what); };
  if (t.n_frames < 1) bad("frames must be >= 1");
  if (!(t.t_cycle > 0)) bad("t_cycle must be > 0");
  if (!(t.gap > 0)) bad("gap must be > 0 (object initially overlapping ego)");
  if (t.v_ego < 0 || t.v_obj < 0) bad("speeds must be non-negative");
  for (double v : {t.gap, t.v_ego, t.v_obj, t.a_obj, t.d_y, t.v_lat, t.t_cycle}) {
    if (!std::isfinite(v)) bad("parameters must be finite");
  }
  const double w_c = p.default_width + p.safety_margin;
  switch (t.kind) {
    case TemplateKind::kCutInConverge:
      if (!(t.d_y * t.v_lat < 0)) bad("cut-in-converge needs lateral motion toward the ego lane");
      break;
    case TemplateKind::kAdjacentPass:
      if (std::abs(t.d_y) <= w_c) bad("adjacent-pass needs |d_y| above the lateral clearance");
      if (t.v_lat != 0.0) bad("adjacent-pass requires parallel motion (v_lat = 0)");
      if (t.a_obj != 0.0) bad("adjacent-pass requires a = 0");
      break;
    case TemplateKind::kPhantomStatic:
      if (t.a_obj != 0.0) bad("phantom-static requires a = 0");
      break;
    case TemplateKind::kLeadMiss:
      break;
  }
}

inline json agent_json(const std::string & id, double x, double y, double vx, double vy,
                       double a, const ReachParams & p)
{
  return json{{"id", id}, {"class", "car"}, {"x", x}, {"y", y}, {"heading", 0.0},
              {"vx", vx}, {"vy", vy}, {"a", a}, {"length", p.default_length},
              {"width", p.default_width}};
}

}  // namespace detail

inline json to_json(const ScenarioTemplate & t)
{
  return json{{"template", to_string(t.kind)}, {"gap", t.gap}, {"v_ego", t.v_ego},
              {"v_obj", t.v_obj}, {"a_obj", t.a_obj}, {"d_y", t.d_y}, {"v_lat", t.v_lat},
              {"frames", t.n_frames}, {"t_cycle", t.t_cycle}};
}

/// Emits the scene as line-delimited records plus the expected values.
inline Generated generate(const ScenarioTemplate & t, const ReachParams & params)
{
  detail::validate(t, params);
  ReachParams p = params;
  p.t_cycle = t.t_cycle;
  const double L = p.default_length;
  const bool phantom = t.kind == TemplateKind::kPhantomStatic;
  const std::string id = phantom ? "P1" : "G1";

  std::ostringstream lines;
  const std::string scene_id = std::string(to_string(t.kind)) + "-synth";
  lines << json{{"scene_id", scene_id}, {"t_cycle", t.t_cycle}}.dump() << '\n';

  Sidecar sc;
  sc.scene_id = scene_id;
  sc.scenario = t;
  for (ExpectedTrack * track : {&sc.rsb, &sc.sat}) {
    track->kind = phantom ? "FP" : "FN";
    track->identity = id;
  }

  for (int i = 0; i < t.n_frames; ++i) {
    const double time = i * t.t_cycle;
    oracle::Snapshot s;
    s.ego_x = t.v_ego * time;
    if (phantom) {
      // a ghost keeps its place relative to the ego in every frame
      s.obj_x = s.ego_x + t.gap + L;
      s.obj_y = t.d_y;
      s.obj_v = t.v_obj;
    } else {
      s.obj_x = t.gap + L + oracle::travel(t.v_obj, t.a_obj, time);
      s.obj_y = t.d_y + t.v_lat * time;
      s.obj_v = oracle::speed_after(t.v_obj, t.a_obj, time);
      const bool stopped = t.a_obj < 0.0 && s.obj_v == 0.0;
      s.obj_a = stopped ? 0.0 : t.a_obj;
    }
    const double range = s.obj_x - s.ego_x - L;
    if (!(range > 0.0)) {
      throw InputError("invalid template parameters: object reaches the ego within the generated frames");
    }

    json frame{{"t", time},
               {"ego", {{"x", s.ego_x}, {"y", 0.0}, {"heading", 0.0}, {"vx", t.v_ego}, {"vy", 0.0},
                        {"a", 0.0}, {"length", L}, {"width", p.default_width}}},
               {"gt", json::array()},
               {"det", json::array()}};
    json obj = detail::agent_json(id, s.obj_x, s.obj_y, s.obj_v, t.v_lat, s.obj_a, p);
    if (phantom) {
      obj.erase("a");
      obj["score"] = 0.9;
      frame["det"].push_back(obj);
    } else {
      frame["gt"].push_back(obj);
    }
    lines << frame.dump() << '\n';

    // expected values
    const double dx0 = s.obj_x - s.ego_x;
    const double dy0 = s.obj_y;
    const double a_brake = oracle::brake_demand(range, t.v_ego, s.obj_v, s.obj_a, p);
    const auto t_rsb = oracle::rsb_time(dx0, dy0, s.obj_v - t.v_ego, t.v_lat, p);
    const auto t_sat = oracle::sat_time(dx0, dy0, t.v_ego, s.obj_v, s.obj_a, t.v_lat, p);
    auto fill = [&](ExpectedTrack & track, std::optional<double> t_coll) {
      ExpectedFrame f;
      f.frame_index = static_cast<std::size_t>(i);
      f.gated = t_coll.has_value();
      f.t_coll = t_coll;
      if (f.gated) {
        f.a_brake = a_brake;
        f.lea = oracle::lateral_demand(dy0, t.v_lat, *t_coll, p);
        ++track.n_gated;
      }
      track.frames.push_back(f);
    };
    fill(sc.rsb, t_rsb);
    fill(sc.sat, t_sat);
  }

  for (ExpectedTrack * track : {&sc.rsb, &sc.sat}) {
    double sum = 0.0, peak = 0.0, lea = 0.0;
    for (const auto & f : track->frames) {
      sum += f.a_brake;
      peak = std::max(peak, f.a_brake);
      lea = std::max(lea, f.lea);
    }
    if (phantom) {
      track->fsr = t.t_cycle * sum;
    } else {
      track->mdr = peak;
    }
    track->lea_peak = lea;
  }

  std::istringstream in(lines.str());
  return {parse_scene(in, params), std::move(sc)};
}

/// Serializes the scene back to its line-delimited form.
inline void write_scene(std::ostream & os, const Scene & scene)
{
  os << json{{"scene_id", scene.scene_id}, {"t_cycle", scene.t_cycle}}.dump() << '\n';
  auto agent = [](const AgentState & a, bool with_id, bool with_score) {
    json j{{"x", a.position.x}, {"y", a.position.y}, {"heading", a.heading},
           {"vx", a.velocity.x}, {"vy", a.velocity.y}, {"length", a.length}, {"width", a.width}};
    if (with_id) {
      j["id"] = a.id;
      j["class"] = std::string(perceff::to_string(a.class_label));
    }
    if (with_score) {
      j["score"] = a.confidence;
    } else {
      j["a"] = a.accel_lon;
    }
    return j;
  };
  for (const auto & f : scene.frames) {
    json frame{{"t", f.timestamp}, {"ego", agent(f.ego, false, false)}, {"gt", json::array()},
               {"det", json::array()}};
    for (const auto & g : f.gt_objects) frame["gt"].push_back(agent(g, true, false));
    for (const auto & d : f.detections) frame["det"].push_back(agent(d, true, true));
    os << frame.dump() << '\n';
  }
}

inline json to_json(const ExpectedTrack & t)
{
  json frames = json::array();
  for (const auto & f : t.frames) {
    frames.push_back({{"frame_index", f.frame_index},
                      {"gated", f.gated},
                      {"t_coll", f.t_coll ? json(*f.t_coll) : json(nullptr)},
                      {"a_brake", f.a_brake},
                      {"lea", f.lea}});
  }
  json j{{"kind", t.kind}, {"identity", t.identity}, {"n_gated", t.n_gated},
         {"lea_peak", t.lea_peak}, {"frames", frames}};
  j["fsr"] = t.fsr ? json(*t.fsr) : json(nullptr);
  j["mdr"] = t.mdr ? json(*t.mdr) : json(nullptr);
  return j;
}

inline json to_json(const Sidecar & s)
{
  return json{{"scene_id", s.scene_id},
              {"scenario", to_json(s.scenario)},
              {"mdr_mode", "consistent"},
              {"gates", {{"rsb", {{"tracks", json::array({to_json(s.rsb)})}}},
                         {"sat", {{"tracks", json::array({to_json(s.sat)})}}}}}};
}

}  // namespace perceff::synth

#endif  // PERCEFF__SYNTH_HPP_
