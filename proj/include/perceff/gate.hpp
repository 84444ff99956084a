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

#ifndef PERCEFF__GATE_HPP_
#define PERCEFF__GATE_HPP_

#include <array>
#include <cmath>
#include <optional>
#include <string_view>

#include "perceff/model.hpp"

namespace perceff
{

enum class GateKind { kRSB, kSAT };

inline std::string_view to_string(GateKind g) { return g == GateKind::kRSB ? "rsb" : "sat"; }

inline GateKind parse_gate(std::string_view s)
{
  if (s == "rsb") return GateKind::kRSB;
  if (s == "sat") return GateKind::kSAT;
  throw InputError("unknown gate '" + std::string(s) + "' (expected rsb or sat)");
}

/// Earliest predicted overlap on the gate's time grid. `step` is the grid
/// index, so `t_coll == step * dt`.
struct GateResult
{
  bool collides = false;
  double t_coll = 0.0;
  int step = -1;
  GateKind gate_kind = GateKind::kRSB;

  std::optional<double> time() const
  {
    return collides ? std::optional<double>(t_coll) : std::nullopt;
  }
};

struct ReachEllipsoid
{
  Vec2 center;
  Vec2 axis_lon{1.0, 0.0};
  double semi_lon = 0.0;
  double semi_lat = 0.0;

  /// Support radius of the ellipse in unit direction `u`.
  double support(const Vec2 & u) const
  {
    const Vec2 axis_lat = left_normal(axis_lon);
    return std::hypot(semi_lon * axis_lon.dot(u), semi_lat * axis_lat.dot(u));
  }
};

/// Reachable set at prediction time `tau`: the center moves at constant
/// velocity and both semi-axes grow as 0.5 * a * tau^2.
inline ReachEllipsoid reach_ellipsoid(const AgentState & agent, double tau,
                                      const ReachParams & params)
{
  const double tau2 = tau * tau;
  ReachEllipsoid e;
  e.center = agent.position + agent.velocity * tau;
  e.axis_lon = unit_heading(agent.heading);
  e.semi_lon = 0.5 * agent.length + 0.5 * params.lon_growth() * tau2;
  e.semi_lat = 0.5 * agent.width + 0.5 * params.a_lat_max * tau2;
  return e;
}

/// Center-line support test: separation is reported only when the center
/// distance exceeds the sum of support radii along the center line. Exact
/// for circles, over-approximates overlap for general ellipses.
inline bool ellipsoids_overlap(const ReachEllipsoid & a, const ReachEllipsoid & b)
{
  const Vec2 d = b.center - a.center;
  const double dist = d.norm();
  if (dist == 0.0) return true;
  const Vec2 u = d * (1.0 / dist);
  return dist <= a.support(u) + b.support(u);
}

namespace detail
{

template <typename OverlapAt>
GateResult scan_grid(GateKind kind, const ReachParams & params, OverlapAt && overlap_at)
{
  GateResult r;
  r.gate_kind = kind;
  const int n = params.steps();
  for (int k = 0; k <= n; ++k) {
    const double tau = k * params.dt;
    if (overlap_at(tau)) {
      r.collides = true;
      r.step = k;
      r.t_coll = tau;
      return r;
    }
  }
  return r;
}

}  // namespace detail

inline GateResult rsb_first_collision(const AgentState & ego, const AgentState & obj,
                                      const ReachParams & params)
{
  return detail::scan_grid(GateKind::kRSB, params, [&](double tau) {
    return ellipsoids_overlap(reach_ellipsoid(ego, tau, params), reach_ellipsoid(obj, tau, params));
  });
}

struct OrientedBox
{
  Vec2 center;
  Vec2 axis{1.0, 0.0};
  double half_length = 0.0;
  double half_width = 0.0;

  /// Half extent of the box projected on unit axis `n`.
  double radius_on(const Vec2 & n) const
  {
    return half_length * std::abs(axis.dot(n)) + half_width * std::abs(left_normal(axis).dot(n));
  }
};

/// Separating axis test over both edge normals of each box. Touching counts
/// as overlap.
inline bool boxes_overlap(const OrientedBox & a, const OrientedBox & b)
{
  const Vec2 d = b.center - a.center;
  const std::array<Vec2, 4> axes{a.axis, left_normal(a.axis), b.axis, left_normal(b.axis)};
  for (const Vec2 & n : axes) {
    if (std::abs(d.dot(n)) > a.radius_on(n) + b.radius_on(n)) return false;
  }
  return true;
}

/// Constant longitudinal accelerations for the straight-line SAT rollout.
struct Rollout
{
  double ego_accel = 0.0;
  double obj_accel = 0.0;
};

/// Position after `tau` when `accel` acts along the heading. The
/// along-heading speed never changes sign under braking; the cross-heading
/// velocity component is held constant.
inline Vec2 rollout_position(const AgentState & agent, double accel, double tau)
{
  const Vec2 h = unit_heading(agent.heading);
  const Vec2 n = left_normal(h);
  const double s0 = agent.velocity.dot(h);
  const double s_lat = agent.velocity.dot(n);
  double along = s0 * tau + 0.5 * accel * tau * tau;
  const bool braking_forward = accel < 0.0 && s0 >= 0.0;
  const bool braking_reverse = accel > 0.0 && s0 < 0.0;
  if (braking_forward || braking_reverse) {
    const double t_stop = -s0 / accel;
    if (tau > t_stop) along = -0.5 * s0 * s0 / accel;
  }
  return agent.position + h * along + n * (s_lat * tau);
}

inline OrientedBox rollout_box(const AgentState & agent, double accel, double tau)
{
  return {rollout_position(agent, accel, tau), unit_heading(agent.heading), 0.5 * agent.length,
          0.5 * agent.width};
}

inline GateResult sat_first_collision(const AgentState & ego, const AgentState & obj,
                                      const Rollout & rollout, const ReachParams & params)
{
  return detail::scan_grid(GateKind::kSAT, params, [&](double tau) {
    return boxes_overlap(rollout_box(ego, rollout.ego_accel, tau),
                         rollout_box(obj, rollout.obj_accel, tau));
  });
}

}  // namespace perceff

#endif  // PERCEFF__GATE_HPP_
