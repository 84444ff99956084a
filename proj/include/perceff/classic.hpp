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

#ifndef PERCEFF__CLASSIC_HPP_
#define PERCEFF__CLASSIC_HPP_

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "perceff/effort.hpp"
#include "perceff/matching.hpp"
#include "perceff/model.hpp"

namespace perceff
{

inline constexpr double kTtcReportCap = 10.0;

/// R / dv for a closing object ahead; nullopt when not closing.
inline std::optional<double> ttc_uncapped(const RelativeKinematics & k)
{
  const double dv = k.closing_speed();
  if (!k.ahead || dv <= 0.0) return std::nullopt;
  return k.range / dv;
}

/// Classical TTC as reported, clamped to the 10 s reporting cap.
inline std::optional<double> ttc_classical(const RelativeKinematics & k)
{
  auto t = ttc_uncapped(k);
  if (t) *t = std::min(*t, kTtcReportCap);
  return t;
}

inline std::optional<double> thw(const RelativeKinematics & k)
{
  if (k.v_ego <= 0.0) return std::nullopt;
  return k.range / k.v_ego;
}

/// Constant-velocity deceleration rate to avoid crash, capped at a_brake_max.
inline double drac(const RelativeKinematics & k, const ReachParams & params)
{
  const double dv = k.closing_speed();
  if (dv <= 0.0 || k.range <= 0.0) return 0.0;
  return std::min(dv * dv / (2.0 * k.range), params.a_brake_max);
}

inline double btn(const RelativeKinematics & k, const ReachParams & params)
{
  return drac(k, params) / params.a_brake_max;
}

inline double stn(double lea, const ReachParams & params) { return lea / params.a_lat_max; }

struct TetSample
{
  bool gated = false;
  std::optional<double> ttc;
};

/// Time spent with TTC under the threshold, counted over gated frames.
inline double tet_track(const std::vector<TetSample> & frames, const ReachParams & params)
{
  const auto n = std::count_if(frames.begin(), frames.end(), [&](const TetSample & s) {
    return s.gated && s.ttc && *s.ttc < params.ttc_tet_threshold;
  });
  return static_cast<double>(n) * params.t_cycle;
}

/// Per-track classical representatives, each taken at its most critical
/// value over the gated frames.
struct ClassicScores
{
  std::optional<double> min_ttc;  // uncapped
  std::optional<double> min_thw;
  std::optional<double> max_drac;
  std::optional<double> max_btn;
  std::optional<double> min_abs_dy;
  double tet = 0.0;

  std::optional<double> min_ttc_reported() const
  {
    if (!min_ttc) return std::nullopt;
    return std::min(*min_ttc, kTtcReportCap);
  }
};

inline ClassicScores classic_scores(const ErrorTrack & track, const TrackEffort & effort,
                                    const ReachParams & params)
{
  if (track.occurrences.size() != effort.frames.size()) {
    throw InvariantError("track and effort frame counts differ for " + track.identity);
  }
  ClassicScores cs;
  std::vector<TetSample> tet_frames;
  auto keep_min = [](std::optional<double> & slot, std::optional<double> v) {
    if (v && (!slot || *v < *slot)) slot = v;
  };
  auto keep_max = [](std::optional<double> & slot, double v) {
    if (!slot || v > *slot) slot = v;
  };
  for (std::size_t i = 0; i < track.occurrences.size(); ++i) {
    const RelativeKinematics & k = track.occurrences[i].kinematics;
    const bool gated = effort.frames[i].gated;
    const auto ttc = ttc_uncapped(k);
    tet_frames.push_back({gated, ttc});
    if (!gated) continue;
    keep_min(cs.min_ttc, ttc);
    keep_min(cs.min_thw, thw(k));
    keep_max(cs.max_drac, drac(k, params));
    keep_max(cs.max_btn, btn(k, params));
    keep_min(cs.min_abs_dy, std::abs(k.d_y));
  }
  cs.tet = tet_track(tet_frames, params);
  return cs;
}

enum class SeverityZone { kSafe = 0, kModerate = 1, kCritical = 2, kImminent = 3 };

inline std::string_view to_string(SeverityZone z)
{
  switch (z) {
    case SeverityZone::kSafe:
      return "Safe";
    case SeverityZone::kModerate:
      return "Moderate";
    case SeverityZone::kCritical:
      return "Critical";
    case SeverityZone::kImminent:
      return "Imminent";
  }
  return "Safe";
}

inline constexpr std::array<SeverityZone, 4> kAllZones{
  SeverityZone::kSafe, SeverityZone::kModerate, SeverityZone::kCritical, SeverityZone::kImminent};

enum class Metric { kTTC, kBTN, kMDR, kFSR, kLEA };

inline std::string_view to_string(Metric m)
{
  switch (m) {
    case Metric::kTTC:
      return "TTC";
    case Metric::kBTN:
      return "BTN";
    case Metric::kMDR:
      return "MDR";
    case Metric::kFSR:
      return "FSR";
    case Metric::kLEA:
      return "LEA";
  }
  return "?";
}

inline Metric parse_metric(std::string_view s)
{
  for (Metric m : {Metric::kTTC, Metric::kBTN, Metric::kMDR, Metric::kFSR, Metric::kLEA}) {
    if (s == to_string(m)) return m;
  }
  throw InputError("unknown metric '" + std::string(s) + "'");
}

/// Zone boundaries {Safe|Moderate, Moderate|Critical, Critical|Imminent}.
/// For TTC danger grows as the value shrinks.
inline std::array<double, 3> zone_bounds(Metric m)
{
  switch (m) {
    case Metric::kTTC:
      return {3.0, 2.0, 1.0};
    case Metric::kBTN:
      return {0.4, 0.7, 1.0};
    case Metric::kMDR:
      return {2.0, 4.0, 6.0};
    case Metric::kFSR:
      return {1.0, 2.5, 5.0};
    case Metric::kLEA:
      return {1.0, 2.0, 4.0};
  }
  return {0.0, 0.0, 0.0};
}

/// Bands are lower-exclusive and upper-inclusive on the printed boundaries
/// (MDR: <=2 Safe, (2,4] Moderate, (4,6] Critical, >6 Imminent). TTC mirrors
/// this: >3 Safe, (2,3] Moderate, (1,2] Critical, <=1 Imminent.
inline SeverityZone classify(Metric m, double value)
{
  const auto b = zone_bounds(m);
  if (m == Metric::kTTC) {
    if (value > b[0]) return SeverityZone::kSafe;
    if (value > b[1]) return SeverityZone::kModerate;
    if (value > b[2]) return SeverityZone::kCritical;
    return SeverityZone::kImminent;
  }
  if (value <= b[0]) return SeverityZone::kSafe;
  if (value <= b[1]) return SeverityZone::kModerate;
  if (value <= b[2]) return SeverityZone::kCritical;
  return SeverityZone::kImminent;
}

/// A TTC that is undefined (not closing) is Safe.
inline SeverityZone classify(Metric m, std::optional<double> value)
{
  if (!value) return SeverityZone::kSafe;
  return classify(m, *value);
}

inline SeverityZone classify(std::string_view metric, double value)
{
  return classify(parse_metric(metric), value);
}

}  // namespace perceff

#endif  // PERCEFF__CLASSIC_HPP_
