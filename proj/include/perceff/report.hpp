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

#ifndef PERCEFF__REPORT_HPP_
#define PERCEFF__REPORT_HPP_

#include <cstdio>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "perceff/analysis.hpp"
#include "perceff/classic.hpp"
#include "perceff/gate.hpp"
#include "perceff/model.hpp"

namespace perceff
{

using nlohmann::json;

inline constexpr int kReportSchemaVersion = 1;

inline constexpr const char * kCorrelationPopulation =
  "tracks with at least one gated frame, including gated tracks with zero effort";

namespace detail
{

inline json opt(const std::optional<double> & v) { return v ? json(*v) : json(nullptr); }

inline std::optional<double> opt_from(const json & j, const char * key)
{
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  return it->get<double>();
}

}  // namespace detail

inline json to_json(const ReachParams & p)
{
  return json{
    {"a_lon_max", p.a_lon_max},
    {"a_lon_min", p.a_lon_min},
    {"a_lat_max", p.a_lat_max},
    {"a_brake_max", p.a_brake_max},
    {"a_lat_cap", p.a_lat_cap},
    {"default_length", p.default_length},
    {"default_width", p.default_width},
    {"safety_margin", p.safety_margin},
    {"t_react", p.t_react},
    {"t_horizon", p.t_horizon},
    {"dt", p.dt},
    {"t_cycle", p.t_cycle},
    {"ttc_tet_threshold", p.ttc_tet_threshold},
  };
}

inline json to_json(const AggregateRow & r)
{
  return json{
    {"dataset", r.dataset_id},
    {"pipeline", r.pipeline_id},
    {"class", to_string(r.class_label)},
    {"fn_tracks", r.fn_tracks},
    {"fp_tracks", r.fp_tracks},
    {"fn_scored", r.fn_scored},
    {"fp_scored", r.fp_scored},
    {"critical_fn", r.critical_fn},
    {"critical_fp", r.critical_fp},
    {"tc", r.tc},
    {"mean", {{"mdr", r.mean_mdr}, {"fsr", r.mean_fsr}, {"lea", r.mean_lea}}},
    {"cum", {{"mdr", r.cum_mdr}, {"fsr", r.cum_fsr}, {"lea", r.cum_lea}}},
    {"worst", {{"mdr", r.worst_mdr}, {"fsr", r.worst_fsr}, {"lea", r.worst_lea}}},
    {"precision", r.precision},
    {"recall", r.recall},
  };
}

inline json to_json(const HistogramEntry & h)
{
  json counts = json::object();
  for (SeverityZone z : kAllZones) counts[std::string(to_string(z))] = h.counts[static_cast<std::size_t>(z)];
  return json{{"population", h.population}, {"metric", to_string(h.metric)}, {"counts", counts}};
}

inline json to_json(const CorrelationMatrix & m)
{
  json entries = json::array();
  for (std::size_t r = 0; r < m.rows.size(); ++r) {
    for (std::size_t c = 0; c < m.cols.size(); ++c) {
      const auto & e = m.entries[r][c];
      json je{{"row", m.rows[r]}, {"col", m.cols[c]}, {"n", e.n}, {"rho", detail::opt(e.rho)}};
      if (!e.rho) je["reason"] = e.reason;
      entries.push_back(std::move(je));
    }
  }
  return json{{"gate", to_string(m.gate)}, {"kind", to_string(m.kind)}, {"rows", m.rows},
              {"cols", m.cols}, {"entries", entries}};
}

inline json to_json(const TrackSummary & t)
{
  json zones = json::object();
  for (const auto & [metric, zone] : track_zones(t)) zones[std::string(to_string(metric))] = to_string(zone);
  return json{
    {"scene", t.scene_id},
    {"kind", to_string(t.kind)},
    {"identity", t.identity},
    {"class", to_string(t.class_label)},
    {"gate", to_string(t.gate)},
    {"n_frames", t.n_frames},
    {"n_gated", t.n_gated},
    {"duration", t.duration},
    {"fsr", detail::opt(t.fsr)},
    {"mdr", detail::opt(t.mdr)},
    {"lea_peak", t.lea_peak},
    {"stn", t.stn},
    {"max_a_brake", t.max_a_brake},
    {"min_t_coll", detail::opt(t.min_t_coll)},
    {"min_ttc", detail::opt(t.classic.min_ttc)},
    {"min_thw", detail::opt(t.classic.min_thw)},
    {"max_drac", detail::opt(t.classic.max_drac)},
    {"max_btn", detail::opt(t.classic.max_btn)},
    {"min_dy", detail::opt(t.classic.min_abs_dy)},
    {"tet", t.classic.tet},
    {"zones", zones},
  };
}

inline TrackSummary track_summary_from_json(const json & j)
{
  TrackSummary t;
  t.scene_id = j.at("scene").get<std::string>();
  t.kind = j.at("kind").get<std::string>() == "FN" ? ErrorKind::kFN : ErrorKind::kFP;
  t.identity = j.at("identity").get<std::string>();
  t.class_label = parse_class(j.at("class").get<std::string>());
  t.gate = parse_gate(j.at("gate").get<std::string>());
  t.n_frames = j.at("n_frames").get<std::size_t>();
  t.n_gated = j.at("n_gated").get<std::size_t>();
  t.duration = j.at("duration").get<double>();
  t.fsr = detail::opt_from(j, "fsr");
  t.mdr = detail::opt_from(j, "mdr");
  t.lea_peak = j.at("lea_peak").get<double>();
  t.stn = j.at("stn").get<double>();
  t.max_a_brake = j.at("max_a_brake").get<double>();
  t.min_t_coll = detail::opt_from(j, "min_t_coll");
  t.classic.min_ttc = detail::opt_from(j, "min_ttc");
  t.classic.min_thw = detail::opt_from(j, "min_thw");
  t.classic.max_drac = detail::opt_from(j, "max_drac");
  t.classic.max_btn = detail::opt_from(j, "max_btn");
  t.classic.min_abs_dy = detail::opt_from(j, "min_dy");
  t.classic.tet = j.at("tet").get<double>();
  return t;
}

/// Six significant digits; empty for absent values.
inline std::string csv_number(const std::optional<double> & v)
{
  if (!v) return {};
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", *v == 0.0 ? 0.0 : *v);
  return buf;
}

inline void write_tracks_csv(std::ostream & os, std::span<const TrackSummary> tracks)
{
  os << "scene,kind,identity,class,n_gated,duration,fsr,mdr,lea_peak,min_ttc,tet,max_drac,"
        "min_thw,min_dy,zones\n";
  auto field = [](const std::string & s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
    return q + "\"";
  };
  for (const auto & t : tracks) {
    std::string zones;
    for (const auto & [metric, zone] : track_zones(t)) {
      if (!zones.empty()) zones += ';';
      zones += std::string(to_string(metric)) + "=" + std::string(to_string(zone));
    }
    os << field(t.scene_id) << ',' << to_string(t.kind) << ',' << field(t.identity) << ','
       << to_string(t.class_label) << ',' << t.n_gated << ',' << csv_number(t.duration) << ','
       << csv_number(t.fsr) << ',' << csv_number(t.mdr) << ',' << csv_number(t.lea_peak) << ','
       << csv_number(t.classic.min_ttc_reported()) << ',' << csv_number(t.classic.tet) << ','
       << csv_number(t.classic.max_drac) << ',' << csv_number(t.classic.min_thw) << ','
       << csv_number(t.classic.min_abs_dy) << ',' << zones << '\n';
  }
}

}  // namespace perceff

#endif  // PERCEFF__REPORT_HPP_
