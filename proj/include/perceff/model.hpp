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

#ifndef PERCEFF__MODEL_HPP_
#define PERCEFF__MODEL_HPP_

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace perceff
{

/// Raised for malformed or invalid user input (scene files, config files, flags).
class InputError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

/// Raised when an internal invariant is broken; indicates a bug, not bad input.
class InvariantError : public std::logic_error
{
public:
  using std::logic_error::logic_error;
};

struct Vec2
{
  double x = 0.0;
  double y = 0.0;

  constexpr Vec2 operator+(const Vec2 & o) const { return {x + o.x, y + o.y}; }
  constexpr Vec2 operator-(const Vec2 & o) const { return {x - o.x, y - o.y}; }
  constexpr Vec2 operator*(double s) const { return {x * s, y * s}; }
  constexpr double dot(const Vec2 & o) const { return x * o.x + y * o.y; }
  double norm() const { return std::hypot(x, y); }
};

inline Vec2 unit_heading(double heading) { return {std::cos(heading), std::sin(heading)}; }
inline Vec2 left_normal(const Vec2 & h) { return {-h.y, h.x}; }

/// Kinematic bounds, capability caps, default dimensions and timing used by
/// the gates and the effort metrics. Defaults are the reference configuration.
struct ReachParams
{
  // reachable-set bounds (m/s^2)
  double a_lon_max = 2.0;
  double a_lon_min = -3.0;
  double a_lat_max = 2.0;
  // capability caps (m/s^2)
  double a_brake_max = 10.0;
  double a_lat_cap = 5.0;
  // vehicle & scenario (m)
  double default_length = 4.5;
  double default_width = 1.8;
  double safety_margin = 0.5;
  // timing (s)
  double t_react = 0.3;
  double t_horizon = 5.0;
  double dt = 0.1;
  double t_cycle = 0.5;
  double ttc_tet_threshold = 2.0;

  /// Longitudinal growth rate of the reachable set: the larger magnitude of
  /// the two asymmetric longitudinal bounds.
  double lon_growth() const { return std::max(a_lon_max, std::abs(a_lon_min)); }

  void validate() const
  {
    auto require = [](bool ok, const char * field, const char * what) {
      if (!ok) {
        throw InputError(std::string("invalid parameter ") + field + ": " + what);
      }
    };
    require(a_lon_max > 0, "a_lon_max", "must be > 0");
    require(a_lon_min < 0, "a_lon_min", "must be < 0");
    require(a_lat_max > 0, "a_lat_max", "must be > 0");
    require(a_brake_max > 0, "a_brake_max", "must be > 0");
    require(a_lat_cap > 0, "a_lat_cap", "must be > 0");
    require(dt > 0 && dt <= t_horizon, "dt", "must satisfy 0 < dt <= t_horizon");
    require(t_react >= 0, "t_react", "must be >= 0");
    require(t_cycle > 0, "t_cycle", "must be > 0");
    require(default_length > 0, "default_length", "must be > 0");
    require(default_width > 0, "default_width", "must be > 0");
    require(safety_margin > 0, "safety_margin", "must be > 0");
    require(ttc_tet_threshold > 0, "ttc_tet_threshold", "must be > 0");
  }

  /// Number of gate steps; the scan covers k = 0..steps() inclusive.
  int steps() const { return static_cast<int>(std::floor(t_horizon / dt + 1e-9)); }
};

enum class ClassLabel { kCar, kTruck, kOther };

inline std::string_view to_string(ClassLabel c)
{
  switch (c) {
    case ClassLabel::kCar:
      return "car";
    case ClassLabel::kTruck:
      return "truck";
    case ClassLabel::kOther:
      return "other";
  }
  return "other";
}

/// Unknown labels (pedestrian, bicycle, ...) fold into `other`.
inline ClassLabel parse_class(std::string_view s)
{
  if (s == "car") return ClassLabel::kCar;
  if (s == "truck") return ClassLabel::kTruck;
  return ClassLabel::kOther;
}

/// Strict variant for user-facing filters, where a typo must not silently
/// become `other`.
inline ClassLabel parse_class_strict(std::string_view s)
{
  if (s == "car") return ClassLabel::kCar;
  if (s == "truck") return ClassLabel::kTruck;
  if (s == "other") return ClassLabel::kOther;
  throw InputError("unknown class label '" + std::string(s) + "'");
}

struct AgentState
{
  std::string id;
  ClassLabel class_label = ClassLabel::kCar;
  Vec2 position;
  double heading = 0.0;
  double length = 4.5;
  double width = 1.8;
  Vec2 velocity;
  double accel_lon = 0.0;  // along heading, positive forward
  double confidence = 1.0;
};

struct Frame
{
  double timestamp = 0.0;
  AgentState ego;
  std::vector<AgentState> gt_objects;
  std::vector<AgentState> detections;
};

struct Scene
{
  std::string scene_id;
  std::vector<Frame> frames;
  double t_cycle = 0.5;
};

/// One object expressed in the ego frame along the ego heading.
struct RelativeKinematics
{
  double range = 0.0;      // bumper-to-bumper longitudinal gap R, >= 0
  double d_y = 0.0;        // signed lateral center offset, positive left of ego
  double v_obj_lon = 0.0;  // object speed along ego heading
  double v_ego = 0.0;      // ego speed along ego heading
  double v_rel_y = 0.0;    // object minus ego lateral velocity
  double a_obj_lon = 0.0;
  bool ahead = false;

  double closing_speed() const { return v_ego - v_obj_lon; }
};

/// Projects `obj` into the ego frame. The object's extent is taken as its own
/// length along the ego axis; its heading is ignored here.
inline RelativeKinematics project_to_ego(const AgentState & ego, const AgentState & obj)
{
  const Vec2 h = unit_heading(ego.heading);
  const Vec2 n = left_normal(h);
  const Vec2 dp = obj.position - ego.position;
  const double gap = dp.dot(h);

  RelativeKinematics k;
  k.range = std::max(0.0, std::abs(gap) - 0.5 * (ego.length + obj.length));
  k.ahead = gap > 0.0;
  k.d_y = dp.dot(n);
  k.v_ego = ego.velocity.dot(h);
  k.v_obj_lon = obj.velocity.dot(h);
  k.v_rel_y = (obj.velocity - ego.velocity).dot(n);
  k.a_obj_lon = obj.accel_lon;
  return k;
}

namespace detail
{

using nlohmann::json;

inline std::string where(std::size_t line) { return "line " + std::to_string(line) + ": "; }

inline double number_field(const json & obj, const char * key, std::size_t line,
                           const std::string & ctx)
{
  auto it = obj.find(key);
  if (it == obj.end()) {
    throw InputError(where(line) + ctx + "missing field '" + key + "'");
  }
  if (!it->is_number()) {
    throw InputError(where(line) + ctx + "field '" + key + "' is not a number");
  }
  const double v = it->get<double>();
  if (!std::isfinite(v)) {
    throw InputError(where(line) + ctx + "field '" + key + "' is not finite");
  }
  return v;
}

inline double optional_number(const json & obj, const char * key, double fallback,
                              std::size_t line, const std::string & ctx)
{
  if (!obj.contains(key)) return fallback;
  return number_field(obj, key, line, ctx);
}

inline std::string id_field(const json & obj, std::size_t line, const std::string & ctx)
{
  auto it = obj.find("id");
  if (it == obj.end()) throw InputError(where(line) + ctx + "missing field 'id'");
  if (it->is_string()) return it->get<std::string>();
  if (it->is_number_integer()) return std::to_string(it->get<long long>());
  throw InputError(where(line) + ctx + "field 'id' must be a string or integer");
}

inline void check_dims(const AgentState & a, std::size_t line, const std::string & ctx)
{
  if (!(a.length > 0)) throw InputError(where(line) + ctx + "length must be > 0");
  if (!(a.width > 0)) throw InputError(where(line) + ctx + "width must be > 0");
}

enum class Role { kEgo, kGroundTruth, kDetection };

inline AgentState parse_agent(const json & obj, Role role, const ReachParams & params,
                              std::size_t line, const std::string & ctx)
{
  if (!obj.is_object()) throw InputError(where(line) + ctx + "expected an object");
  AgentState a;
  if (role == Role::kEgo) {
    a.id = "ego";
  } else {
    a.id = id_field(obj, line, ctx);
    auto cls = obj.find("class");
    if (cls == obj.end() || !cls->is_string()) {
      throw InputError(where(line) + ctx + "missing string field 'class'");
    }
    a.class_label = parse_class(cls->get<std::string>());
  }
  a.position = {number_field(obj, "x", line, ctx), number_field(obj, "y", line, ctx)};
  a.heading = number_field(obj, "heading", line, ctx);
  a.velocity = {number_field(obj, "vx", line, ctx), number_field(obj, "vy", line, ctx)};
  a.length = optional_number(obj, "length", params.default_length, line, ctx);
  a.width = optional_number(obj, "width", params.default_width, line, ctx);
  // detections carry no trusted acceleration; phantoms move at constant velocity
  a.accel_lon = role == Role::kDetection ? 0.0 : optional_number(obj, "a", 0.0, line, ctx);
  if (role == Role::kDetection) {
    a.confidence = number_field(obj, "score", line, ctx);
    if (a.confidence < 0.0 || a.confidence > 1.0) {
      throw InputError(where(line) + ctx + "confidence out of range");
    }
  }
  check_dims(a, line, ctx);
  return a;
}

inline std::vector<AgentState> parse_agents(const json & frame, const char * key, Role role,
                                            const ReachParams & params, std::size_t line)
{
  std::vector<AgentState> out;
  auto it = frame.find(key);
  if (it == frame.end()) return out;
  if (!it->is_array()) throw InputError(where(line) + "field '" + key + "' must be an array");
  std::set<std::string> seen;
  for (std::size_t i = 0; i < it->size(); ++i) {
    const std::string ctx = std::string(key) + "[" + std::to_string(i) + "]: ";
    AgentState a = parse_agent((*it)[i], role, params, line, ctx);
    if (!seen.insert(a.id).second) {
      throw InputError(where(line) + ctx + "duplicate id '" + a.id + "'");
    }
    out.push_back(std::move(a));
  }
  return out;
}

}  // namespace detail

/// Parses a line-delimited scene: a header record with `scene_id` and
/// `t_cycle`, then one record per frame.
inline Scene parse_scene(std::istream & in, const ReachParams & params = {})
{
  using nlohmann::json;
  Scene scene;
  std::string text;
  std::size_t line_no = 0;
  bool have_header = false;

  while (std::getline(in, text)) {
    ++line_no;
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
    json rec;
    try {
      rec = json::parse(text);
    } catch (const json::parse_error & e) {
      throw InputError(detail::where(line_no) + "parse error: " + e.what());
    }
    if (!rec.is_object()) throw InputError(detail::where(line_no) + "record is not an object");

    if (!have_header) {
      auto sid = rec.find("scene_id");
      if (sid == rec.end()) throw InputError(detail::where(line_no) + "header missing 'scene_id'");
      scene.scene_id = sid->is_string() ? sid->get<std::string>() : sid->dump();
      scene.t_cycle = detail::number_field(rec, "t_cycle", line_no, "header: ");
      if (!(scene.t_cycle > 0)) throw InputError(detail::where(line_no) + "t_cycle must be > 0");
      have_header = true;
      continue;
    }

    Frame f;
    f.timestamp = detail::number_field(rec, "t", line_no, "");
    auto ego = rec.find("ego");
    if (ego == rec.end()) throw InputError(detail::where(line_no) + "frame missing 'ego' record");
    f.ego = detail::parse_agent(*ego, detail::Role::kEgo, params, line_no, "ego: ");
    f.gt_objects = detail::parse_agents(rec, "gt", detail::Role::kGroundTruth, params, line_no);
    f.detections = detail::parse_agents(rec, "det", detail::Role::kDetection, params, line_no);

    if (!scene.frames.empty()) {
      const double prev = scene.frames.back().timestamp;
      if (!(f.timestamp > prev)) {
        throw InputError(detail::where(line_no) + "timestamps must be strictly increasing");
      }
      const double delta = f.timestamp - prev;
      if (std::abs(delta - scene.t_cycle) > 0.1 * scene.t_cycle) {
        throw InputError(detail::where(line_no) + "timestamp delta " + std::to_string(delta) +
                         " deviates from t_cycle by more than 10%");
      }
    }
    scene.frames.push_back(std::move(f));
  }
  if (!have_header) throw InputError("empty scene: no header record");
  if (scene.frames.empty()) throw InputError("empty scene: no frames");
  return scene;
}

inline Scene load_scene(const std::string & path, const ReachParams & params = {})
{
  std::ifstream in(path);
  if (!in) throw InputError("cannot open scene file '" + path + "'");
  try {
    return parse_scene(in, params);
  } catch (const InputError & e) {
    throw InputError(path + ": " + e.what());
  }
}

/// Applies `key = value` overrides (one per line, `#` comments) on top of
/// `base`. Unknown keys are rejected.
inline ReachParams parse_params(std::istream & in, ReachParams base = {})
{
  struct Key
  {
    const char * name;
    double ReachParams::*field;
  };
  static constexpr Key kKeys[] = {
    {"a_lon_max", &ReachParams::a_lon_max},
    {"a_lon_min", &ReachParams::a_lon_min},
    {"a_lat_max", &ReachParams::a_lat_max},
    {"a_brake_max", &ReachParams::a_brake_max},
    {"a_lat_cap", &ReachParams::a_lat_cap},
    {"default_length", &ReachParams::default_length},
    {"default_width", &ReachParams::default_width},
    {"safety_margin", &ReachParams::safety_margin},
    {"t_react", &ReachParams::t_react},
    {"t_horizon", &ReachParams::t_horizon},
    {"dt", &ReachParams::dt},
    {"t_cycle", &ReachParams::t_cycle},
    {"ttc_tet_threshold", &ReachParams::ttc_tet_threshold},
  };
  auto trim = [](std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return std::string_view{};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
  };

  std::string text;
  std::size_t line_no = 0;
  while (std::getline(in, text)) {
    ++line_no;
    std::string_view line = text;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw InputError(detail::where(line_no) + "expected 'key = value'");
    }
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    const auto * match = std::find_if(std::begin(kKeys), std::end(kKeys),
                                      [&](const Key & k) { return key == k.name; });
    if (match == std::end(kKeys)) {
      throw InputError(detail::where(line_no) + "unknown config key '" + std::string(key) + "'");
    }
    double v = 0.0;
    const auto res = std::from_chars(value.data(), value.data() + value.size(), v);
    if (res.ec != std::errc{} || res.ptr != value.data() + value.size()) {
      throw InputError(detail::where(line_no) + "invalid number for '" + std::string(key) + "'");
    }
    base.*(match->field) = v;
  }
  base.validate();
  return base;
}

inline ReachParams load_params(const std::string & path)
{
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config file '" + path + "'");
  try {
    return parse_params(in);
  } catch (const InputError & e) {
    throw InputError(path + ": " + e.what());
  }
}

}  // namespace perceff

#endif  // PERCEFF__MODEL_HPP_
