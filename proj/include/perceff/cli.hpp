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

#ifndef PERCEFF__CLI_HPP_
#define PERCEFF__CLI_HPP_

#include <openssl/evp.h>

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iterator>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "perceff/analysis.hpp"
#include "perceff/pipeline.hpp"
#include "perceff/report.hpp"
#include "perceff/synth.hpp"

namespace perceff::cli
{

inline constexpr const char * kVersion = "0.1.0";

enum ExitCode : int { kOk = 0, kInputError = 2, kInternalError = 3 };

namespace detail
{

namespace fs = std::filesystem;

inline std::string read_file(const std::string & path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("unreadable path '" + path + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline std::string sha256_hex(const std::string & data)
{
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw InvariantError("sha256 digest failed");
  }
  std::ostringstream os;
  for (unsigned int i = 0; i < len; ++i) {
    os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
  }
  return os.str();
}

inline void write_file(const std::string & path, const std::string & content)
{
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write '" + path + "'");
  out << content;
}

/// Expands directories into their *.jsonl files; every path must exist.
inline std::vector<std::string> collect_scene_files(const std::vector<std::string> & paths,
                                                    std::vector<std::string> & errors)
{
  std::vector<std::string> files;
  for (const auto & p : paths) {
    std::error_code ec;
    if (fs::is_directory(p, ec)) {
      std::vector<std::string> found;
      for (const auto & entry : fs::directory_iterator(p, ec)) {
        if (entry.is_regular_file() && entry.path().extension() == ".jsonl") {
          found.push_back(entry.path().string());
        }
      }
      std::sort(found.begin(), found.end());
      files.insert(files.end(), found.begin(), found.end());
    } else if (fs::is_regular_file(p, ec)) {
      files.push_back(p);
    } else {
      errors.push_back("unreadable path '" + p + "'");
    }
  }
  return files;
}

inline std::vector<ClassLabel> parse_classes(const std::string & list)
{
  std::vector<ClassLabel> out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    const ClassLabel c = parse_class_strict(item);
    if (std::find(out.begin(), out.end(), c) == out.end()) out.push_back(c);
  }
  if (out.empty()) throw InputError("empty class filter");
  return out;
}

template <typename Fn>
void parallel_for(std::size_t n, unsigned jobs, Fn && fn)
{
  jobs = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
  if (jobs == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> workers;
  for (unsigned w = 0; w < jobs; ++w) {
    workers.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) fn(i);
    });
  }
  for (auto & t : workers) t.join();
}

struct SceneSlot
{
  std::string path;
  std::string digest;
  std::optional<SceneEvaluation> result;
  std::string error;
  bool internal = false;
};

}  // namespace detail

struct EvaluateArgs
{
  std::vector<std::string> scenes;
  std::string gate = "rsb";
  std::string mdr_mode = "consistent";
  std::string classes = "car,truck";
  std::string config;
  std::string out;
  std::string csv;
  unsigned jobs = 1;
  std::string dataset = "dataset";
  std::string pipeline = "pipeline";
  double match_threshold = kDefaultMatchThreshold;
};

inline int cmd_evaluate(const EvaluateArgs & args, std::ostream & out, std::ostream & err)
{
  EvalOptions opts;
  try {
    opts.gate = parse_gate(args.gate);
    opts.mdr_mode = parse_mdr_mode(args.mdr_mode);
    opts.classes = detail::parse_classes(args.classes);
    if (!args.config.empty()) opts.params = load_params(args.config);
    if (!(args.match_threshold > 0)) throw InputError("match threshold must be > 0");
    opts.match_threshold = args.match_threshold;
    if (!args.out.empty() && args.out == args.csv) {
      throw InputError("conflicting flags: --out and --csv name the same file");
    }
    if (args.jobs == 0) throw InputError("--jobs must be >= 1");
  } catch (const InputError & e) {
    err << "error: " << e.what() << '\n';
    return kInputError;
  }

  std::vector<std::string> errors;
  const auto files = detail::collect_scene_files(args.scenes, errors);
  if (files.empty() && errors.empty()) errors.push_back("no scenes found in the given paths");

  std::vector<detail::SceneSlot> slots(files.size());
  detail::parallel_for(files.size(), args.jobs, [&](std::size_t i) {
    auto & slot = slots[i];
    slot.path = files[i];
    try {
      const std::string content = detail::read_file(files[i]);
      slot.digest = detail::sha256_hex(content);
      std::istringstream in(content);
      const Scene scene = parse_scene(in, opts.params);
      slot.result = evaluate_scene(scene, opts);
    } catch (const InputError & e) {
      slot.error = files[i] + ": " + e.what();
    } catch (const InvariantError & e) {
      slot.error = files[i] + ": internal invariant violated: " + e.what();
      slot.internal = true;
    }
  });

  bool internal = false;
  for (const auto & s : slots) {
    if (!s.error.empty()) errors.push_back(s.error);
    internal = internal || s.internal;
  }
  if (!errors.empty()) {
    for (const auto & e : errors) err << "error: " << e << '\n';
    return internal ? kInternalError : kInputError;
  }

  // per-class cells, merged in scene order
  std::vector<TrackSummary> all_tracks;
  json rows = json::array();
  json histograms = json::array();
  for (ClassLabel cls : opts.classes) {
    std::vector<TrackSummary> cell;
    std::vector<FrameMatchResult> matches;
    for (const auto & s : slots) {
      for (const auto & ce : s.result->classes) {
        if (ce.class_label != cls) continue;
        cell.insert(cell.end(), ce.summaries.begin(), ce.summaries.end());
        matches.insert(matches.end(), ce.matches.begin(), ce.matches.end());
      }
    }
    const AggregateRow row = aggregate(cell, precision_recall(matches), cls, args.dataset, args.pipeline);
    rows.push_back(to_json(row));
    for (const auto & h : severity_histogram(cell)) {
      json jh = to_json(h);
      jh["class"] = to_string(cls);
      histograms.push_back(std::move(jh));
    }
    all_tracks.insert(all_tracks.end(), cell.begin(), cell.end());
  }
  std::stable_sort(all_tracks.begin(), all_tracks.end(), [](const TrackSummary & a, const TrackSummary & b) {
    return a.scene_id < b.scene_id;
  });

  json correlations = json::array();
  for (const auto & m : correlation_table(all_tracks, opts.gate)) correlations.push_back(to_json(m));
  json tracks = json::array();
  for (const auto & t : all_tracks) tracks.push_back(to_json(t));

  json inputs = json::array();
  for (const auto & s : slots) inputs.push_back({{"path", s.path}, {"sha256", s.digest}});
  json classes = json::array();
  for (ClassLabel c : opts.classes) classes.push_back(to_string(c));

  json report{
    {"schema_version", kReportSchemaVersion},
    {"manifest",
     {{"tool", "perceff"},
      {"version", kVersion},
      {"params", to_json(opts.params)},
      {"gate", to_string(opts.gate)},
      {"mdr_mode", to_string(opts.mdr_mode)},
      {"classes", classes},
      {"match_threshold", opts.match_threshold},
      {"dataset", args.dataset},
      {"pipeline", args.pipeline},
      {"inputs", inputs}}},
    {"metadata", {{"correlation_population", kCorrelationPopulation}, {"ttc_report_cap", kTtcReportCap}}},
    {"aggregates", rows},
    {"histograms", histograms},
    {"correlations", correlations},
    {"tracks", tracks},
  };

  try {
    const std::string text = report.dump(2) + "\n";
    if (args.out.empty()) {
      out << text;
    } else {
      detail::write_file(args.out, text);
    }
    if (!args.csv.empty()) {
      std::ostringstream csv;
      write_tracks_csv(csv, all_tracks);
      detail::write_file(args.csv, csv.str());
    }
  } catch (const InputError & e) {
    err << "error: " << e.what() << '\n';
    return kInputError;
  }
  return kOk;
}

struct CorrelateArgs
{
  std::vector<std::string> reports;
  std::string out;
};

inline int cmd_correlate(const CorrelateArgs & args, std::ostream & out, std::ostream & err)
{
  std::map<GateKind, std::vector<TrackSummary>> by_gate;
  std::optional<int> schema;
  try {
    if (args.reports.empty()) throw InputError("no report files given");
    for (const auto & path : args.reports) {
      json j;
      try {
        j = json::parse(detail::read_file(path));
      } catch (const json::exception & e) {
        throw InputError(path + ": " + e.what());
      }
      if (!j.is_object() || !j.contains("schema_version") || !j.contains("tracks")) {
        throw InputError(path + ": not an evaluation report");
      }
      const int v = j.at("schema_version").get<int>();
      if (schema && *schema != v) throw InputError("mixed incompatible schema versions");
      if (v != kReportSchemaVersion) {
        throw InputError(path + ": unsupported schema version " + std::to_string(v));
      }
      schema = v;
      for (const auto & jt : j.at("tracks")) {
        TrackSummary t = track_summary_from_json(jt);
        by_gate[t.gate].push_back(std::move(t));
      }
      // a report without tracks still declares its gate
      by_gate[parse_gate(j.at("manifest").at("gate").get<std::string>())];
    }
  } catch (const InputError & e) {
    err << "error: " << e.what() << '\n';
    return kInputError;
  } catch (const json::exception & e) {
    err << "error: malformed report: " << e.what() << '\n';
    return kInputError;
  }

  json gates = json::object();
  for (const auto & [gate, tracks] : by_gate) {
    json ms = json::array();
    for (const auto & m : correlation_table(tracks, gate)) ms.push_back(to_json(m));
    gates[std::string(to_string(gate))] = ms;
  }
  json result{{"schema_version", kReportSchemaVersion},
              {"metadata", {{"correlation_population", kCorrelationPopulation}}},
              {"reports", args.reports},
              {"gates", gates}};
  const std::string text = result.dump(2) + "\n";
  try {
    if (args.out.empty()) {
      out << text;
    } else {
      detail::write_file(args.out, text);
    }
  } catch (const InputError & e) {
    err << "error: " << e.what() << '\n';
    return kInputError;
  }
  return kOk;
}

struct SynthArgs
{
  synth::ScenarioTemplate scenario;
  std::string out;
  std::string sidecar;
  std::string config;
};

inline int cmd_synth(const SynthArgs & args, std::ostream & out, std::ostream & err)
{
  try {
    const ReachParams params = args.config.empty() ? ReachParams{} : load_params(args.config);
    const auto gen = synth::generate(args.scenario, params);
    std::ostringstream scene;
    synth::write_scene(scene, gen.scene);
    const std::string sidecar = synth::to_json(gen.expected).dump(2) + "\n";
    if (args.out.empty()) {
      out << scene.str();
    } else {
      detail::write_file(args.out, scene.str());
    }
    if (!args.sidecar.empty()) detail::write_file(args.sidecar, sidecar);
  } catch (const InputError & e) {
    err << "error: " << e.what() << '\n';
    return kInputError;
  }
  return kOk;
}

/// Entry point shared by the executable and the tests. `argv[0]` is the
/// program name.
inline int run(const std::vector<std::string> & argv, std::ostream & out, std::ostream & err)
{
  CLI::App app{"Perception-error effort evaluation", "perceff"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  EvaluateArgs ev;
  auto * evaluate = app.add_subcommand("evaluate", "Score FP/FN error tracks of one or more scenes");
  evaluate->add_option("--scenes", ev.scenes, "Scene files or directories of *.jsonl")->required();
  evaluate->add_option("--gate", ev.gate, "Collision gate: rsb or sat")->capture_default_str();
  evaluate->add_option("--mdr-mode", ev.mdr_mode, "consistent or as-printed")->capture_default_str();
  evaluate->add_option("--classes", ev.classes, "Comma-separated class filter")->capture_default_str();
  evaluate->add_option("--config", ev.config, "key = value parameter overrides");
  evaluate->add_option("--out", ev.out, "Report JSON path (stdout when omitted)");
  evaluate->add_option("--csv", ev.csv, "Per-track CSV path");
  evaluate->add_option("--jobs", ev.jobs, "Scenes processed concurrently")->capture_default_str();
  evaluate->add_option("--dataset", ev.dataset, "Dataset id for the aggregate rows")->capture_default_str();
  evaluate->add_option("--pipeline", ev.pipeline, "Pipeline id for the aggregate rows")->capture_default_str();
  evaluate->add_option("--match-threshold", ev.match_threshold, "Center-distance match threshold (m)")
    ->capture_default_str();

  CorrelateArgs co;
  auto * correlate = app.add_subcommand("correlate", "Spearman tables from evaluation reports");
  correlate->add_option("--reports", co.reports, "Report JSON files")->required();
  correlate->add_option("--out", co.out, "Output JSON path (stdout when omitted)");

  SynthArgs sy;
  std::string template_name;
  double gap = 0, v_ego = 0, v_obj = 0, a_obj = 0, d_y = 0, v_lat = 0, t_cycle = 0;
  int frames = 0;
  auto * syn = app.add_subcommand("synth", "Generate a scene with a known injected error");
  syn->add_option("--template", template_name,
                  "lead-miss | phantom-static | cut-in-converge | adjacent-pass")->required();
  auto * o_frames = syn->add_option("--frames", frames, "Number of frames");
  auto * o_tcycle = syn->add_option("--t-cycle", t_cycle, "Frame period (s)");
  auto * o_gap = syn->add_option("--gap", gap, "Initial bumper gap (m)");
  auto * o_vego = syn->add_option("--v-ego", v_ego, "Ego speed (m/s)");
  auto * o_vobj = syn->add_option("--v-obj", v_obj, "Object speed (m/s)");
  auto * o_aobj = syn->add_option("--a-obj", a_obj, "Object longitudinal acceleration (m/s^2)");
  auto * o_dy = syn->add_option("--d-y", d_y, "Lateral offset (m), positive left");
  auto * o_vlat = syn->add_option("--v-lat", v_lat, "Object lateral speed (m/s)");
  syn->add_option("--out", sy.out, "Scene output path (stdout when omitted)");
  syn->add_option("--sidecar", sy.sidecar, "Expected-values output path");
  syn->add_option("--config", sy.config, "key = value parameter overrides");

  std::vector<std::string> args(argv.rbegin(), argv.rend());
  if (!args.empty()) args.pop_back();
  try {
    app.parse(args);
  } catch (const CLI::ParseError & e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kInputError;
  }

  try {
    if (*evaluate) return cmd_evaluate(ev, out, err);
    if (*correlate) return cmd_correlate(co, out, err);
    if (*syn) {
      const auto kind = synth::parse_template(template_name);
      sy.scenario = synth::defaults(kind);
      auto set = [](CLI::Option * o, auto & slot, auto value) {
        if (o->count() > 0) slot = value;
      };
      set(o_frames, sy.scenario.n_frames, frames);
      set(o_tcycle, sy.scenario.t_cycle, t_cycle);
      set(o_gap, sy.scenario.gap, gap);
      set(o_vego, sy.scenario.v_ego, v_ego);
      set(o_vobj, sy.scenario.v_obj, v_obj);
      set(o_aobj, sy.scenario.a_obj, a_obj);
      set(o_dy, sy.scenario.d_y, d_y);
      set(o_vlat, sy.scenario.v_lat, v_lat);
      return cmd_synth(sy, out, err);
    }
  } catch (const InputError & e) {
    err << "error: " << e.what() << '\n';
    return kInputError;
  } catch (const InvariantError & e) {
    err << "internal error: " << e.what() << '\n';
    return kInternalError;
  }
  return kInputError;
}

}  // namespace perceff::cli

#endif  // PERCEFF__CLI_HPP_
