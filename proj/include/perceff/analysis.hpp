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

#ifndef PERCEFF__ANALYSIS_HPP_
#define PERCEFF__ANALYSIS_HPP_

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "perceff/classic.hpp"
#include "perceff/effort.hpp"
#include "perceff/gate.hpp"
#include "perceff/matching.hpp"
#include "perceff/model.hpp"

namespace perceff
{

/// Thresholds used by the aggregate counts.
inline constexpr double kCriticalBrake = 4.0;   // m/s^2, inclusive
inline constexpr double kTimeCriticalTcoll = 2.0;  // s, exclusive

/// Flat per-track record: effort, classical representatives and zones. This
/// is what reports and CSV rows carry, and what correlation runs on.
struct TrackSummary
{
  std::string scene_id;
  ErrorKind kind = ErrorKind::kFN;
  std::string identity;
  ClassLabel class_label = ClassLabel::kCar;
  GateKind gate = GateKind::kRSB;
  std::size_t n_frames = 0;
  std::size_t n_gated = 0;
  double duration = 0.0;
  std::optional<double> fsr;
  std::optional<double> mdr;
  double lea_peak = 0.0;
  double stn = 0.0;
  double max_a_brake = 0.0;
  std::optional<double> min_t_coll;
  ClassicScores classic;
};

inline TrackSummary summarize(const TrackEffort & te, const ClassicScores & cs, GateKind gate,
                              const ReachParams & params)
{
  TrackSummary s;
  s.scene_id = te.scene_id;
  s.kind = te.kind;
  s.identity = te.identity;
  s.class_label = te.class_label;
  s.gate = gate;
  s.n_frames = te.frames.size();
  s.n_gated = te.n_gated;
  s.duration = te.duration;
  s.fsr = te.fsr;
  s.mdr = te.mdr;
  s.lea_peak = te.lea_peak;
  s.stn = stn(te.lea_peak, params);
  s.max_a_brake = te.max_a_brake;
  for (const auto & f : te.frames) {
    if (f.gated && f.t_coll && (!s.min_t_coll || *f.t_coll < *s.min_t_coll)) s.min_t_coll = f.t_coll;
  }
  s.classic = cs;
  return s;
}

/// Severity zones attached to a track: MDR (FN) or FSR (FP), LEA, TTC, BTN.
inline std::vector<std::pair<Metric, SeverityZone>> track_zones(const TrackSummary & t)
{
  std::vector<std::pair<Metric, SeverityZone>> z;
  if (t.kind == ErrorKind::kFN) {
    z.emplace_back(Metric::kMDR, classify(Metric::kMDR, t.mdr.value_or(0.0)));
  } else {
    z.emplace_back(Metric::kFSR, classify(Metric::kFSR, t.fsr.value_or(0.0)));
  }
  z.emplace_back(Metric::kLEA, classify(Metric::kLEA, t.lea_peak));
  z.emplace_back(Metric::kTTC, classify(Metric::kTTC, t.classic.min_ttc));
  z.emplace_back(Metric::kBTN, classify(Metric::kBTN, t.classic.max_btn.value_or(0.0)));
  return z;
}

struct AggregateRow
{
  std::string dataset_id;
  std::string pipeline_id;
  ClassLabel class_label = ClassLabel::kCar;
  std::size_t fn_tracks = 0;
  std::size_t fp_tracks = 0;
  std::size_t fn_scored = 0;  // tracks with at least one gated frame
  std::size_t fp_scored = 0;
  std::size_t critical_fn = 0;
  std::size_t critical_fp = 0;
  std::size_t tc = 0;
  double mean_mdr = 0.0, mean_fsr = 0.0, mean_lea = 0.0;
  double cum_mdr = 0.0, cum_fsr = 0.0, cum_lea = 0.0;
  double worst_mdr = 0.0, worst_fsr = 0.0, worst_lea = 0.0;
  double precision = 1.0;
  double recall = 1.0;
};

/// Aggregates one (dataset, pipeline, class) cell. Means run over every
/// track of the applicable kind; a track without gated frames contributes
/// zero effort.
inline AggregateRow aggregate(std::span<const TrackSummary> tracks, const PrecisionRecall & pr,
                              ClassLabel cls, std::string dataset_id = "dataset",
                              std::string pipeline_id = "pipeline")
{
  AggregateRow row;
  row.dataset_id = std::move(dataset_id);
  row.pipeline_id = std::move(pipeline_id);
  row.class_label = cls;
  row.precision = pr.precision;
  row.recall = pr.recall;
  for (const auto & t : tracks) {
    const bool scored = t.n_gated > 0;
    if (t.kind == ErrorKind::kFN) {
      const double mdr = t.mdr.value_or(0.0);
      ++row.fn_tracks;
      row.fn_scored += scored;
      row.critical_fn += mdr >= kCriticalBrake;
      row.cum_mdr += mdr;
      row.worst_mdr = std::max(row.worst_mdr, mdr);
    } else {
      const double fsr = t.fsr.value_or(0.0);
      ++row.fp_tracks;
      row.fp_scored += scored;
      row.critical_fp += t.max_a_brake >= kCriticalBrake;
      row.cum_fsr += fsr;
      row.worst_fsr = std::max(row.worst_fsr, fsr);
    }
    row.tc += t.min_t_coll && *t.min_t_coll < kTimeCriticalTcoll;
    row.cum_lea += t.lea_peak;
    row.worst_lea = std::max(row.worst_lea, t.lea_peak);
  }
  auto mean = [](double sum, std::size_t n) { return n == 0 ? 0.0 : sum / static_cast<double>(n); };
  row.mean_mdr = mean(row.cum_mdr, row.fn_tracks);
  row.mean_fsr = mean(row.cum_fsr, row.fp_tracks);
  row.mean_lea = mean(row.cum_lea, row.fn_tracks + row.fp_tracks);
  return row;
}

struct HistogramEntry
{
  std::string population;  // "FN", "FP" or "ALL"
  Metric metric = Metric::kMDR;
  std::array<std::size_t, 4> counts{};  // indexed by SeverityZone

  std::size_t total() const { return std::accumulate(counts.begin(), counts.end(), std::size_t{0}); }
};

/// FN tracks by MDR zone, FP tracks by FSR zone, all tracks by LEA zone.
/// Groups without tracks are omitted.
inline std::vector<HistogramEntry> severity_histogram(std::span<const TrackSummary> tracks)
{
  HistogramEntry fn{"FN", Metric::kMDR, {}};
  HistogramEntry fp{"FP", Metric::kFSR, {}};
  HistogramEntry all{"ALL", Metric::kLEA, {}};
  for (const auto & t : tracks) {
    if (t.kind == ErrorKind::kFN) {
      ++fn.counts[static_cast<std::size_t>(classify(Metric::kMDR, t.mdr.value_or(0.0)))];
    } else {
      ++fp.counts[static_cast<std::size_t>(classify(Metric::kFSR, t.fsr.value_or(0.0)))];
    }
    ++all.counts[static_cast<std::size_t>(classify(Metric::kLEA, t.lea_peak))];
  }
  std::vector<HistogramEntry> out;
  for (auto * e : {&fn, &fp, &all}) {
    if (e->total() > 0) out.push_back(*e);
  }
  return out;
}

/// Fractional ranks (1-based); tied values share the mean of their ranks.
inline std::vector<double> average_ranks(std::span<const double> v)
{
  const std::size_t n = v.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> rank(n, 0.0);
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j + 1 < n && v[order[j + 1]] == v[order[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) rank[order[k]] = r;
    i = j + 1;
  }
  return rank;
}

class CorrelationError : public std::invalid_argument
{
public:
  CorrelationError(const std::string & reason, const std::string & what)
  : std::invalid_argument(what), reason_(reason)
  {
  }
  const std::string & reason() const { return reason_; }

private:
  std::string reason_;
};

/// Spearman's rho as the Pearson correlation of average ranks.
inline double spearman(std::span<const double> x, std::span<const double> y)
{
  if (x.size() != y.size()) throw CorrelationError("length_mismatch", "spearman: length mismatch");
  if (x.size() < 2) throw CorrelationError("insufficient", "spearman: need at least 2 samples");
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  const double n = static_cast<double>(x.size());
  const double mean = (n + 1.0) / 2.0;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    const double dx = rx[i] - mean;
    const double dy = ry[i] - mean;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) throw CorrelationError("degenerate", "spearman: constant input");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

struct CorrelationEntry
{
  std::optional<double> rho;
  std::string reason;  // set when rho is absent
  std::size_t n = 0;
};

struct CorrelationMatrix
{
  GateKind gate = GateKind::kRSB;
  ErrorKind kind = ErrorKind::kFN;
  std::vector<std::string> rows;
  std::vector<std::string> cols;
  std::vector<std::vector<CorrelationEntry>> entries;
};

inline const std::vector<std::string> & correlation_columns()
{
  static const std::vector<std::string> cols{"TTC", "DRAC", "THW", "TET", "d_y"};
  return cols;
}

namespace detail
{

inline std::optional<double> column_value(const TrackSummary & t, const std::string & col)
{
  if (col == "TTC") return t.classic.min_ttc;
  if (col == "DRAC") return t.classic.max_drac;
  if (col == "THW") return t.classic.min_thw;
  if (col == "TET") return t.classic.tet;
  if (col == "d_y") return t.classic.min_abs_dy;
  return std::nullopt;
}

inline std::optional<double> row_value(const TrackSummary & t, const std::string & row)
{
  if (row == "MDR") return t.mdr;
  if (row == "FSR") return t.fsr;
  if (row == "LEA") return t.lea_peak;
  return std::nullopt;
}

}  // namespace detail

/// Spearman matrices of effort metrics against classical representatives,
/// one per error kind (FN: MDR, LEA; FP: FSR, LEA), over gated tracks of
/// `gate`. Pairs where either value is undefined are dropped per entry.
inline std::vector<CorrelationMatrix> correlation_table(std::span<const TrackSummary> tracks,
                                                        GateKind gate)
{
  std::vector<CorrelationMatrix> out;
  for (ErrorKind kind : {ErrorKind::kFN, ErrorKind::kFP}) {
    CorrelationMatrix m;
    m.gate = gate;
    m.kind = kind;
    m.rows = kind == ErrorKind::kFN ? std::vector<std::string>{"MDR", "LEA"}
                                    : std::vector<std::string>{"FSR", "LEA"};
    m.cols = correlation_columns();
    for (const auto & row : m.rows) {
      std::vector<CorrelationEntry> line;
      for (const auto & col : m.cols) {
        std::vector<double> xs, ys;
        for (const auto & t : tracks) {
          if (t.kind != kind || t.gate != gate || t.n_gated == 0) continue;
          const auto x = detail::row_value(t, row);
          const auto y = detail::column_value(t, col);
          if (!x || !y) continue;
          xs.push_back(*x);
          ys.push_back(*y);
        }
        CorrelationEntry e;
        e.n = xs.size();
        try {
          e.rho = spearman(xs, ys);
        } catch (const CorrelationError & err) {
          e.reason = err.reason();
        }
        line.push_back(std::move(e));
      }
      m.entries.push_back(std::move(line));
    }
    out.push_back(std::move(m));
  }
  return out;
}

}  // namespace perceff

#endif  // PERCEFF__ANALYSIS_HPP_
