#pragma once

#include "lpwan/engine.hpp"

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace lpwan {

/// Density x strategy x seed grid.
struct SweepSpec {
  ScenarioConfig base;
  std::vector<int> node_counts;
  std::vector<Strategy> strategies; ///< plotted strategies
  std::vector<Strategy> extra;      ///< only used for the gains analysis
  int seeds_per_point = 20;

  /// Nodes 1..50; Aloha, Buffered Aloha, frag_retx n_f=2..5 with one session;
  /// extra: frag-only and two-session variants of n_f=2..5.
  static SweepSpec defaults(const ScenarioConfig& base = {});

  std::vector<Strategy> all_strategies() const;
  void validate() const;
};

struct SweepJob {
  Strategy strategy;
  int nodes = 0;
  std::uint64_t seed = 0;

  friend bool operator==(const SweepJob&, const SweepJob&) = default;
};

struct RunRecord {
  SweepJob job;
  std::optional<MetricsReport> metrics; ///< empty when the run failed
  std::string error;

  friend bool operator==(const RunRecord&, const RunRecord&) = default;
};

/// Strategy-major, then density, then seed. Seed k of every point is base.seed + k,
/// so all strategies see the same traffic phases and positions.
std::vector<SweepJob> plan_sweep(const SweepSpec& spec);

ScenarioConfig job_config(const ScenarioConfig& base, const SweepJob& job);

/// Reference executor: one run after another.
std::vector<RunRecord> execute_serial(const SweepSpec& spec);

/// OpenMP executor over independent runs; same output order as execute_serial.
std::vector<RunRecord> execute_parallel(const SweepSpec& spec, int jobs);

struct Stat {
  double mean = 0.0;
  int n = 0;
  std::optional<double> ci95_half; ///< Student-t half width; needs n >= 2

  friend bool operator==(const Stat&, const Stat&) = default;
};

/// Mean of the defined values; CI only when `with_ci`.
std::optional<Stat> summarize(const std::vector<double>& values, bool with_ci);

struct PointSummary {
  std::string strategy; ///< Strategy::label()
  int nodes = 0;
  int runs = 0; ///< successful runs
  std::optional<Stat> goodput;
  std::optional<Stat> app_capacity;
  std::optional<Stat> energy_per_packet;
};

struct GainRow {
  std::string name; ///< frag_over_ba, retx1_over_frag, retx2_over_retx1
  int n_f = 0;
  double value = 0.0; ///< mean over densities of the goodput difference, percentage points
};

struct SweepSummary {
  std::vector<PointSummary> points;
  std::vector<GainRow> gains;
  bool with_ci = false;

  const PointSummary* find(const std::string& strategy, int nodes) const;
  std::optional<double> gain(const std::string& name, int n_f) const;
};

/// Failed runs are skipped.
SweepSummary aggregate(const SweepSpec& spec, const std::vector<RunRecord>& records);

/// One row per run; header_overhead_pct is the strategy's static fragmentation overhead under `base`.
void write_runs_csv(std::ostream& out, const ScenarioConfig& base, const std::vector<RunRecord>& records);
void write_summary_csv(std::ostream& out, const SweepSummary& summary);

/// Writes runs.csv, summary.csv and the four SVG plots into `dir`. Returns the paths written.
std::vector<std::string> write_sweep_outputs(const std::string& dir, const SweepSpec& spec,
                                             const std::vector<RunRecord>& records, const SweepSummary& summary);

} // namespace lpwan
