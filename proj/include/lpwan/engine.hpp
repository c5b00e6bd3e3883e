#pragma once

#include "lpwan/event_log.hpp"
#include "lpwan/metrics.hpp"
#include "lpwan/phy.hpp"
#include "lpwan/protocol.hpp"
#include "lpwan/rng.hpp"

#include <cstdint>
#include <vector>

namespace lpwan {

enum class TrafficModel { Periodic, Poisson };

struct TrafficConfig {
  TrafficModel model = TrafficModel::Periodic;
  double interval_s = 60.0;       ///< period, or mean inter-arrival for Poisson
  int packets_per_node = 100;     ///< M_asked per node
  double phase_window_s = 0.0;    ///< first arrival drawn in [0, window); 0 means one interval
};

struct GeometryConfig {
  double radius_m = 2000.0;
  PathLoss path_loss;
};

struct ScenarioConfig {
  int node_count = 1;
  std::vector<double> channel_frequencies_hz{868.1e6};
  RadioConfig radio;
  double duty_cycle_percent = 1.0;
  Strategy strategy = Strategy::buffered_aloha();
  int payload_bytes = 200;
  int fragment_header_bytes = 9;
  int nack_header_bytes = 9;
  TrafficConfig traffic;
  double sim_duration_s = 0.0; ///< 0 runs until every node has drained
  std::uint64_t seed = 1;
  CaptureSettings capture;
  double sensitivity_dbm = -123.0;
  GeometryConfig geometry;
  double rx1_delay_s = 1.0;
  double rx2_delay_s = 2.0;
  double rx_window_symbols = 8.0;
  double tx_jitter_s = 0.0; ///< extra uniform delay before a deferred transmission

  int channel_count() const { return static_cast<int>(channel_frequencies_hz.size()); }
  double phase_window() const;
  /// Configured horizon, or infinity when the run drains.
  double effective_duration() const;
  ProtocolParams protocol_params() const;

  /// Throws ConfigError on the first violated constraint.
  void validate() const;
};

/// Arrival times of one node's application packets.
std::vector<double> generate_traffic(const TrafficConfig& traffic, std::mt19937_64& stream);

/// Periodic arrivals at an explicit phase.
std::vector<double> periodic_arrivals(double phase_s, double interval_s, int count);

struct RunResult {
  MetricsReport metrics;
  EventLog log;
};

struct RunOptions {
  bool record_log = true;
};

/// One deterministic simulation. Same config (including seed) gives the same log.
RunResult run(const ScenarioConfig& config, const RunOptions& options = {});

} // namespace lpwan
