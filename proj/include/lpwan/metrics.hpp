#pragma once

#include "lpwan/phy.hpp"
#include "lpwan/protocol.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace lpwan {

/// Percentage of sent packets received correctly; absent when nothing was sent.
std::optional<double> goodput(std::uint64_t m_correct, std::uint64_t m_sent);

/// Percentage of application-requested packets received correctly.
std::optional<double> app_capacity(std::uint64_t m_correct, std::uint64_t m_asked);

/// Joules spent per correctly received packet; absent when none arrived.
std::optional<double> energy_efficiency(double energy_joules, std::uint64_t m_correct);

/// Extra airtime (hence energy) of sending a payload in n_f fragments instead of one frame, in percent.
double header_overhead(int n_f, int payload_bytes, int header_bytes, const RadioConfig& radio);

/// Same, with an arbitrary time-on-air model (used for what-if tables).
template <typename ToaFn>
double header_overhead_with(int n_f, int payload_bytes, int header_bytes, ToaFn&& toa) {
  if (n_f < 2)
    throw ConfigError("header overhead needs at least 2 fragments");
  if (header_bytes < 0)
    throw ConfigError("header_bytes must be non-negative");
  double fragmented = 0.0;
  for (int size : fragment_payload(payload_bytes, n_f))
    fragmented += toa(size + header_bytes);
  const double whole = toa(payload_bytes + header_bytes);
  return 100.0 * (fragmented / whole - 1.0);
}

struct OverheadCell {
  int n_f = 0;
  int header_bytes = 0;
  double computed = 0.0;               ///< percent
  std::optional<double> reference;     ///< published value for the 200 B payload, 9 B and 1 B headers
};

/// Header overhead for n_f = 2..5 and each header size, with published reference values where they exist.
std::vector<OverheadCell> header_overhead_table(const RadioConfig& radio, int payload_bytes,
                                                const std::vector<int>& header_sizes = {9, 1});

struct NodeMetrics {
  std::uint64_t m_asked = 0;
  std::uint64_t m_sent = 0;
  std::uint64_t m_correct = 0;
  double energy_joules = 0.0;

  friend bool operator==(const NodeMetrics&, const NodeMetrics&) = default;
};

struct MetricsReport {
  std::uint64_t m_asked = 0;
  std::uint64_t m_sent = 0;
  std::uint64_t m_correct = 0;
  double energy_joules = 0.0;         ///< sensor nodes only
  double gateway_energy_joules = 0.0; ///< NACK downlinks
  std::uint64_t uplinks = 0;
  std::uint64_t retransmissions = 0;
  std::uint64_t nacks = 0;
  std::uint64_t drops = 0;
  std::optional<double> goodput_percent;
  std::optional<double> app_capacity_percent;
  std::optional<double> energy_per_correct_packet;
  std::vector<NodeMetrics> per_node;

  friend bool operator==(const MetricsReport&, const MetricsReport&) = default;
};

/// Run-time counters. Fed identically by the engine and by log replay.
class MetricsAccumulator {
public:
  MetricsAccumulator(int node_count, const RadioConfig& radio);

  void on_generated(NodeId node);
  void on_dropped(NodeId node);
  void on_uplink(NodeId node, int frame_bytes, bool first_of_packet, bool retransmission);
  void on_listen(NodeId node, double seconds);
  void on_nack_sent(int frame_bytes);
  void on_correct(NodeId node);

  MetricsReport report() const;

private:
  NodeMetrics& at(NodeId node);

  RadioConfig radio_;
  MetricsReport r_;
};

} // namespace lpwan
