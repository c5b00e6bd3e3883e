#pragma once

#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace lpwan {

/// Raised for any invalid scenario, radio or strategy parameter.
class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

using NodeId = int;

struct RadioConfig {
  int spreading_factor = 7;
  double bandwidth_hz = 125000.0;
  int coding_rate_denominator = 5; // 4/5
  int preamble_symbols = 8;
  bool explicit_header = true;
  bool crc_enabled = true;
  bool low_data_rate_optimize = false;
  double tx_power_dbm = 14.0;
  double tx_current_a = 0.028;
  double rx_current_a = 0.0112;
  double supply_voltage_v = 3.3;

  /// Throws ConfigError when a field is out of range.
  void validate() const;

  double symbol_time() const;
};

/// Standard LoRa modem time-on-air (Semtech AN1200.13 / SX127x datasheet).
double compute_toa(int frame_bytes, const RadioConfig& radio);

/// Mandatory silence after a transmission of duration `toa` under a duty cycle.
double compute_toff(double toa, double duty_cycle_percent);

/// Per-channel transmit permission of one node.
class DutyCycleLimiter {
public:
  DutyCycleLimiter(double duty_cycle_percent, int channel_count);

  double duty_cycle_percent() const { return duty_cycle_percent_; }
  int channel_count() const { return static_cast<int>(next_allowed_.size()); }

  double next_allowed(int channel) const { return next_allowed_.at(static_cast<std::size_t>(channel)); }
  bool available(int channel, double now) const { return next_allowed(channel) <= now; }

  /// Channels whose off-time has expired at `now`, in ascending index order.
  std::vector<int> available_channels(double now) const;

  /// Earliest time any channel becomes available.
  double earliest_allowed() const;

  /// Books a transmission starting at `start` lasting `toa`.
  void register_transmission(int channel, double start, double toa);

private:
  double duty_cycle_percent_;
  std::vector<double> next_allowed_;
};

enum class PayloadKind { Packet, Fragment, Nack };

struct Transmission {
  NodeId source = 0;
  int channel = 0;
  double start = 0.0;
  double duration = 0.0;
  double rx_power_dbm = 0.0;
  PayloadKind payload_kind = PayloadKind::Packet;
  int frame_bytes = 1;

  double end() const { return start + duration; }
};

enum class ReceptionOutcome { Delivered, Destroyed };

struct CaptureSettings {
  bool enabled = false;
  double margin_db = 6.0;
};

/// True when the half-open intervals [start, end) of a and b intersect on the same channel.
bool overlaps(const Transmission& a, const Transmission& b);

/// Fate of each transmission in `txs` given all the others in the same list.
/// Hard collision by default; with capture a frame survives when its power
/// beats the aggregate of its overlapping interferers by at least the margin.
std::vector<ReceptionOutcome> resolve_reception(std::span<const Transmission> txs,
                                                double sensitivity_dbm,
                                                const CaptureSettings& capture);

/// Outcome of `target` against an explicit interferer list (all assumed overlapping).
ReceptionOutcome resolve_one(const Transmission& target,
                             std::span<const Transmission* const> interferers,
                             double sensitivity_dbm, const CaptureSettings& capture);

struct PathLoss {
  double exponent = 3.76;
  double reference_loss_db = 7.7;
  double reference_distance_m = 1.0;

  double loss_db(double distance_m) const;
};

double dbm_to_mw(double dbm);
double mw_to_dbm(double mw);

} // namespace lpwan
