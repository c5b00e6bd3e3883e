#include "lpwan/phy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace lpwan {

void RadioConfig::validate() const {
  if (spreading_factor < 7 || spreading_factor > 12)
    throw ConfigError("radio.spreading_factor must be in [7,12]");
  if (bandwidth_hz != 125000.0 && bandwidth_hz != 250000.0 && bandwidth_hz != 500000.0)
    throw ConfigError("radio.bandwidth_hz must be 125000, 250000 or 500000");
  if (coding_rate_denominator < 5 || coding_rate_denominator > 8)
    throw ConfigError("radio.coding_rate_denominator must be in [5,8]");
  if (preamble_symbols < 6)
    throw ConfigError("radio.preamble_symbols must be >= 6");
  if (!(tx_current_a > 0.0) || !(rx_current_a > 0.0) || !(supply_voltage_v > 0.0))
    throw ConfigError("radio currents and supply voltage must be strictly positive");
}

double RadioConfig::symbol_time() const {
  return std::ldexp(1.0, spreading_factor) / bandwidth_hz;
}

double compute_toa(int frame_bytes, const RadioConfig& radio) {
  radio.validate();
  if (frame_bytes < 1)
    throw ConfigError("frame_bytes must be >= 1");

  const int sf = radio.spreading_factor;
  const int crc = radio.crc_enabled ? 1 : 0;
  const int implicit_header = radio.explicit_header ? 0 : 1;
  const int de = radio.low_data_rate_optimize ? 1 : 0;
  const int cr = radio.coding_rate_denominator - 4;

  // Integer numerator keeps the ceiling exact.
  const int numerator = 8 * frame_bytes - 4 * sf + 28 + 16 * crc - 20 * implicit_header;
  const int denominator = 4 * (sf - 2 * de);
  const int blocks = numerator > 0 ? (numerator + denominator - 1) / denominator : 0;
  const int payload_symbols = 8 + blocks * (cr + 4);

  const double preamble = radio.preamble_symbols + 4.25;
  return (preamble + payload_symbols) * radio.symbol_time();
}

double compute_toff(double toa, double duty_cycle_percent) {
  if (!(duty_cycle_percent > 0.0) || duty_cycle_percent > 100.0)
    throw ConfigError("duty_cycle_percent must be in (0, 100]");
  if (toa < 0.0)
    throw ConfigError("toa must be non-negative");
  return toa * (100.0 - duty_cycle_percent) / duty_cycle_percent;
}

DutyCycleLimiter::DutyCycleLimiter(double duty_cycle_percent, int channel_count)
    : duty_cycle_percent_(duty_cycle_percent),
      next_allowed_(static_cast<std::size_t>(channel_count), 0.0) {
  if (!(duty_cycle_percent > 0.0) || duty_cycle_percent > 100.0)
    throw ConfigError("duty_cycle_percent must be in (0, 100]");
  if (channel_count < 1)
    throw ConfigError("at least one channel is required");
}

std::vector<int> DutyCycleLimiter::available_channels(double now) const {
  std::vector<int> out;
  for (std::size_t c = 0; c < next_allowed_.size(); ++c)
    if (next_allowed_[c] <= now)
      out.push_back(static_cast<int>(c));
  return out;
}

double DutyCycleLimiter::earliest_allowed() const {
  return *std::min_element(next_allowed_.begin(), next_allowed_.end());
}

void DutyCycleLimiter::register_transmission(int channel, double start, double toa) {
  const double end = start + toa;
  next_allowed_.at(static_cast<std::size_t>(channel)) = end + compute_toff(toa, duty_cycle_percent_);
}

bool overlaps(const Transmission& a, const Transmission& b) {
  return a.channel == b.channel && a.start < b.end() && b.start < a.end();
}

double dbm_to_mw(double dbm) { return std::pow(10.0, dbm / 10.0); }
double mw_to_dbm(double mw) { return 10.0 * std::log10(mw); }

ReceptionOutcome resolve_one(const Transmission& target,
                             std::span<const Transmission* const> interferers,
                             double sensitivity_dbm, const CaptureSettings& capture) {
  if (target.rx_power_dbm < sensitivity_dbm)
    return ReceptionOutcome::Destroyed;
  if (interferers.empty())
    return ReceptionOutcome::Delivered;
  if (!capture.enabled)
    return ReceptionOutcome::Destroyed;

  double aggregate_mw = 0.0;
  for (const Transmission* other : interferers)
    aggregate_mw += dbm_to_mw(other->rx_power_dbm);
  return target.rx_power_dbm - mw_to_dbm(aggregate_mw) >= capture.margin_db ? ReceptionOutcome::Delivered
                                                                              : ReceptionOutcome::Destroyed;
}

std::vector<ReceptionOutcome> resolve_reception(std::span<const Transmission> txs,
                                                double sensitivity_dbm,
                                                const CaptureSettings& capture) {
  const std::size_t n = txs.size();
  std::vector<ReceptionOutcome> outcome(n, ReceptionOutcome::Delivered);
  if (n == 0)
    return outcome;

  // Sweep in start order; `active` holds indices whose interval may still reach later starts.
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return txs[a].start < txs[b].start; });

  std::vector<std::vector<const Transmission*>> interferers(n);
  std::vector<std::size_t> active;
  for (std::size_t idx : order) {
    const Transmission& cur = txs[idx];
    std::erase_if(active, [&](std::size_t a) { return txs[a].end() <= cur.start; });
    for (std::size_t a : active) {
      if (txs[a].channel != cur.channel)
        continue;
      interferers[a].push_back(&cur);
      interferers[idx].push_back(&txs[a]);
    }
    active.push_back(idx);
  }

  for (std::size_t i = 0; i < n; ++i)
    outcome[i] = resolve_one(txs[i], interferers[i], sensitivity_dbm, capture);
  return outcome;
}

double PathLoss::loss_db(double distance_m) const {
  const double d = std::max(distance_m, reference_distance_m);
  return reference_loss_db + 10.0 * exponent * std::log10(d / reference_distance_m);
}

} // namespace lpwan
