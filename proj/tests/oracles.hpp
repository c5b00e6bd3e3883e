#pragma once
// Independent re-derivations used as test oracles. Nothing here calls into the
// code under test except for plain data types.

#include "lpwan/event_log.hpp"
#include "lpwan/phy.hpp"

#include <cmath>
#include <map>
#include <vector>

namespace oracle {

/// LoRa time on air written straight from the SX1276 datasheet (section 4.1.1.7),
/// in floating point with std::ceil, independent of the integer version in phy.cpp.
inline double toa(int payload_bytes, int sf, double bw_hz, int cr_denominator, int preamble, bool explicit_header,
                  bool crc, bool ldro) {
  const double t_sym = std::pow(2.0, sf) / bw_hz;
  const double t_preamble = (preamble + 4.25) * t_sym;
  const double h = explicit_header ? 0.0 : 1.0;
  const double de = ldro ? 1.0 : 0.0;
  const double c = crc ? 1.0 : 0.0;
  const double num = 8.0 * payload_bytes - 4.0 * sf + 28.0 + 16.0 * c - 20.0 * h;
  const double n_payload = 8.0 + std::max(std::ceil(num / (4.0 * (sf - 2.0 * de))) * (cr_denominator), 0.0);
  return t_preamble + n_payload * t_sym;
}

inline double toa(int payload_bytes, const lpwan::RadioConfig& r) {
  return toa(payload_bytes, r.spreading_factor, r.bandwidth_hz, r.coding_rate_denominator, r.preamble_symbols,
             r.explicit_header, r.crc_enabled, r.low_data_rate_optimize);
}

/// Every pair checked; power sums done in linear milliwatts.
inline std::vector<bool> delivered_bruteforce(const std::vector<lpwan::Transmission>& txs, double sensitivity,
                                              bool capture, double margin_db) {
  std::vector<bool> out(txs.size(), false);
  for (std::size_t i = 0; i < txs.size(); ++i) {
    const auto& a = txs[i];
    if (a.rx_power_dbm < sensitivity)
      continue;
    double interference_mw = 0.0;
    bool any = false;
    for (std::size_t j = 0; j < txs.size(); ++j) {
      if (i == j)
        continue;
      const auto& b = txs[j];
      const bool overlap = a.channel == b.channel && a.start < b.start + b.duration && b.start < a.start + a.duration;
      if (overlap) {
        any = true;
        interference_mw += std::pow(10.0, b.rx_power_dbm / 10.0);
      }
    }
    if (!any)
      out[i] = true;
    else if (capture)
      out[i] = a.rx_power_dbm - 10.0 * std::log10(interference_mw) >= margin_db;
  }
  return out;
}

/// Node energy recomputed from a log: V*I_tx*ToA per uplink plus V*I_rx per listening interval.
inline double node_energy_from_log(const lpwan::EventLog& log, const lpwan::RadioConfig& r) {
  double e = 0.0;
  std::map<int, double> open;
  for (const auto& rec : log.records) {
    if (rec.kind == lpwan::EventKind::TxStart)
      e += r.supply_voltage_v * r.tx_current_a * toa(rec.bytes, r);
    else if (rec.kind == lpwan::EventKind::RxWindowOpen)
      open[rec.subject] = rec.time;
    else if (rec.kind == lpwan::EventKind::RxWindowClose)
      e += r.supply_voltage_v * r.rx_current_a * (rec.time - open.at(rec.subject));
  }
  return e;
}

} // namespace oracle
