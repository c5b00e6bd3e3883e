#include "lpwan/metrics.hpp"

namespace lpwan {

std::optional<double> goodput(std::uint64_t m_correct, std::uint64_t m_sent) {
  if (m_sent == 0)
    return std::nullopt;
  return 100.0 * static_cast<double>(m_correct) / static_cast<double>(m_sent);
}

std::optional<double> app_capacity(std::uint64_t m_correct, std::uint64_t m_asked) {
  if (m_asked == 0)
    return std::nullopt;
  return 100.0 * static_cast<double>(m_correct) / static_cast<double>(m_asked);
}

std::optional<double> energy_efficiency(double energy_joules, std::uint64_t m_correct) {
  if (m_correct == 0)
    return std::nullopt;
  return energy_joules / static_cast<double>(m_correct);
}

double header_overhead(int n_f, int payload_bytes, int header_bytes, const RadioConfig& radio) {
  return header_overhead_with(n_f, payload_bytes, header_bytes,
                              [&](int bytes) { return compute_toa(bytes, radio); });
}

std::vector<OverheadCell> header_overhead_table(const RadioConfig& radio, int payload_bytes,
                                                const std::vector<int>& header_sizes) {
  // n_f = 2..5 for a 200 B payload.
  static constexpr double kRef9[] = {8.93, 19.0, 26.8, 35.71};
  static constexpr double kRef1[] = {5.71, 12.61, 17.14, 22.86};
  std::vector<OverheadCell> out;
  for (int h : header_sizes)
    for (int n_f = 2; n_f <= 5; ++n_f) {
      OverheadCell c{n_f, h, header_overhead(n_f, payload_bytes, h, radio), std::nullopt};
      if (payload_bytes == 200 && h == 9) c.reference = kRef9[n_f - 2];
      if (payload_bytes == 200 && h == 1) c.reference = kRef1[n_f - 2];
      out.push_back(c);
    }
  return out;
}

MetricsAccumulator::MetricsAccumulator(int node_count, const RadioConfig& radio) : radio_(radio) {
  r_.per_node.resize(static_cast<std::size_t>(node_count));
}

NodeMetrics& MetricsAccumulator::at(NodeId node) { return r_.per_node.at(static_cast<std::size_t>(node)); }

void MetricsAccumulator::on_generated(NodeId node) {
  ++r_.m_asked;
  ++at(node).m_asked;
}

void MetricsAccumulator::on_dropped(NodeId) { ++r_.drops; }

void MetricsAccumulator::on_uplink(NodeId node, int frame_bytes, bool first_of_packet, bool retransmission) {
  const double joules = radio_.supply_voltage_v * radio_.tx_current_a * compute_toa(frame_bytes, radio_);
  r_.energy_joules += joules;
  at(node).energy_joules += joules;
  ++r_.uplinks;
  if (retransmission)
    ++r_.retransmissions;
  if (first_of_packet) {
    ++r_.m_sent;
    ++at(node).m_sent;
  }
}

void MetricsAccumulator::on_listen(NodeId node, double seconds) {
  const double joules = radio_.supply_voltage_v * radio_.rx_current_a * seconds;
  r_.energy_joules += joules;
  at(node).energy_joules += joules;
}

void MetricsAccumulator::on_nack_sent(int frame_bytes) {
  ++r_.nacks;
  r_.gateway_energy_joules += radio_.supply_voltage_v * radio_.tx_current_a * compute_toa(frame_bytes, radio_);
}

void MetricsAccumulator::on_correct(NodeId node) {
  ++r_.m_correct;
  ++at(node).m_correct;
}

MetricsReport MetricsAccumulator::report() const {
  MetricsReport out = r_;
  out.goodput_percent = goodput(out.m_correct, out.m_sent);
  out.app_capacity_percent = app_capacity(out.m_correct, out.m_asked);
  out.energy_per_correct_packet = energy_efficiency(out.energy_joules, out.m_correct);
  return out;
}

} // namespace lpwan
