#pragma once

#include "lpwan/phy.hpp"

#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace lpwan {

using PacketId = std::int64_t;

enum class StrategyKind { Aloha, BufferedAloha, FragNoRetx, FragRetx };

struct Strategy {
  StrategyKind kind = StrategyKind::BufferedAloha;
  int fragments_per_packet = 1;
  int retx_sessions_max = 0;

  static Strategy aloha() { return {StrategyKind::Aloha, 1, 0}; }
  static Strategy buffered_aloha() { return {StrategyKind::BufferedAloha, 1, 0}; }
  static Strategy frag(int n_f) { return {StrategyKind::FragNoRetx, n_f, 0}; }
  static Strategy frag_retx(int n_f, int sessions) { return {StrategyKind::FragRetx, n_f, sessions}; }

  bool fragmented() const { return kind == StrategyKind::FragNoRetx || kind == StrategyKind::FragRetx; }
  bool buffered() const { return kind != StrategyKind::Aloha; }
  bool uses_nack() const { return kind == StrategyKind::FragRetx; }

  void validate() const;

  /// Short label used in CSV output, e.g. "frag_retx" or "aloha".
  std::string_view kind_name() const;
  /// Unique label including parameters, e.g. "frag_retx_n3_s1".
  std::string label() const;

  friend bool operator==(const Strategy&, const Strategy&) = default;
};

StrategyKind parse_strategy_kind(std::string_view name);

/// Payload split into n_f near-equal fragments, larger ones first.
std::vector<int> fragment_payload(int payload_bytes, int n_f);

struct AppPacket {
  PacketId packet_id = 0;
  NodeId node = 0;
  int payload_bytes = 200;
  double generated_at = 0.0;
};

/// One on-air uplink: a whole packet (seq_index < 0) or one fragment.
struct Fragment {
  PacketId packet_id = 0;
  int seq_index = -1;
  int payload_bytes = 0;
  int header_bytes = 9;
  bool requests_nack = false;
  bool first_of_packet = false; ///< first transmission of the packet (counts toward M_sent)
  bool retransmission = false;
  int channel = 0;

  bool is_fragment() const { return seq_index >= 0; }
  int frame_bytes() const { return payload_bytes + header_bytes; }
};

/// Fragment reception status, bit i set iff fragment i arrived. Serialises LSB-first per byte.
class FragmentBitmap {
public:
  FragmentBitmap() = default;
  explicit FragmentBitmap(int n_f);

  int size() const { return n_f_; }
  bool test(int i) const;
  /// Returns false when the bit was already set.
  bool set(int i);
  bool all() const;
  int count() const;
  std::vector<int> missing() const;
  const std::vector<std::uint8_t>& bytes() const { return bytes_; }

  /// "101" with fragment 0 first.
  std::string to_string() const;
  static FragmentBitmap from_string(std::string_view bits);

  friend bool operator==(const FragmentBitmap&, const FragmentBitmap&) = default;

private:
  int n_f_ = 0;
  std::vector<std::uint8_t> bytes_;
};

struct GroupNack {
  NodeId node = 0;
  PacketId packet_id = 0;
  FragmentBitmap bitmap;
  int header_bytes = 9;

  int payload_bytes() const { return (bitmap.size() + 7) / 8; }
  int frame_bytes() const { return header_bytes + payload_bytes(); }
};

enum class GenerationAction { Dropped, Enqueued, Accepted };

struct ProtocolParams {
  Strategy strategy;
  int fragment_header_bytes = 9;
  int nack_header_bytes = 9;
  double rx1_delay_s = 1.0;
  double rx2_delay_s = 2.0;
};

/// Node-side strategy state machine. Owned and driven by the engine.
class NodeState {
public:
  NodeState(NodeId id, const ProtocolParams& params, DutyCycleLimiter limiter);

  NodeId id() const { return id_; }
  const DutyCycleLimiter& duty_cycle() const { return duty_cycle_; }
  const std::deque<AppPacket>& buffer() const { return buffer_; }
  int sessions_used() const { return in_flight_ ? in_flight_->sessions_used : 0; }
  bool has_packet_in_flight() const { return in_flight_.has_value(); }
  std::optional<PacketId> in_flight_packet() const;
  /// Sequence numbers still to send in the current session.
  std::vector<int> pending_fragments() const;

  bool transmitting(double now) const { return now < tx_busy_until_; }
  bool awaiting_nack() const { return awaiting_nack_; }
  /// Nothing buffered, nothing in flight, not waiting for a NACK.
  bool idle() const;

  /// Aloha transmits or drops; buffered strategies enqueue.
  GenerationAction on_packet_generated(const AppPacket& pkt, double now);

  /// Next frame to put on the air at `now`, already booked against the duty cycle.
  /// Returns nothing while waiting for a NACK, when nothing is queued or no channel is free.
  std::optional<Fragment> next_uplink(double now, const RadioConfig& radio, std::mt19937_64& rng);

  /// Earliest time next_uplink could return a frame, if there is anything to send.
  std::optional<double> next_wakeup(double now) const;

  /// Called once the gateway's NACK for the awaited packet is received.
  /// Returns the retransmission sequence numbers; empty if the NACK was ignored.
  std::vector<int> on_nack(const GroupNack& nack);

  /// Both receive windows closed without a NACK.
  void on_receive_windows_expired();

  std::uint64_t stale_nacks() const { return stale_nacks_; }

private:
  struct InFlight {
    AppPacket packet;
    std::vector<int> sizes;
    std::deque<int> pending;
    int sessions_used = 0;
    bool first_sent = false;
  };

  Fragment make_frame(InFlight& f, int seq, bool last_of_session, int channel);

  NodeId id_;
  ProtocolParams params_;
  DutyCycleLimiter duty_cycle_;
  std::deque<AppPacket> buffer_;
  std::optional<InFlight> in_flight_;
  bool awaiting_nack_ = false;
  double tx_busy_until_ = 0.0;
  std::uint64_t stale_nacks_ = 0;
};

/// Gateway verdict for one delivered uplink.
struct ReceptionVerdict {
  bool correct = false;   ///< packet completed with this frame
  bool discarded = false; ///< packet given up with missing fragments
  bool duplicate = false;
  std::optional<GroupNack> nack;
};

/// Gateway reassembly and group-NACK issuance.
class GatewayState {
public:
  explicit GatewayState(const ProtocolParams& params);

  ReceptionVerdict on_reception(NodeId node, const Fragment& frame);

  /// Discards every packet that never completed. Returns the number discarded.
  std::size_t finalize();

  std::uint64_t correct_packets() const { return correct_; }
  const std::vector<std::pair<NodeId, PacketId>>& delivered_log() const { return delivered_; }
  const std::vector<std::pair<NodeId, PacketId>>& discard_log() const { return discarded_; }

  struct Entry {
    FragmentBitmap bitmap;
    int sessions_observed = 0;
    int expected_last_seq = 0;
  };
  const Entry* entry(NodeId node, PacketId pid) const;

private:
  void discard(NodeId node, PacketId pid);

  ProtocolParams params_;
  std::map<std::pair<NodeId, PacketId>, Entry> open_;
  std::vector<std::pair<NodeId, PacketId>> delivered_;
  std::vector<std::pair<NodeId, PacketId>> discarded_;
  std::set<std::pair<NodeId, PacketId>> closed_;
  std::uint64_t correct_ = 0;
};

} // namespace lpwan
