#include "lpwan/protocol.hpp"

#include "lpwan/rng.hpp"

#include <algorithm>
#include <fmt/format.h>

namespace lpwan {

void Strategy::validate() const {
  switch (kind) {
  case StrategyKind::Aloha:
  case StrategyKind::BufferedAloha:
    if (fragments_per_packet != 1)
      throw ConfigError("unfragmented strategies use fragments_per_packet = 1");
    break;
  case StrategyKind::FragNoRetx:
    if (fragments_per_packet < 2)
      throw ConfigError("fragmented strategies need fragments_per_packet >= 2");
    break;
  case StrategyKind::FragRetx:
    if (fragments_per_packet < 2)
      throw ConfigError("fragmented strategies need fragments_per_packet >= 2");
    if (retx_sessions_max < 1)
      throw ConfigError("frag_retx needs retx_sessions >= 1");
    break;
  }
}

std::string_view Strategy::kind_name() const {
  switch (kind) {
  case StrategyKind::Aloha: return "aloha";
  case StrategyKind::BufferedAloha: return "buffered_aloha";
  case StrategyKind::FragNoRetx: return "frag";
  case StrategyKind::FragRetx: return "frag_retx";
  }
  return "?";
}

std::string Strategy::label() const {
  switch (kind) {
  case StrategyKind::Aloha:
  case StrategyKind::BufferedAloha: return std::string(kind_name());
  case StrategyKind::FragNoRetx: return fmt::format("frag_n{}", fragments_per_packet);
  case StrategyKind::FragRetx: return fmt::format("frag_retx_n{}_s{}", fragments_per_packet, retx_sessions_max);
  }
  return "?";
}

StrategyKind parse_strategy_kind(std::string_view name) {
  if (name == "aloha") return StrategyKind::Aloha;
  if (name == "buffered_aloha" || name == "ba") return StrategyKind::BufferedAloha;
  if (name == "frag" || name == "frag_no_retx") return StrategyKind::FragNoRetx;
  if (name == "frag_retx") return StrategyKind::FragRetx;
  throw ConfigError(fmt::format("unknown strategy '{}' (aloha, buffered_aloha, frag, frag_retx)", name));
}

std::vector<int> fragment_payload(int payload_bytes, int n_f) {
  if (n_f < 1)
    throw ConfigError("fragment count must be >= 1");
  if (payload_bytes < n_f)
    throw ConfigError(fmt::format("payload of {} B cannot be split into {} fragments", payload_bytes, n_f));
  const int base = payload_bytes / n_f;
  const int larger = payload_bytes % n_f;
  std::vector<int> sizes(static_cast<std::size_t>(n_f), base);
  for (int i = 0; i < larger; ++i)
    ++sizes[static_cast<std::size_t>(i)];
  return sizes;
}

// ---------------------------------------------------------------------------

FragmentBitmap::FragmentBitmap(int n_f) : n_f_(n_f), bytes_(static_cast<std::size_t>((n_f + 7) / 8), 0) {
  if (n_f < 1)
    throw ConfigError("bitmap needs at least one fragment");
}

bool FragmentBitmap::test(int i) const {
  if (i < 0 || i >= n_f_)
    throw std::out_of_range("fragment index outside bitmap");
  return (bytes_[static_cast<std::size_t>(i / 8)] >> (i % 8)) & 1u;
}

bool FragmentBitmap::set(int i) {
  if (test(i))
    return false;
  bytes_[static_cast<std::size_t>(i / 8)] |= static_cast<std::uint8_t>(1u << (i % 8));
  return true;
}

int FragmentBitmap::count() const {
  int c = 0;
  for (int i = 0; i < n_f_; ++i)
    c += test(i) ? 1 : 0;
  return c;
}

bool FragmentBitmap::all() const { return n_f_ > 0 && count() == n_f_; }

std::vector<int> FragmentBitmap::missing() const {
  std::vector<int> out;
  for (int i = 0; i < n_f_; ++i)
    if (!test(i))
      out.push_back(i);
  return out;
}

std::string FragmentBitmap::to_string() const {
  std::string s;
  for (int i = 0; i < n_f_; ++i)
    s.push_back(test(i) ? '1' : '0');
  return s;
}

FragmentBitmap FragmentBitmap::from_string(std::string_view bits) {
  FragmentBitmap b(static_cast<int>(bits.size()));
  for (std::size_t i = 0; i < bits.size(); ++i) {
    if (bits[i] == '1')
      b.set(static_cast<int>(i));
    else if (bits[i] != '0')
      throw std::invalid_argument("bitmap string must contain only 0 and 1");
  }
  return b;
}

// ---------------------------------------------------------------------------

NodeState::NodeState(NodeId id, const ProtocolParams& params, DutyCycleLimiter limiter)
    : id_(id), params_(params), duty_cycle_(std::move(limiter)) {
  params_.strategy.validate();
}

std::optional<PacketId> NodeState::in_flight_packet() const {
  if (!in_flight_)
    return std::nullopt;
  return in_flight_->packet.packet_id;
}

std::vector<int> NodeState::pending_fragments() const {
  if (!in_flight_)
    return {};
  return {in_flight_->pending.begin(), in_flight_->pending.end()};
}

bool NodeState::idle() const {
  return buffer_.empty() && !in_flight_ && !awaiting_nack_;
}

GenerationAction NodeState::on_packet_generated(const AppPacket& pkt, double now) {
  if (params_.strategy.buffered()) {
    buffer_.push_back(pkt);
    return GenerationAction::Enqueued;
  }
  // Aloha keeps no buffer: the packet goes out now or never.
  if (in_flight_ || transmitting(now) || duty_cycle_.available_channels(now).empty())
    return GenerationAction::Dropped;
  buffer_.push_back(pkt);
  return GenerationAction::Accepted;
}

Fragment NodeState::make_frame(InFlight& f, int seq, bool last_of_session, int channel) {
  const Strategy& s = params_.strategy;
  Fragment frame;
  frame.packet_id = f.packet.packet_id;
  frame.seq_index = s.fragmented() ? seq : -1;
  frame.payload_bytes = f.sizes[static_cast<std::size_t>(seq)];
  frame.header_bytes = params_.fragment_header_bytes;
  frame.requests_nack = s.uses_nack() && last_of_session && f.sessions_used < s.retx_sessions_max;
  frame.first_of_packet = !f.first_sent;
  frame.retransmission = f.sessions_used > 0;
  frame.channel = channel;
  f.first_sent = true;
  return frame;
}

std::optional<Fragment> NodeState::next_uplink(double now, const RadioConfig& radio, std::mt19937_64& rng) {
  if (awaiting_nack_ || transmitting(now))
    return std::nullopt;
  if (in_flight_ && in_flight_->pending.empty())
    in_flight_.reset();
  if (!in_flight_ && buffer_.empty())
    return std::nullopt;

  const std::vector<int> channels = duty_cycle_.available_channels(now);
  if (channels.empty())
    return std::nullopt;

  if (!in_flight_) {
    InFlight f;
    f.packet = buffer_.front();
    buffer_.pop_front();
    const int n_f = params_.strategy.fragmented() ? params_.strategy.fragments_per_packet : 1;
    f.sizes = fragment_payload(f.packet.payload_bytes, n_f);
    for (int i = 0; i < n_f; ++i)
      f.pending.push_back(i);
    in_flight_ = std::move(f);
  }

  int channel = channels.front();
  if (channels.size() > 1) {
    const auto pick = static_cast<std::size_t>(uniform01(rng) * static_cast<double>(channels.size()));
    channel = channels[std::min(pick, channels.size() - 1)];
  }

  InFlight& f = *in_flight_;
  const int seq = f.pending.front();
  f.pending.pop_front();
  const bool last = f.pending.empty();
  Fragment frame = make_frame(f, seq, last, channel);

  const double toa = compute_toa(frame.frame_bytes(), radio);
  duty_cycle_.register_transmission(channel, now, toa);
  tx_busy_until_ = now + toa;

  if (last) {
    if (frame.requests_nack)
      awaiting_nack_ = true;
    else
      in_flight_.reset();
  }
  return frame;
}

std::optional<double> NodeState::next_wakeup(double now) const {
  if (awaiting_nack_)
    return std::nullopt;
  const bool has_work = (in_flight_ && !in_flight_->pending.empty()) || !buffer_.empty();
  if (!has_work)
    return std::nullopt;
  return std::max({now, tx_busy_until_, duty_cycle_.earliest_allowed()});
}

std::vector<int> NodeState::on_nack(const GroupNack& nack) {
  if (!awaiting_nack_ || !in_flight_ || in_flight_->packet.packet_id != nack.packet_id || nack.node != id_) {
    ++stale_nacks_;
    return {};
  }
  std::vector<int> missing = nack.bitmap.missing();
  if (missing.empty()) {
    // A group NACK always carries a zero bit; treat the packet as concluded.
    ++stale_nacks_;
    awaiting_nack_ = false;
    in_flight_.reset();
    return {};
  }
  awaiting_nack_ = false;
  ++in_flight_->sessions_used;
  in_flight_->pending.assign(missing.begin(), missing.end());
  return missing;
}

void NodeState::on_receive_windows_expired() {
  if (!awaiting_nack_)
    return;
  awaiting_nack_ = false;
  in_flight_.reset();
}

// ---------------------------------------------------------------------------

GatewayState::GatewayState(const ProtocolParams& params) : params_(params) {}

const GatewayState::Entry* GatewayState::entry(NodeId node, PacketId pid) const {
  auto it = open_.find({node, pid});
  return it == open_.end() ? nullptr : &it->second;
}

void GatewayState::discard(NodeId node, PacketId pid) {
  open_.erase({node, pid});
  discarded_.emplace_back(node, pid);
  closed_.emplace(node, pid);
}

ReceptionVerdict GatewayState::on_reception(NodeId node, const Fragment& frame) {
  ReceptionVerdict verdict;
  const auto key = std::make_pair(node, frame.packet_id);

  if (!frame.is_fragment()) {
    if (!closed_.insert(key).second) {
      verdict.duplicate = true;
      return verdict;
    }
    ++correct_;
    delivered_.push_back(key);
    verdict.correct = true;
    return verdict;
  }

  auto it = open_.find(key);
  if (it == open_.end()) {
    if (closed_.contains(key)) {
      verdict.duplicate = true;
      return verdict;
    }
    // The node has moved on: whatever it left incomplete is abandoned.
    for (auto o = open_.lower_bound({node, PacketId{0}}); o != open_.end() && o->first.first == node;) {
      if (o->first.second < frame.packet_id) {
        discarded_.push_back(o->first);
        closed_.insert(o->first);
        o = open_.erase(o);
      } else {
        ++o;
      }
    }
    Entry e;
    e.bitmap = FragmentBitmap(params_.strategy.fragments_per_packet);
    e.expected_last_seq = params_.strategy.fragments_per_packet - 1;
    it = open_.emplace(key, std::move(e)).first;
  }

  Entry& e = it->second;
  verdict.duplicate = !e.bitmap.set(frame.seq_index);

  if (e.bitmap.all()) {
    ++correct_;
    delivered_.push_back(key);
    closed_.insert(key);
    open_.erase(it);
    verdict.correct = true;
    return verdict;
  }
  if (frame.requests_nack) {
    ++e.sessions_observed;
    const std::vector<int> missing = e.bitmap.missing();
    e.expected_last_seq = missing.back();
    verdict.nack = GroupNack{node, frame.packet_id, e.bitmap, params_.nack_header_bytes};
    return verdict;
  }
  if (frame.seq_index == e.expected_last_seq) {
    discard(node, frame.packet_id);
    verdict.discarded = true;
  }
  return verdict;
}

std::size_t GatewayState::finalize() {
  const std::size_t n = open_.size();
  for (const auto& [key, e] : open_) {
    discarded_.push_back(key);
    closed_.insert(key);
  }
  open_.clear();
  return n;
}

} // namespace lpwan
