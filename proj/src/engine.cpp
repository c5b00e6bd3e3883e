#include "lpwan/engine.hpp"

#include "lpwan/config.hpp"

#include <cmath>
#include <fmt/format.h>
#include <limits>
#include <queue>

namespace lpwan {

double ScenarioConfig::phase_window() const {
  return traffic.phase_window_s > 0.0 ? traffic.phase_window_s : traffic.interval_s;
}

double ScenarioConfig::effective_duration() const {
  return sim_duration_s > 0.0 ? sim_duration_s : std::numeric_limits<double>::infinity();
}

ProtocolParams ScenarioConfig::protocol_params() const {
  ProtocolParams p;
  p.strategy = strategy;
  p.fragment_header_bytes = fragment_header_bytes;
  p.nack_header_bytes = nack_header_bytes;
  p.rx1_delay_s = rx1_delay_s;
  p.rx2_delay_s = rx2_delay_s;
  return p;
}

void ScenarioConfig::validate() const {
  if (node_count < 1)
    throw ConfigError("node_count must be >= 1");
  if (channel_frequencies_hz.empty())
    throw ConfigError("channels_hz needs at least one channel");
  radio.validate();
  if (!(duty_cycle_percent > 0.0) || duty_cycle_percent > 100.0)
    throw ConfigError("duty_cycle_percent must be in (0, 100]");
  strategy.validate();
  if (payload_bytes < 1)
    throw ConfigError("payload_bytes must be >= 1");
  if (strategy.fragmented() && payload_bytes < strategy.fragments_per_packet)
    throw ConfigError("payload_bytes must be >= fragments");
  if (fragment_header_bytes < 0 || nack_header_bytes < 0)
    throw ConfigError("fragment_header_bytes and nack_header_bytes must be >= 0");
  if (payload_bytes + fragment_header_bytes > 255)
    throw ConfigError("payload_bytes + fragment_header_bytes exceeds the 255 B LoRa frame");
  if (!(traffic.interval_s > 0.0))
    throw ConfigError("traffic.interval_s must be > 0");
  if (traffic.packets_per_node < 1)
    throw ConfigError("traffic.packets_per_node must be >= 1");
  if (traffic.phase_window_s < 0.0)
    throw ConfigError("traffic.phase_window_s must be >= 0");
  if (sim_duration_s < 0.0)
    throw ConfigError("sim_duration_s must be >= 0");
  if (traffic.model == TrafficModel::Periodic && sim_duration_s > 0.0 &&
      sim_duration_s < phase_window() + (traffic.packets_per_node - 1) * traffic.interval_s)
    throw ConfigError("sim_duration_s is too short to emit traffic.packets_per_node packets");
  if (capture.margin_db < 0.0)
    throw ConfigError("capture.margin_db must be >= 0");
  if (!(geometry.radius_m >= 0.0) || !(geometry.path_loss.reference_distance_m > 0.0))
    throw ConfigError("geometry.radius_m must be >= 0 and geometry.reference_distance_m > 0");
  if (!(rx1_delay_s > 0.0) || !(rx2_delay_s > rx1_delay_s))
    throw ConfigError("rx1_delay_s must be > 0 and rx2_delay_s > rx1_delay_s");
  if (!(rx_window_symbols > 0.0) || rx_window_symbols * radio.symbol_time() >= rx2_delay_s - rx1_delay_s)
    throw ConfigError("rx_window_symbols must be > 0 and the window must close before rx2 opens");
}

std::vector<double> periodic_arrivals(double phase_s, double interval_s, int count) {
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int k = 0; k < count; ++k)
    out.push_back(phase_s + k * interval_s);
  return out;
}

std::vector<double> generate_traffic(const TrafficConfig& traffic, std::mt19937_64& stream) {
  if (traffic.model == TrafficModel::Periodic) {
    const double window = traffic.phase_window_s > 0.0 ? traffic.phase_window_s : traffic.interval_s;
    return periodic_arrivals(uniform01(stream) * window, traffic.interval_s, traffic.packets_per_node);
  }
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(traffic.packets_per_node));
  double t = 0.0;
  for (int k = 0; k < traffic.packets_per_node; ++k) {
    t += exponential(stream, traffic.interval_s);
    out.push_back(t);
  }
  return out;
}

namespace {

struct Event {
  double time;
  EventKind kind;
  int subject; ///< node index; the gateway sorts after every node
  std::uint64_t seq;
  std::int64_t ref;
};

struct EventOrder {
  // priority_queue pops the largest; invert for earliest-first.
  bool operator()(const Event& a, const Event& b) const {
    if (a.time != b.time) return a.time > b.time;
    if (a.subject != b.subject) return a.subject > b.subject;
    if (a.kind != b.kind) return a.kind > b.kind;
    return a.seq > b.seq;
  }
};

struct OnAir {
  Transmission tx;
  Fragment frame;
};

struct PendingWindow {
  NodeId node;
  int index;          ///< 1 or 2
  double uplink_end;
  double opened_at = 0.0;
  std::optional<GroupNack> nack;
};

class Simulation {
public:
  Simulation(const ScenarioConfig& cfg, const RunOptions& opts)
      : cfg_(cfg), opts_(opts), gateway_(cfg.protocol_params()), metrics_(cfg.node_count, cfg.radio),
        gateway_subject_(cfg.node_count), end_time_(cfg.effective_duration()),
        history_(static_cast<std::size_t>(cfg.channel_count())) {
    const ProtocolParams params = cfg.protocol_params();
    const std::size_t n = static_cast<std::size_t>(cfg.node_count);
    nodes_.reserve(n);
    channel_rng_.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
      const NodeId id = static_cast<NodeId>(i);
      nodes_.emplace_back(id, params, DutyCycleLimiter(cfg.duty_cycle_percent, cfg.channel_count()));
      channel_rng_.push_back(make_stream(cfg.seed, i, StreamTag::Channel));

      auto traffic_rng = make_stream(cfg.seed, i, StreamTag::Traffic);
      arrivals_.push_back(generate_traffic(cfg.traffic, traffic_rng));
      next_arrival_.push_back(0);

      auto geo = make_stream(cfg.seed, i, StreamTag::Geometry);
      // Uniform over the disc around the gateway; only the distance matters.
      const double r = cfg.geometry.radius_m * std::sqrt(uniform01(geo));
      rx_power_.push_back(cfg.radio.tx_power_dbm - cfg.geometry.path_loss.loss_db(r));
    }
    wake_at_.assign(n, std::numeric_limits<double>::quiet_NaN());
    pending_nack_.resize(n);
    window_len_ = cfg.rx_window_symbols * cfg.radio.symbol_time();

    if (opts_.record_log)
      log_.header = config_lines(cfg);
  }

  RunResult execute() {
    for (std::size_t i = 0; i < nodes_.size(); ++i)
      schedule_next_arrival(static_cast<NodeId>(i));

    // Without a horizon the run drains: it ends when no event is left.
    while (!queue_.empty()) {
      const Event ev = queue_.top();
      if (ev.time > end_time_)
        break;
      queue_.pop();
      dispatch(ev);
    }
    gateway_.finalize();
    return {metrics_.report(), std::move(log_)};
  }

private:
  void push(double time, EventKind kind, int subject, std::int64_t ref = 0) {
    queue_.push(Event{time, kind, subject, seq_++, ref});
  }

  /// `outcome` is only evaluated when a log is being kept.
  template <typename Outcome>
  void record(double time, EventKind kind, int subject, int channel, int bytes, Outcome&& outcome) {
    if (opts_.record_log)
      log_.records.push_back(LogRecord{time, kind, subject, channel, bytes, std::string(outcome())});
  }

  static std::string frame_tokens(const Fragment& f) {
    std::string s = fmt::format("pkt={}", f.packet_id);
    if (f.is_fragment())
      s += fmt::format(",seq={}", f.seq_index);
    if (f.first_of_packet) s += ",first";
    if (f.retransmission) s += ",retx";
    if (f.requests_nack) s += ",nack";
    return s;
  }

  void schedule_next_arrival(NodeId node) {
    const auto i = static_cast<std::size_t>(node);
    if (next_arrival_[i] < arrivals_[i].size())
      push(arrivals_[i][next_arrival_[i]], EventKind::PacketGenerated, node);
  }

  void dispatch(const Event& ev) {
    switch (ev.kind) {
    case EventKind::PacketGenerated: on_generated(ev); break;
    case EventKind::TxEnd: on_tx_end(ev); break;
    case EventKind::RxWindowOpen: on_window_open(ev); break;
    case EventKind::RxWindowClose: on_window_close(ev); break;
    case EventKind::NackTx: on_nack_tx(ev); break;
    case EventKind::ChannelFree: on_channel_free(ev); break;
    case EventKind::TxStart: break; // transmissions start inline
    }
  }

  void on_generated(const Event& ev) {
    const NodeId node = ev.subject;
    const auto i = static_cast<std::size_t>(node);
    ++next_arrival_[i];
    schedule_next_arrival(node);

    AppPacket pkt{next_packet_id_++, node, cfg_.payload_bytes, ev.time};
    metrics_.on_generated(node);
    const GenerationAction action = nodes_[i].on_packet_generated(pkt, ev.time);
    const char* status = action == GenerationAction::Dropped    ? "dropped"
                         : action == GenerationAction::Accepted ? "accepted"
                                                                : "queued";
    record(ev.time, EventKind::PacketGenerated, node, -1, cfg_.payload_bytes,
           [&] { return fmt::format("{},pkt={}", status, pkt.packet_id); });
    if (action == GenerationAction::Dropped) {
      metrics_.on_dropped(node);
      return;
    }
    service(node, ev.time);
  }

  /// Transmit now if possible, otherwise arrange a wake-up for when it is.
  void service(NodeId node, double now) {
    const auto i = static_cast<std::size_t>(node);
    NodeState& n = nodes_[i];
    if (auto frame = n.next_uplink(now, cfg_.radio, channel_rng_[i])) {
      start_transmission(node, *frame, now);
    }
    const auto wake = n.next_wakeup(now);
    if (!wake)
      return;
    if (*wake <= now) // still transmitting at `now`, or a zero off-time
      return;
    if (!std::isnan(wake_at_[i]) && wake_at_[i] >= *wake)
      return;
    double at = *wake;
    if (cfg_.tx_jitter_s > 0.0)
      at += uniform01(channel_rng_[i]) * cfg_.tx_jitter_s;
    wake_at_[i] = at;
    push(at, EventKind::ChannelFree, node);
  }

  void start_transmission(NodeId node, const Fragment& frame, double now) {
    const double toa = compute_toa(frame.frame_bytes(), cfg_.radio);
    Transmission tx;
    tx.source = node;
    tx.channel = frame.channel;
    tx.start = now;
    tx.duration = toa;
    tx.rx_power_dbm = rx_power_[static_cast<std::size_t>(node)];
    tx.payload_kind = frame.is_fragment() ? PayloadKind::Fragment : PayloadKind::Packet;
    tx.frame_bytes = frame.frame_bytes();

    const auto id = static_cast<std::int64_t>(on_air_.size());
    on_air_.push_back(OnAir{tx, frame});
    history_[static_cast<std::size_t>(frame.channel)].push_back(id);
    max_toa_ = std::max(max_toa_, toa);

    metrics_.on_uplink(node, tx.frame_bytes, frame.first_of_packet, frame.retransmission);
    record(now, EventKind::TxStart, node, frame.channel, tx.frame_bytes, [&] { return "tx," + frame_tokens(frame); });
    push(tx.end(), EventKind::TxEnd, node, id);
  }

  ReceptionOutcome resolve(std::int64_t id) {
    const Transmission& target = on_air_[static_cast<std::size_t>(id)].tx;
    auto& hist = history_[static_cast<std::size_t>(target.channel)];
    // Anything that ended more than one max airtime ago cannot reach a frame ending now.
    const double horizon = target.end() - 2.0 * max_toa_;
    while (!hist.empty() && on_air_[static_cast<std::size_t>(hist.front())].tx.end() < horizon)
      hist.pop_front();
    interferers_.clear();
    for (std::int64_t other : hist) {
      if (other == id)
        continue;
      const Transmission& o = on_air_[static_cast<std::size_t>(other)].tx;
      if (overlaps(target, o))
        interferers_.push_back(&o);
    }
    return resolve_one(target, interferers_, cfg_.sensitivity_dbm, cfg_.capture);
  }

  void on_tx_end(const Event& ev) {
    const NodeId node = ev.subject;
    const Fragment frame = on_air_[static_cast<std::size_t>(ev.ref)].frame;
    const ReceptionOutcome outcome = resolve(ev.ref);

    if (outcome == ReceptionOutcome::Delivered) {
      const ReceptionVerdict v = gateway_.on_reception(node, frame);
      if (v.correct)
        metrics_.on_correct(node);
      if (v.nack) {
        pending_nack_[static_cast<std::size_t>(node)] = v.nack;
        push(ev.time + cfg_.rx1_delay_s, EventKind::NackTx, gateway_subject_, node);
      }
      record(ev.time, EventKind::TxEnd, node, frame.channel, frame.frame_bytes(), [&] {
        std::string s = "delivered," + frame_tokens(frame);
        if (v.correct) s += ",correct";
        if (v.discarded) s += ",discard";
        if (v.duplicate) s += ",duplicate";
        if (v.nack) s += ",nacked";
        return s;
      });
    } else {
      record(ev.time, EventKind::TxEnd, node, frame.channel, frame.frame_bytes(),
             [&] { return "destroyed," + frame_tokens(frame); });
    }

    if (frame.requests_nack) {
      const auto w = static_cast<std::int64_t>(windows_.size());
      windows_.push_back(PendingWindow{node, 1, ev.time, 0.0, std::nullopt});
      push(ev.time + cfg_.rx1_delay_s, EventKind::RxWindowOpen, node, w);
    } else {
      service(node, ev.time);
    }
  }

  void on_window_open(const Event& ev) {
    PendingWindow& w = windows_[static_cast<std::size_t>(ev.ref)];
    w.opened_at = ev.time;
    double close = ev.time + window_len_;
    auto& pending = pending_nack_[static_cast<std::size_t>(w.node)];
    if (w.index == 1 && pending) {
      // Gateway answers in the first window; the node stays in receive for the whole frame.
      w.nack = std::move(pending);
      pending.reset();
      close = ev.time + compute_toa(w.nack->frame_bytes(), cfg_.radio);
    }
    record(ev.time, EventKind::RxWindowOpen, w.node, -1, -1, [&] { return fmt::format("rx{}", w.index); });
    push(close, EventKind::RxWindowClose, w.node, ev.ref);
  }

  void on_window_close(const Event& ev) {
    const PendingWindow w = windows_[static_cast<std::size_t>(ev.ref)];
    const auto i = static_cast<std::size_t>(w.node);
    metrics_.on_listen(w.node, ev.time - w.opened_at);

    if (w.nack) {
      const std::vector<int> plan = nodes_[i].on_nack(*w.nack);
      record(ev.time, EventKind::RxWindowClose, w.node, -1, w.nack->frame_bytes(), [&] {
        return fmt::format("rx{},nack,pkt={},bitmap={},retx={}", w.index, w.nack->packet_id,
                           w.nack->bitmap.to_string(), plan.size());
      });
      service(w.node, ev.time);
      return;
    }
    record(ev.time, EventKind::RxWindowClose, w.node, -1, -1, [&] { return fmt::format("rx{},empty", w.index); });
    if (w.index == 1) {
      const auto next = static_cast<std::int64_t>(windows_.size());
      windows_.push_back(PendingWindow{w.node, 2, w.uplink_end, 0.0, std::nullopt});
      push(w.uplink_end + cfg_.rx2_delay_s, EventKind::RxWindowOpen, w.node, next);
      return;
    }
    nodes_[i].on_receive_windows_expired();
    service(w.node, ev.time);
  }

  void on_nack_tx(const Event& ev) {
    const NodeId target = static_cast<NodeId>(ev.ref);
    // The NACK was already handed to the node's pending slot; this logs the downlink itself.
    const int bytes = cfg_.nack_header_bytes + (cfg_.strategy.fragments_per_packet + 7) / 8;
    metrics_.on_nack_sent(bytes);
    record(ev.time, EventKind::NackTx, kGatewaySubject, 0, bytes, [&] { return fmt::format("nack,to={}", target); });
  }

  void on_channel_free(const Event& ev) {
    const auto i = static_cast<std::size_t>(ev.subject);
    if (wake_at_[i] != ev.time)
      return; // superseded
    wake_at_[i] = std::numeric_limits<double>::quiet_NaN();
    record(ev.time, EventKind::ChannelFree, ev.subject, -1, -1, [] { return "wake"; });
    service(ev.subject, ev.time);
  }

  const ScenarioConfig& cfg_;
  RunOptions opts_;
  GatewayState gateway_;
  MetricsAccumulator metrics_;
  int gateway_subject_;
  double end_time_;
  double window_len_ = 0.0;
  double max_toa_ = 0.0;

  std::vector<NodeState> nodes_;
  std::vector<std::mt19937_64> channel_rng_;
  std::vector<std::vector<double>> arrivals_;
  std::vector<std::size_t> next_arrival_;
  std::vector<double> rx_power_;
  std::vector<double> wake_at_;
  std::vector<std::optional<GroupNack>> pending_nack_;

  std::vector<OnAir> on_air_;
  std::vector<std::deque<std::int64_t>> history_;
  std::vector<const Transmission*> interferers_;
  std::vector<PendingWindow> windows_;

  std::priority_queue<Event, std::vector<Event>, EventOrder> queue_;
  std::uint64_t seq_ = 0;
  PacketId next_packet_id_ = 0;
  EventLog log_;
};

} // namespace

RunResult run(const ScenarioConfig& config, const RunOptions& options) {
  config.validate();
  Simulation sim(config, options);
  return sim.execute();
}

} // namespace lpwan
