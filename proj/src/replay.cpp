#include "lpwan/replay.hpp"

#include "lpwan/config.hpp"

#include <fmt/format.h>
#include <map>

namespace lpwan {

ScenarioConfig config_from_log(const EventLog& log) {
  std::string text;
  for (const std::string& line : log.header)
    text += line + '\n';
  return parse_config(text);
}

MetricsReport replay_metrics(const EventLog& log) {
  const ScenarioConfig cfg = config_from_log(log);
  MetricsAccumulator acc(cfg.node_count, cfg.radio);
  std::map<int, double> window_open;

  for (const LogRecord& r : log.records) {
    switch (r.kind) {
    case EventKind::PacketGenerated:
      acc.on_generated(r.subject);
      if (r.status() == "dropped")
        acc.on_dropped(r.subject);
      break;
    case EventKind::TxStart:
      acc.on_uplink(r.subject, r.bytes, r.has_flag("first"), r.has_flag("retx"));
      break;
    case EventKind::TxEnd:
      if (r.has_flag("correct"))
        acc.on_correct(r.subject);
      break;
    case EventKind::RxWindowOpen:
      window_open[r.subject] = r.time;
      break;
    case EventKind::RxWindowClose: {
      auto it = window_open.find(r.subject);
      if (it == window_open.end())
        throw std::runtime_error(fmt::format("RxWindowClose for node {} without an open window", r.subject));
      acc.on_listen(r.subject, r.time - it->second);
      window_open.erase(it);
      break;
    }
    case EventKind::NackTx:
      acc.on_nack_sent(r.bytes);
      break;
    case EventKind::ChannelFree:
      break;
    }
  }
  return acc.report();
}

} // namespace lpwan
