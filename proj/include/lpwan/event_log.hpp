#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace lpwan {

enum class EventKind { PacketGenerated, TxStart, TxEnd, RxWindowOpen, RxWindowClose, NackTx, ChannelFree };

std::string_view to_string(EventKind kind);
EventKind parse_event_kind(std::string_view name);

inline constexpr int kGatewaySubject = -1;

/// One processed event. `channel`/`bytes` are -1 where they do not apply.
/// `outcome` is a comma-separated token list: a status word, then key=value pairs and flags.
struct LogRecord {
  double time = 0.0;
  EventKind kind = EventKind::PacketGenerated;
  int subject = 0;
  int channel = -1;
  int bytes = -1;
  std::string outcome;

  bool has_flag(std::string_view flag) const;
  std::optional<std::string_view> value(std::string_view key) const;
  std::string_view status() const;

  friend bool operator==(const LogRecord&, const LogRecord&) = default;
};

/// Append-only record of a run plus the `key = value` config lines that produced it.
struct EventLog {
  std::vector<std::string> header;
  std::vector<LogRecord> records;

  void write(std::ostream& out) const;
  std::string to_string() const;
  /// Throws std::runtime_error with a line number on malformed input.
  static EventLog read(std::istream& in);

  friend bool operator==(const EventLog&, const EventLog&) = default;
};

/// Tab-separated line: time, kind, subject, channel, bytes, outcome.
std::string format_record(const LogRecord& r);
LogRecord parse_record(std::string_view line);

/// Shortest text that parses back to the same double.
std::string format_double(double v);

} // namespace lpwan
