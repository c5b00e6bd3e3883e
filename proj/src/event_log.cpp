#include "lpwan/event_log.hpp"

#include <array>
#include <charconv>
#include <fmt/format.h>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace lpwan {

namespace {

constexpr std::array<std::string_view, 7> kKindNames{
    "PacketGenerated", "TxStart", "TxEnd", "RxWindowOpen", "RxWindowClose", "NackTx", "ChannelFree"};

constexpr std::string_view kMagic = "# lpwan-eventlog v1";

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = s.find(sep, start);
    out.push_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos)
      break;
    start = pos + 1;
  }
  return out;
}

int parse_int_field(std::string_view s) {
  if (s == "-")
    return -1;
  int v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size())
    throw std::runtime_error(fmt::format("bad integer field '{}'", s));
  return v;
}

} // namespace

std::string_view to_string(EventKind kind) { return kKindNames[static_cast<std::size_t>(kind)]; }

EventKind parse_event_kind(std::string_view name) {
  for (std::size_t i = 0; i < kKindNames.size(); ++i)
    if (kKindNames[i] == name)
      return static_cast<EventKind>(i);
  throw std::runtime_error(fmt::format("unknown event kind '{}'", name));
}

std::string_view LogRecord::status() const {
  return std::string_view(outcome).substr(0, std::string_view(outcome).find(','));
}

bool LogRecord::has_flag(std::string_view flag) const {
  for (std::string_view tok : split(outcome, ','))
    if (tok == flag)
      return true;
  return false;
}

std::optional<std::string_view> LogRecord::value(std::string_view key) const {
  const std::string_view all(outcome);
  std::size_t start = 0;
  while (start <= all.size()) {
    std::size_t end = all.find(',', start);
    if (end == std::string_view::npos)
      end = all.size();
    const std::string_view tok = all.substr(start, end - start);
    if (tok.size() > key.size() && tok.substr(0, key.size()) == key && tok[key.size()] == '=')
      return tok.substr(key.size() + 1);
    start = end + 1;
  }
  return std::nullopt;
}

std::string format_double(double v) { return fmt::format("{}", v); }

std::string format_record(const LogRecord& r) {
  const std::string subject = r.subject == kGatewaySubject ? std::string("gw") : std::to_string(r.subject);
  const std::string channel = r.channel < 0 ? std::string("-") : std::to_string(r.channel);
  const std::string bytes = r.bytes < 0 ? std::string("-") : std::to_string(r.bytes);
  return fmt::format("{}\t{}\t{}\t{}\t{}\t{}", format_double(r.time), to_string(r.kind), subject, channel, bytes,
                     r.outcome);
}

LogRecord parse_record(std::string_view line) {
  const auto fields = split(line, '\t');
  if (fields.size() != 6)
    throw std::runtime_error(fmt::format("expected 6 tab-separated fields, got {}", fields.size()));
  LogRecord r;
  auto [p, ec] = std::from_chars(fields[0].data(), fields[0].data() + fields[0].size(), r.time);
  if (ec != std::errc{} || p != fields[0].data() + fields[0].size())
    throw std::runtime_error(fmt::format("bad time field '{}'", fields[0]));
  r.kind = parse_event_kind(fields[1]);
  r.subject = fields[2] == "gw" ? kGatewaySubject : parse_int_field(fields[2]);
  r.channel = parse_int_field(fields[3]);
  r.bytes = parse_int_field(fields[4]);
  r.outcome = std::string(fields[5]);
  return r;
}

void EventLog::write(std::ostream& out) const {
  out << kMagic << '\n';
  for (const std::string& h : header)
    out << "# " << h << '\n';
  for (const LogRecord& r : records)
    out << format_record(r) << '\n';
}

std::string EventLog::to_string() const {
  std::ostringstream os;
  write(os);
  return os.str();
}

EventLog EventLog::read(std::istream& in) {
  EventLog log;
  std::string line;
  int line_no = 0;
  bool saw_magic = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty())
      continue;
    if (line[0] == '#') {
      if (line == kMagic) {
        saw_magic = true;
        continue;
      }
      log.header.push_back(line.size() > 2 ? line.substr(2) : std::string());
      continue;
    }
    try {
      log.records.push_back(parse_record(line));
    } catch (const std::exception& e) {
      throw std::runtime_error(fmt::format("event log line {}: {}", line_no, e.what()));
    }
  }
  if (!saw_magic)
    throw std::runtime_error("not an lpwan event log (missing header line)");
  return log;
}

} // namespace lpwan
