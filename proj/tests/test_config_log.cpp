#include "lpwan/config.hpp"
#include "lpwan/replay.hpp"

#include <doctest.h>
#include <numeric>
#include <sstream>

using namespace lpwan;

namespace {
std::string error_of(std::string_view text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return {};
}
} // namespace

TEST_CASE("config file: comments, blank lines, overrides") {
  const auto c = parse_config("# scenario\n\nnode_count = 12\nstrategy = frag_retx # inline\nfragments = 4\n"
                              "retx_sessions=2\nchannels_hz = 868.1e6, 868.3e6\ncapture.enabled = true\n");
  CHECK(c.node_count == 12);
  CHECK(c.strategy.kind == StrategyKind::FragRetx);
  CHECK(c.strategy.fragments_per_packet == 4);
  CHECK(c.strategy.retx_sessions_max == 2);
  CHECK(c.channel_count() == 2);
  CHECK(c.capture.enabled);
  CHECK(c.payload_bytes == 200);
}

TEST_CASE("config errors name the line") {
  CHECK(error_of("node_count = 3\nfoo = 1\n") == "line 2: unknown key 'foo'");
  CHECK(error_of("\n\nnode_count\n").rfind("line 3:", 0) == 0);
  CHECK(error_of("seed = 1\nseed = 2\n").rfind("line 2:", 0) == 0);
  CHECK(error_of("node_count = x\n").find("line 1") != std::string::npos);
  CHECK(error_of("traffic.model = bursty\n").find("line 1") != std::string::npos);
  CHECK(error_of("capture.enabled = maybe\n").find("line 1") != std::string::npos);
  CHECK(error_of("node_count = 3\n").empty());
}

TEST_CASE("config_lines round-trips every key") {
  ScenarioConfig c;
  c.node_count = 17;
  c.strategy = Strategy::frag_retx(5, 2);
  c.radio.spreading_factor = 9;
  c.radio.coding_rate_denominator = 8;
  c.traffic.interval_s = 12.5;
  c.seed = 123456789012345ULL;
  c.channel_frequencies_hz = {868.1e6, 868.3e6, 868.5e6};
  c.tx_jitter_s = 0.125;
  const auto lines = config_lines(c);
  CHECK(lines.size() == config_keys().size());
  const std::string text = std::accumulate(lines.begin(), lines.end(), std::string(),
                                           [](std::string a, const std::string& l) { return a + l + "\n"; });
  const auto back = parse_config(text);
  CHECK(config_lines(back) == lines);
  CHECK(back.strategy == c.strategy);
  CHECK(back.seed == c.seed);
}

TEST_CASE("log records round-trip through text") {
  LogRecord r{0.1 + 0.2, EventKind::TxEnd, 4, 1, 59, "delivered,pkt=3,seq=2,retx,nack"};
  CHECK(parse_record(format_record(r)) == r);
  CHECK(parse_record(format_record(r)).time == 0.1 + 0.2);
  CHECK(r.status() == "delivered");
  CHECK(r.has_flag("retx"));
  CHECK_FALSE(r.has_flag("ret"));
  CHECK(*r.value("seq") == "2");
  CHECK_FALSE(r.value("bitmap"));
  LogRecord g{5.0, EventKind::NackTx, kGatewaySubject, -1, 10, "sent,node=3"};
  CHECK(parse_record(format_record(g)) == g);
}

TEST_CASE("malformed logs report the line number") {
  std::istringstream in("# lpwan-eventlog v1\n# seed = 1\n1.0\tTxStart\t0\t0\t59\ttx\n2.0\tBogus\t0\t0\t59\tx\n");
  try {
    EventLog::read(in);
    FAIL("expected an error");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()).find("line 4") != std::string::npos);
  }
  std::istringstream no_magic("1.0\tTxStart\t0\t0\t59\ttx\n");
  CHECK_THROWS(EventLog::read(no_magic));
}

TEST_CASE("replay from the written log reproduces the metrics exactly") {
  for (const Strategy& s : {Strategy::aloha(), Strategy::buffered_aloha(), Strategy::frag(4), Strategy::frag_retx(3, 2)})
    for (bool capture : {false, true}) {
      ScenarioConfig c;
      c.strategy = s;
      c.node_count = 25;
      c.traffic.packets_per_node = 20;
      c.traffic.interval_s = 20.0;
      c.capture.enabled = capture;
      c.seed = 5;
      const auto r = run(c);
      std::stringstream io;
      r.log.write(io);
      const EventLog back = EventLog::read(io);
      CHECK(back == r.log);
      CHECK(replay_metrics(back) == r.metrics);
      CHECK(config_lines(config_from_log(back)) == config_lines(c));
    }
}
