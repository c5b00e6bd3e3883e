#include "lpwan/engine.hpp"
#include "oracles.hpp"

#include <doctest.h>
#include <map>

using namespace lpwan;

namespace {
ScenarioConfig small(const Strategy& s, int nodes, std::uint64_t seed = 3) {
  ScenarioConfig c;
  c.strategy = s;
  c.node_count = nodes;
  c.traffic.packets_per_node = 15;
  c.seed = seed;
  return c;
}
const Strategy kAll[] = {Strategy::aloha(), Strategy::buffered_aloha(), Strategy::frag(3), Strategy::frag_retx(2, 1),
                         Strategy::frag_retx(5, 2)};
} // namespace

TEST_CASE("periodic arrivals") {
  const auto t = periodic_arrivals(12.0, 60.0, 3);
  REQUIRE(t.size() == 3);
  CHECK(t[0] == doctest::Approx(12.0));
  CHECK(t[1] == doctest::Approx(72.0));
  CHECK(t[2] == doctest::Approx(132.0));
}

TEST_CASE("traffic generation: count, spacing and phase window") {
  TrafficConfig tc;
  std::mt19937_64 g(9);
  const auto t = generate_traffic(tc, g);
  REQUIRE(t.size() == 100);
  CHECK(t[0] >= 0.0);
  CHECK(t[0] < 60.0);
  for (std::size_t i = 1; i < t.size(); ++i)
    CHECK(t[i] - t[i - 1] == doctest::Approx(60.0));
  tc.model = TrafficModel::Poisson;
  const auto p = generate_traffic(tc, g);
  REQUIRE(p.size() == 100);
  CHECK(std::is_sorted(p.begin(), p.end()));
}

TEST_CASE("50 nodes x 100 packets generate 5000 packets") {
  ScenarioConfig c;
  c.node_count = 50;
  const auto r = run(c);
  CHECK(r.metrics.m_asked == 5000);
  std::size_t generated = 0;
  for (const auto& rec : r.log.records)
    generated += rec.kind == EventKind::PacketGenerated;
  CHECK(generated == 5000);
}

TEST_CASE("same config and seed give identical logs and metrics") {
  for (const Strategy& s : kAll) {
    const auto c = small(s, 20);
    const auto a = run(c), b = run(c);
    CHECK(a.log == b.log);
    CHECK(a.metrics == b.metrics);
    CHECK(run(c, {false}).metrics == a.metrics);
  }
}

TEST_CASE("different seeds give different runs") {
  const auto a = run(small(Strategy::buffered_aloha(), 20, 1));
  const auto b = run(small(Strategy::buffered_aloha(), 20, 2));
  CHECK_FALSE(a.log == b.log);
}

TEST_CASE("common random numbers: arrival times do not depend on the strategy") {
  auto arrivals = [](const Strategy& s) {
    std::vector<std::pair<int, double>> out;
    for (const auto& rec : run(small(s, 10)).log.records)
      if (rec.kind == EventKind::PacketGenerated)
        out.emplace_back(rec.subject, rec.time);
    std::sort(out.begin(), out.end());
    return out;
  };
  const auto ref = arrivals(Strategy::aloha());
  for (const Strategy& s : kAll)
    CHECK(arrivals(s) == ref);
}

TEST_CASE("property: event times never decrease and every TxStart has its TxEnd") {
  for (const Strategy& s : kAll) {
    const auto r = run(small(s, 30));
    double prev = 0.0;
    int open = 0;
    for (const auto& rec : r.log.records) {
      CHECK(rec.time >= prev);
      prev = rec.time;
      open += rec.kind == EventKind::TxStart;
      open -= rec.kind == EventKind::TxEnd;
      CHECK(open >= 0);
    }
    CHECK(open == 0);
  }
}

TEST_CASE("property: each node respects the 1% duty cycle on every channel") {
  for (const Strategy& s : kAll) {
    auto c = small(s, 30);
    c.channel_frequencies_hz = {868.1e6, 868.3e6};
    const auto r = run(c);
    std::map<std::pair<int, int>, std::pair<double, double>> last; // (node, channel) -> (start, toa)
    for (const auto& rec : r.log.records) {
      if (rec.kind != EventKind::TxStart)
        continue;
      const auto key = std::make_pair(rec.subject, rec.channel);
      const double toa = oracle::toa(rec.bytes, c.radio);
      if (auto it = last.find(key); it != last.end())
        CHECK(rec.time - it->second.first >= it->second.second * 100.0 - 1e-9);
      last[key] = {rec.time, toa};
    }
  }
}

TEST_CASE("a lone node delivers everything under every strategy") {
  for (const Strategy& s : kAll) {
    const auto m = run(small(s, 1)).metrics;
    CHECK(m.m_sent == m.m_asked);
    CHECK(*m.goodput_percent == doctest::Approx(100.0));
    CHECK(m.nacks == 0);
  }
}

TEST_CASE("property: M_correct <= M_sent <= M_asked") {
  for (const Strategy& s : kAll)
    for (int nodes : {5, 40}) {
      const auto m = run(small(s, nodes), {false}).metrics;
      CHECK(m.m_correct <= m.m_sent);
      CHECK(m.m_sent <= m.m_asked);
      CHECK(m.retransmissions <= m.uplinks);
    }
}

TEST_CASE("a finite horizon counts packets still in flight as not correct") {
  // 20 s period against about 33 s of off time per 209 B frame: the queue only drains long after the last arrival.
  auto c = small(Strategy::buffered_aloha(), 10);
  c.traffic.interval_s = 20.0;
  c.sim_duration_s = 15 * 20.0;
  const auto r = run(c);
  CHECK(r.metrics.m_asked == 150);
  for (const auto& rec : r.log.records)
    CHECK(rec.time <= c.sim_duration_s);
  // Cutting the horizon short of the drain loses the last packets.
  c.sim_duration_s = 0.0;
  const auto drained = run(c);
  c.sim_duration_s = 15 * 20.0;
  CHECK(drained.log.records.back().time > c.sim_duration_s);
  CHECK(r.metrics.m_correct < drained.metrics.m_correct);
  c.sim_duration_s = 100.0;
  CHECK_THROWS_AS(run(c), ConfigError);
}

TEST_CASE("invalid scenarios are rejected") {
  ScenarioConfig c;
  c.node_count = 0;
  CHECK_THROWS_AS(run(c), ConfigError);
  c = {};
  c.duty_cycle_percent = 0.0;
  CHECK_THROWS_AS(run(c), ConfigError);
  c = {};
  c.strategy = Strategy::frag(300);
  CHECK_THROWS_AS(run(c), ConfigError);
}
