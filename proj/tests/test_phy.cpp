#include "lpwan/phy.hpp"
#include "oracles.hpp"

#include <doctest.h>
#include <random>

using namespace lpwan;

TEST_CASE("time on air: golden values at SF7/125 kHz, CR 4/5, explicit header, CRC on") {
  RadioConfig r;
  // 1 B: 8 + ceil(24/28)*5 = 13 payload symbols, 12.25 preamble symbols, 1.024 ms each.
  CHECK(compute_toa(1, r) == doctest::Approx(0.025856).epsilon(1e-12));
  CHECK(compute_toa(1, r) == doctest::Approx(oracle::toa(1, r)).epsilon(1e-12));
  // 209 B (200 B payload + 9 B header): 8 + ceil(1688/28)*5 = 313 payload symbols.
  CHECK(compute_toa(209, r) == doctest::Approx(0.333056).epsilon(1e-12));
  CHECK(compute_toa(209, r) == doctest::Approx(oracle::toa(209, r)).epsilon(1e-12));
  CHECK(compute_toa(209, r) > compute_toa(1, r));
}

TEST_CASE("time on air matches the datasheet oracle over the whole parameter space") {
  RadioConfig r;
  for (int sf = 7; sf <= 12; ++sf)
    for (double bw : {125e3, 250e3, 500e3})
      for (int cr = 5; cr <= 8; ++cr)
        for (int flags = 0; flags < 8; ++flags) {
          r.spreading_factor = sf;
          r.bandwidth_hz = bw;
          r.coding_rate_denominator = cr;
          r.explicit_header = flags & 1;
          r.crc_enabled = flags & 2;
          r.low_data_rate_optimize = flags & 4;
          for (int bytes = 1; bytes <= 255; bytes += 7)
            REQUIRE(compute_toa(bytes, r) == doctest::Approx(oracle::toa(bytes, r)).epsilon(1e-12));
        }
}

TEST_CASE("time on air is monotone in bytes and strictly increasing in SF") {
  RadioConfig r;
  for (int sf = 7; sf <= 12; ++sf) {
    r.spreading_factor = sf;
    double prev = 0.0;
    for (int bytes = 1; bytes <= 255; ++bytes) {
      const double t = compute_toa(bytes, r);
      CHECK(t > 0.0);
      CHECK(t >= prev);
      prev = t;
    }
  }
  RadioConfig a, b;
  b.spreading_factor = 8;
  for (int bytes : {1, 50, 209, 255})
    CHECK(compute_toa(bytes, b) > compute_toa(bytes, a));
}

TEST_CASE("invalid radio parameters are configuration errors") {
  RadioConfig r;
  CHECK_THROWS_AS(compute_toa(0, r), ConfigError);
  r.spreading_factor = 6;
  CHECK_THROWS_AS(compute_toa(10, r), ConfigError);
  r = {};
  r.bandwidth_hz = 200e3;
  CHECK_THROWS_AS(r.validate(), ConfigError);
  r = {};
  r.coding_rate_denominator = 9;
  CHECK_THROWS_AS(r.validate(), ConfigError);
  r = {};
  r.tx_current_a = 0.0;
  CHECK_THROWS_AS(r.validate(), ConfigError);
}

TEST_CASE("off time follows T_off = ToA (100 - DC) / DC") {
  CHECK(compute_toff(1.0, 1.0) == doctest::Approx(99.0));
  CHECK(compute_toff(0.5, 10.0) == doctest::Approx(4.5));
  CHECK(compute_toff(0.25, 100.0) == 0.0);
  CHECK_THROWS_AS(compute_toff(1.0, 0.0), ConfigError);
  CHECK_THROWS_AS(compute_toff(1.0, 101.0), ConfigError);
}

TEST_CASE("duty-cycle limiter books the off time per channel") {
  DutyCycleLimiter dc(1.0, 2);
  CHECK(dc.available(0, 0.0));
  dc.register_transmission(0, 10.0, 0.5);
  CHECK(dc.next_allowed(0) == doctest::Approx(10.0 + 0.5 + 49.5));
  CHECK_FALSE(dc.available(0, 59.9));
  CHECK(dc.available(0, 60.0));
  CHECK(dc.available(1, 11.0));
  CHECK(dc.available_channels(30.0) == std::vector<int>{1});
  CHECK(dc.earliest_allowed() == 0.0);
  dc.register_transmission(1, 20.0, 1.0);
  CHECK(dc.earliest_allowed() == doctest::Approx(60.0));
}

namespace {
Transmission tx(double start, double dur, double power = -80.0, int channel = 0) {
  Transmission t;
  t.start = start;
  t.duration = dur;
  t.rx_power_dbm = power;
  t.channel = channel;
  return t;
}
} // namespace

TEST_CASE("reception examples") {
  const CaptureSettings off{false, 6.0}, on{true, 6.0};
  SUBCASE("equal power overlap, no capture: both destroyed") {
    std::vector<Transmission> v{tx(0, 1), tx(0.5, 1)};
    auto out = resolve_reception(v, -123, off);
    CHECK(out[0] == ReceptionOutcome::Destroyed);
    CHECK(out[1] == ReceptionOutcome::Destroyed);
  }
  SUBCASE("10 dB gap with a 6 dB margin: stronger survives") {
    std::vector<Transmission> v{tx(0, 1, -70), tx(0.5, 1, -80)};
    auto out = resolve_reception(v, -123, on);
    CHECK(out[0] == ReceptionOutcome::Delivered);
    CHECK(out[1] == ReceptionOutcome::Destroyed);
  }
  SUBCASE("touching intervals do not overlap") {
    std::vector<Transmission> v{tx(0, 1), tx(1, 1)};
    auto out = resolve_reception(v, -123, off);
    CHECK(out[0] == ReceptionOutcome::Delivered);
    CHECK(out[1] == ReceptionOutcome::Delivered);
  }
  SUBCASE("below sensitivity: destroyed even alone") {
    std::vector<Transmission> v{tx(0, 1, -130)};
    CHECK(resolve_reception(v, -123, off)[0] == ReceptionOutcome::Destroyed);
  }
  SUBCASE("different channels never collide") {
    std::vector<Transmission> v{tx(0, 1, -80, 0), tx(0, 1, -80, 1)};
    auto out = resolve_reception(v, -123, off);
    CHECK(out[0] == ReceptionOutcome::Delivered);
    CHECK(out[1] == ReceptionOutcome::Delivered);
  }
  SUBCASE("capture compares against the aggregate of interferers") {
    // -80 and -80 sum to about -77 dBm; -72 beats that by 5 dB only.
    std::vector<Transmission> v{tx(0, 1, -72), tx(0.2, 1, -80), tx(0.4, 1, -80)};
    CHECK(resolve_reception(v, -123, on)[0] == ReceptionOutcome::Destroyed);
    v[0].rx_power_dbm = -70;
    CHECK(resolve_reception(v, -123, on)[0] == ReceptionOutcome::Delivered);
  }
}

TEST_CASE("resolve_reception agrees with the brute-force oracle on random instances") {
  std::mt19937_64 g(2024);
  std::uniform_real_distribution<double> start(0.0, 5.0), dur(0.05, 1.5), power(-130.0, -60.0);
  std::uniform_int_distribution<int> size(1, 20), channel(0, 2);
  int checked = 0;
  for (int inst = 0; inst < 1000; ++inst) {
    std::vector<Transmission> v;
    const int n = size(g);
    for (int i = 0; i < n; ++i)
      v.push_back(tx(start(g), dur(g), power(g), channel(g)));
    const bool capture = inst % 2 == 1;
    const double sens = inst % 3 == 0 ? -123.0 : -100.0;
    const auto got = resolve_reception(v, sens, CaptureSettings{capture, 6.0});
    const auto want = oracle::delivered_bruteforce(v, sens, capture, 6.0);
    REQUIRE(got.size() == want.size());
    for (std::size_t i = 0; i < got.size(); ++i) {
      REQUIRE((got[i] == ReceptionOutcome::Delivered) == want[i]);
      ++checked;
    }
  }
  CHECK(checked > 1000);
}

TEST_CASE("property: without capture every member of an overlap set is destroyed") {
  std::mt19937_64 g(7);
  std::uniform_real_distribution<double> start(0.0, 3.0), dur(0.1, 1.0);
  for (int inst = 0; inst < 300; ++inst) {
    std::vector<Transmission> v;
    for (int i = 0; i < 8; ++i)
      v.push_back(tx(start(g), dur(g)));
    const auto out = resolve_reception(v, -123, {});
    for (std::size_t i = 0; i < v.size(); ++i) {
      bool overlapped = false;
      for (std::size_t j = 0; j < v.size(); ++j)
        overlapped |= i != j && overlaps(v[i], v[j]);
      CHECK((out[i] == ReceptionOutcome::Destroyed) == overlapped);
    }
  }
}

TEST_CASE("path loss and power conversions") {
  PathLoss pl;
  CHECK(pl.loss_db(1.0) == doctest::Approx(7.7));
  CHECK(pl.loss_db(10.0) == doctest::Approx(7.7 + 37.6));
  CHECK(mw_to_dbm(dbm_to_mw(-97.3)) == doctest::Approx(-97.3));
  CHECK(dbm_to_mw(0.0) == doctest::Approx(1.0));
}
