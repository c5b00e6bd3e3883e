#include "lpwan/sweep.hpp"

#include <cmath>
#include <doctest.h>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace lpwan;

namespace {
SweepSpec tiny(int seeds) {
  ScenarioConfig base;
  base.traffic.packets_per_node = 10;
  SweepSpec s;
  s.base = base;
  s.node_counts = {1, 8, 20};
  s.strategies = {Strategy::aloha(), Strategy::buffered_aloha(), Strategy::frag_retx(3, 1)};
  s.extra = {Strategy::frag(3), Strategy::frag_retx(3, 2)};
  s.seeds_per_point = seeds;
  return s;
}
} // namespace

TEST_CASE("plan: strategy-major, shared seeds across strategies") {
  const auto spec = tiny(3);
  const auto jobs = plan_sweep(spec);
  CHECK(jobs.size() == 5 * 3 * 3);
  CHECK(jobs[0].seed == spec.base.seed);
  CHECK(jobs[2].seed == spec.base.seed + 2);
  CHECK(jobs[9].strategy == Strategy::buffered_aloha());
  CHECK(jobs[9].seed == jobs[0].seed);
}

TEST_CASE("parallel executor matches the serial reference exactly") {
  const auto spec = tiny(3);
  const auto serial = execute_serial(spec);
  CHECK(execute_parallel(spec, 2) == serial);
  CHECK(execute_parallel(spec, 0) == serial);
}

TEST_CASE("summary mean is the arithmetic mean of the runs; t-based CI") {
  const auto spec = tiny(5);
  const auto records = execute_serial(spec);
  const auto summary = aggregate(spec, records);
  CHECK(summary.with_ci);
  std::vector<double> g;
  for (const auto& r : records)
    if (r.job.strategy == Strategy::buffered_aloha() && r.job.nodes == 20)
      g.push_back(*r.metrics->goodput_percent);
  REQUIRE(g.size() == 5);
  double mean = 0.0;
  for (double v : g)
    mean += v / 5.0;
  double ss = 0.0;
  for (double v : g)
    ss += (v - mean) * (v - mean);
  const double half = 2.7764451051977987 * std::sqrt(ss / 4.0) / std::sqrt(5.0); // t(0.975, df=4)
  const PointSummary* p = summary.find(Strategy::buffered_aloha().label(), 20);
  REQUIRE(p);
  CHECK(p->goodput->mean == doctest::Approx(mean).epsilon(1e-12));
  CHECK(p->goodput->n == 5);
  CHECK(*p->goodput->ci95_half == doctest::Approx(half).epsilon(1e-9));
}

TEST_CASE("summarize") {
  const auto s = summarize({1.0, 2.0, 3.0}, true);
  CHECK(s->mean == doctest::Approx(2.0));
  CHECK(*s->ci95_half == doctest::Approx(4.302652729749464 * 1.0 / std::sqrt(3.0)));
  CHECK_FALSE(summarize({}, true));
  CHECK_FALSE(summarize({4.0}, true)->ci95_half);
  CHECK_FALSE(summarize({1.0, 2.0}, false)->ci95_half);
}

TEST_CASE("gains are mean per-density differences") {
  const auto spec = tiny(2);
  const auto summary = aggregate(spec, execute_serial(spec));
  double want = 0.0;
  for (int n : spec.node_counts)
    want += (summary.find(Strategy::frag_retx(3, 1).label(), n)->goodput->mean -
             summary.find(Strategy::frag(3).label(), n)->goodput->mean) /
            3.0;
  CHECK(*summary.gain("retx1_over_frag", 3) == doctest::Approx(want));
  CHECK(summary.gain("frag_over_ba", 3));
  CHECK(summary.gain("retx2_over_retx1", 3));
  CHECK_FALSE(summary.gain("frag_over_ba", 4));
}

TEST_CASE("one seed: no CI column") {
  const auto spec = tiny(1);
  const auto summary = aggregate(spec, execute_serial(spec));
  CHECK_FALSE(summary.with_ci);
  std::ostringstream os;
  write_summary_csv(os, summary);
  const std::string text = os.str();
  CHECK(text.substr(0, text.find('\n')) == "kind,strategy,nodes,n_f,metric,mean,n");
}

TEST_CASE("outputs: two CSVs and four SVGs; failed runs and undefined values are marked") {
  const auto spec = tiny(2);
  auto records = execute_serial(spec);
  records[0].metrics.reset();
  records[0].error = "injected";
  const auto summary = aggregate(spec, records);
  const auto dir = std::filesystem::path("lpwan_sweep_test");
  std::filesystem::remove_all(dir);
  const auto paths = write_sweep_outputs(dir.string(), spec, records, summary);
  CHECK(paths.size() == 6);
  int svg = 0, csv = 0;
  for (const auto& p : paths) {
    CHECK(std::filesystem::file_size(p) > 0);
    svg += std::filesystem::path(p).extension() == ".svg";
    csv += std::filesystem::path(p).extension() == ".csv";
  }
  CHECK(svg == 4);
  CHECK(csv == 2);
  std::ifstream in(dir / "runs.csv");
  std::string header, first;
  std::getline(in, header);
  std::getline(in, first);
  CHECK(header.rfind("node_count,strategy,n_f,retx_sessions,seed,", 0) == 0);
  CHECK(first.find("failed") != std::string::npos);
  std::filesystem::remove_all(dir);

  RunRecord empty{{Strategy::buffered_aloha(), 1, 1}, MetricsReport{}, {}};
  std::ostringstream os;
  write_runs_csv(os, spec.base, {empty});
  CHECK(os.str().find("undefined") != std::string::npos);
}
