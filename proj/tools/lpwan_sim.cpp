// lpwan_sim: single runs, density sweeps, the header-overhead table and log replay.

#include "lpwan/config.hpp"
#include "lpwan/engine.hpp"
#include "lpwan/metrics.hpp"
#include "lpwan/replay.hpp"
#include "lpwan/sweep.hpp"

#include <CLI11.hpp>
#include <charconv>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fmt/format.h>
#include <fstream>
#include <iostream>

using namespace lpwan;

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string nodes;
  std::string strategy;
  std::optional<int> fragments;
  std::optional<int> sessions;
  int jobs = 0;
  int seeds = 20;
  std::string out_dir;
  std::string log;
};

int parse_int(std::string_view s) {
  int v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size())
    throw UsageError(fmt::format("--nodes: '{}' is not an integer", s));
  return v;
}

/// "1-50", "5,10,20" or a mix such as "1-10,20,50".
std::vector<int> parse_node_list(std::string_view text) {
  std::vector<int> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find(',', start);
    if (end == std::string_view::npos)
      end = text.size();
    const std::string_view item = text.substr(start, end - start);
    if (const auto dash = item.find('-'); dash != std::string_view::npos && dash > 0) {
      const int lo = parse_int(item.substr(0, dash)), hi = parse_int(item.substr(dash + 1));
      if (hi < lo)
        throw UsageError(fmt::format("--nodes: empty range '{}'", item));
      for (int n = lo; n <= hi; ++n)
        out.push_back(n);
    } else {
      out.push_back(parse_int(item));
    }
    start = end + 1;
  }
  return out;
}

ScenarioConfig base_config(const Options& o) {
  ScenarioConfig c = o.config.empty() ? ScenarioConfig{} : load_config(o.config);
  if (!o.strategy.empty())
    apply_config_key(c, "strategy", o.strategy);
  if (o.fragments)
    c.strategy.fragments_per_packet = *o.fragments;
  if (o.sessions)
    c.strategy.retx_sessions_max = *o.sessions;
  if (o.seed)
    c.seed = *o.seed;
  return c;
}

int cmd_run(const Options& o) {
  ScenarioConfig c = base_config(o);
  if (!o.nodes.empty()) {
    const auto list = parse_node_list(o.nodes);
    if (list.size() != 1)
      throw UsageError("run takes a single --nodes value");
    c.node_count = list.front();
  }
  c.validate();

  const RunResult r = run(c, RunOptions{!o.log.empty()});
  if (!o.log.empty()) {
    std::ofstream f(o.log);
    if (!f)
      throw std::runtime_error(fmt::format("cannot write event log '{}'", o.log));
    r.log.write(f);
  }
  RunRecord rec{{c.strategy, c.node_count, c.seed}, r.metrics, {}};
  write_runs_csv(std::cout, c, {rec});
  if (!o.out_dir.empty()) {
    std::filesystem::create_directories(o.out_dir);
    std::ofstream f(std::filesystem::path(o.out_dir) / "run.csv");
    write_runs_csv(f, c, {rec});
  }
  return 0;
}

int cmd_sweep(const Options& o) {
  const ScenarioConfig base = base_config(o);
  SweepSpec spec = SweepSpec::defaults(base);
  spec.seeds_per_point = o.seeds;
  if (!o.nodes.empty())
    spec.node_counts = parse_node_list(o.nodes);
  if (!o.strategy.empty() || o.fragments || o.sessions) {
    spec.strategies = {base.strategy};
    spec.extra.clear();
  }
  spec.validate();
  base.validate();

  const auto t0 = std::chrono::steady_clock::now();
  const std::vector<RunRecord> records = execute_parallel(spec, o.jobs);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  std::size_t failed = 0;
  for (const RunRecord& r : records)
    if (!r.metrics) {
      ++failed;
      std::cerr << fmt::format("warning: {} nodes={} seed={} failed: {}\n", r.job.strategy.label(), r.job.nodes,
                               r.job.seed, r.error);
    }
  if (failed)
    std::cerr << fmt::format("warning: {} of {} runs failed and were left out of the summary\n", failed,
                             records.size());

  const SweepSummary summary = aggregate(spec, records);
  const std::string dir = o.out_dir.empty() ? std::string("sweep_out") : o.out_dir;
  for (const std::string& path : write_sweep_outputs(dir, spec, records, summary))
    std::cout << path << '\n';
  std::cerr << fmt::format("{} runs in {:.1f} s\n", records.size(), secs);
  return failed == records.size() ? kExitRuntime : 0;
}

int cmd_table1(const Options& o) {
  const ScenarioConfig c = base_config(o);
  c.radio.validate();
  fmt::print("header overhead, {} B payload, SF{} / {:g} kHz\n", c.payload_bytes, c.radio.spreading_factor,
             c.radio.bandwidth_hz / 1e3);
  fmt::print("{:>4} {:>7} {:>10} {:>10} {:>8}\n", "n_f", "header", "computed", "reference", "delta");
  for (const OverheadCell& cell : header_overhead_table(c.radio, c.payload_bytes)) {
    if (cell.reference)
      fmt::print("{:>4} {:>6}B {:>10.2f} {:>10.2f} {:>+8.2f}\n", cell.n_f, cell.header_bytes, cell.computed,
                 *cell.reference, cell.computed - *cell.reference);
    else
      fmt::print("{:>4} {:>6}B {:>10.2f} {:>10} {:>8}\n", cell.n_f, cell.header_bytes, cell.computed, "-", "-");
  }
  return 0;
}

int cmd_replay(const Options& o, const std::string& positional) {
  const std::string path = !o.log.empty() ? o.log : positional;
  if (path.empty())
    throw UsageError("replay needs an event log (--log FILE)");
  std::ifstream in(path);
  if (!in)
    throw std::runtime_error(fmt::format("cannot open event log '{}'", path));
  const EventLog log = EventLog::read(in);
  const ScenarioConfig c = config_from_log(log);
  RunRecord rec{{c.strategy, c.node_count, c.seed}, replay_metrics(log), {}};
  write_runs_csv(std::cout, c, {rec});
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"LoRaWAN fragmentation and group-NACK simulator"};
  app.require_subcommand(1);
  Options o;
  std::string replay_path;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config, "scenario file (key = value lines)");
    sub->add_option("--seed", o.seed, "master seed");
    sub->add_option("--strategy", o.strategy, "aloha, buffered_aloha, frag, frag_retx");
    sub->add_option("--fragments", o.fragments, "fragments per packet");
    sub->add_option("--sessions", o.sessions, "retransmission sessions per packet");
    sub->add_option("--out-dir", o.out_dir, "output directory");
  };

  CLI::App* run_cmd = app.add_subcommand("run", "one simulation; prints its metrics row");
  add_common(run_cmd);
  run_cmd->add_option("--nodes", o.nodes, "node count");
  run_cmd->add_option("--log", o.log, "write the event log here");

  CLI::App* sweep_cmd = app.add_subcommand("sweep", "density x strategy x seed sweep with CSV and SVG output");
  add_common(sweep_cmd);
  sweep_cmd->add_option("--nodes", o.nodes, "node counts, e.g. 1-50 or 5,10,20");
  sweep_cmd->add_option("--seeds", o.seeds, "seeds per point")->check(CLI::PositiveNumber);
  sweep_cmd->add_option("--jobs", o.jobs, "concurrent runs (0 = all cores)")->check(CLI::NonNegativeNumber);

  CLI::App* table_cmd = app.add_subcommand("table1", "header overhead of 2 to 5 fragments");
  table_cmd->add_option("--config", o.config, "scenario file (radio and payload are used)");

  CLI::App* replay_cmd = app.add_subcommand("replay", "recompute metrics from an event log");
  replay_cmd->add_option("--log", o.log, "event log to replay");
  replay_cmd->add_option("log_file", replay_path, "event log to replay");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*run_cmd) return cmd_run(o);
    if (*sweep_cmd) return cmd_sweep(o);
    if (*table_cmd) return cmd_table1(o);
    if (*replay_cmd) return cmd_replay(o, replay_path);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitUsage;
}
