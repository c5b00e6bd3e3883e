#include "lpwan/sweep.hpp"

#include "lpwan/plot.hpp"

#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <filesystem>
#include <fmt/format.h>
#include <fstream>
#include <map>
#include <numeric>
#include <omp.h>
#include <sstream>
#include <stdexcept>

namespace lpwan {

SweepSpec SweepSpec::defaults(const ScenarioConfig& base) {
  SweepSpec s;
  s.base = base;
  for (int n = 1; n <= 50; ++n)
    s.node_counts.push_back(n);
  s.strategies = {Strategy::aloha(), Strategy::buffered_aloha()};
  for (int n_f = 2; n_f <= 5; ++n_f)
    s.strategies.push_back(Strategy::frag_retx(n_f, 1));
  for (int n_f = 2; n_f <= 5; ++n_f)
    s.extra.push_back(Strategy::frag(n_f));
  for (int n_f = 2; n_f <= 5; ++n_f)
    s.extra.push_back(Strategy::frag_retx(n_f, 2));
  return s;
}

std::vector<Strategy> SweepSpec::all_strategies() const {
  std::vector<Strategy> out = strategies;
  for (const Strategy& s : extra)
    if (std::find(out.begin(), out.end(), s) == out.end())
      out.push_back(s);
  return out;
}

void SweepSpec::validate() const {
  if (node_counts.empty())
    throw ConfigError("sweep needs at least one node count");
  if (strategies.empty())
    throw ConfigError("sweep needs at least one strategy");
  if (seeds_per_point < 1)
    throw ConfigError("seeds_per_point must be >= 1");
  for (int n : node_counts)
    if (n < 1)
      throw ConfigError("node counts must be >= 1");
  for (const Strategy& s : all_strategies())
    s.validate();
}

std::vector<SweepJob> plan_sweep(const SweepSpec& spec) {
  spec.validate();
  std::vector<SweepJob> jobs;
  for (const Strategy& s : spec.all_strategies())
    for (int n : spec.node_counts)
      for (int k = 0; k < spec.seeds_per_point; ++k)
        jobs.push_back({s, n, spec.base.seed + static_cast<std::uint64_t>(k)});
  return jobs;
}

ScenarioConfig job_config(const ScenarioConfig& base, const SweepJob& job) {
  ScenarioConfig c = base;
  c.strategy = job.strategy;
  c.node_count = job.nodes;
  c.seed = job.seed;
  return c;
}

namespace {

RunRecord run_job(const ScenarioConfig& base, const SweepJob& job) {
  RunRecord r;
  r.job = job;
  try {
    r.metrics = run(job_config(base, job), RunOptions{false}).metrics;
  } catch (const std::exception& e) {
    r.error = e.what();
  }
  return r;
}

std::string cell(const std::optional<double>& v) { return v ? fmt::format("{}", *v) : std::string("undefined"); }

} // namespace

std::vector<RunRecord> execute_serial(const SweepSpec& spec) {
  const std::vector<SweepJob> plan = plan_sweep(spec);
  std::vector<RunRecord> out;
  out.reserve(plan.size());
  for (const SweepJob& job : plan)
    out.push_back(run_job(spec.base, job));
  return out;
}

std::vector<RunRecord> execute_parallel(const SweepSpec& spec, int jobs) {
  const std::vector<SweepJob> plan = plan_sweep(spec);
  std::vector<RunRecord> out(plan.size());
  const int threads = jobs > 0 ? jobs : omp_get_max_threads();
  const auto n = static_cast<std::int64_t>(plan.size());
  // Runs share nothing; each writes only its own slot.
#pragma omp parallel for schedule(dynamic) num_threads(threads)
  for (std::int64_t i = 0; i < n; ++i)
    out[static_cast<std::size_t>(i)] = run_job(spec.base, plan[static_cast<std::size_t>(i)]);
  return out;
}

std::optional<Stat> summarize(const std::vector<double>& values, bool with_ci) {
  if (values.empty())
    return std::nullopt;
  Stat s;
  s.n = static_cast<int>(values.size());
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) / s.n;
  if (with_ci && s.n >= 2) {
    double ss = 0.0;
    for (double v : values)
      ss += (v - s.mean) * (v - s.mean);
    const double sd = std::sqrt(ss / (s.n - 1));
    const boost::math::students_t dist(s.n - 1);
    s.ci95_half = boost::math::quantile(boost::math::complement(dist, 0.025)) * sd / std::sqrt(double(s.n));
  }
  return s;
}

const PointSummary* SweepSummary::find(const std::string& strategy, int nodes) const {
  for (const PointSummary& p : points)
    if (p.strategy == strategy && p.nodes == nodes)
      return &p;
  return nullptr;
}

std::optional<double> SweepSummary::gain(const std::string& name, int n_f) const {
  for (const GainRow& g : gains)
    if (g.name == name && g.n_f == n_f)
      return g.value;
  return std::nullopt;
}

SweepSummary aggregate(const SweepSpec& spec, const std::vector<RunRecord>& records) {
  SweepSummary out;
  out.with_ci = spec.seeds_per_point > 1;

  struct Acc {
    int runs = 0;
    std::vector<double> gp, ac, ee;
  };
  std::map<std::pair<std::string, int>, Acc> acc;
  for (const RunRecord& r : records) {
    if (!r.metrics)
      continue;
    Acc& a = acc[{r.job.strategy.label(), r.job.nodes}];
    ++a.runs;
    if (r.metrics->goodput_percent) a.gp.push_back(*r.metrics->goodput_percent);
    if (r.metrics->app_capacity_percent) a.ac.push_back(*r.metrics->app_capacity_percent);
    if (r.metrics->energy_per_correct_packet) a.ee.push_back(*r.metrics->energy_per_correct_packet);
  }
  for (const Strategy& s : spec.all_strategies())
    for (int n : spec.node_counts) {
      auto it = acc.find({s.label(), n});
      if (it == acc.end())
        continue;
      PointSummary p;
      p.strategy = s.label();
      p.nodes = n;
      p.runs = it->second.runs;
      p.goodput = summarize(it->second.gp, out.with_ci);
      p.app_capacity = summarize(it->second.ac, out.with_ci);
      p.energy_per_packet = summarize(it->second.ee, out.with_ci);
      out.points.push_back(std::move(p));
    }

  // Mean over densities of the per-density goodput difference.
  auto mean_diff = [&](const std::string& a, const std::string& b) -> std::optional<double> {
    double sum = 0.0;
    int count = 0;
    for (int n : spec.node_counts) {
      const PointSummary* pa = out.find(a, n);
      const PointSummary* pb = out.find(b, n);
      if (!pa || !pb || !pa->goodput || !pb->goodput)
        continue;
      sum += pa->goodput->mean - pb->goodput->mean;
      ++count;
    }
    if (count == 0)
      return std::nullopt;
    return sum / count;
  };
  const std::string ba = Strategy::buffered_aloha().label();
  for (int n_f = 2; n_f <= 5; ++n_f) {
    const std::string frag = Strategy::frag(n_f).label();
    const std::string r1 = Strategy::frag_retx(n_f, 1).label();
    const std::string r2 = Strategy::frag_retx(n_f, 2).label();
    if (auto g = mean_diff(frag, ba)) out.gains.push_back({"frag_over_ba", n_f, *g});
    if (auto g = mean_diff(r1, frag)) out.gains.push_back({"retx1_over_frag", n_f, *g});
    if (auto g = mean_diff(r2, r1)) out.gains.push_back({"retx2_over_retx1", n_f, *g});
  }
  return out;
}

void write_runs_csv(std::ostream& out, const ScenarioConfig& base, const std::vector<RunRecord>& records) {
  out << "node_count,strategy,n_f,retx_sessions,seed,m_asked,m_sent,m_correct,goodput_pct,app_capacity_pct,"
         "energy_J,energy_per_pkt_J,header_overhead_pct,status,drops,uplinks,retransmissions,nacks,gateway_energy_J\n";
  for (const RunRecord& r : records) {
    const Strategy& s = r.job.strategy;
    const double overhead =
        s.fragmented() ? header_overhead(s.fragments_per_packet, base.payload_bytes, base.fragment_header_bytes, base.radio)
                       : 0.0;
    out << fmt::format("{},{},{},{},{},", r.job.nodes, s.kind_name(), s.fragments_per_packet, s.retx_sessions_max,
                       r.job.seed);
    if (!r.metrics) {
      out << fmt::format(",,,,,,,{},failed,,,,,\n", overhead);
      continue;
    }
    const MetricsReport& m = *r.metrics;
    out << fmt::format("{},{},{},{},{},{},{},{},ok,{},{},{},{},{}\n", m.m_asked, m.m_sent, m.m_correct,
                       cell(m.goodput_percent), cell(m.app_capacity_percent), m.energy_joules,
                       cell(m.energy_per_correct_packet), overhead, m.drops, m.uplinks, m.retransmissions, m.nacks,
                       m.gateway_energy_joules);
  }
}

void write_summary_csv(std::ostream& out, const SweepSummary& summary) {
  out << "kind,strategy,nodes,n_f,metric,mean,n" << (summary.with_ci ? ",ci95_half" : "") << '\n';
  auto row = [&](const PointSummary& p, const char* metric, const std::optional<Stat>& s) {
    out << fmt::format("point,{},{},,{},{},{}", p.strategy, p.nodes, metric, s ? fmt::format("{}", s->mean) : "undefined",
                       s ? s->n : 0);
    if (summary.with_ci)
      out << ',' << (s && s->ci95_half ? fmt::format("{}", *s->ci95_half) : std::string("undefined"));
    out << '\n';
  };
  for (const PointSummary& p : summary.points) {
    row(p, "goodput", p.goodput);
    row(p, "app_capacity", p.app_capacity);
    row(p, "energy_per_packet", p.energy_per_packet);
  }
  for (const GainRow& g : summary.gains) {
    out << fmt::format("gain,{},,{},goodput_gain_pp,{},", g.name, g.n_f, g.value);
    if (summary.with_ci)
      out << ',';
    out << '\n';
  }
}

std::vector<std::string> write_sweep_outputs(const std::string& dir, const SweepSpec& spec,
                                             const std::vector<RunRecord>& records, const SweepSummary& summary) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  std::vector<std::string> written;
  auto emit = [&](const std::string& name, const std::string& body) {
    const fs::path p = fs::path(dir) / name;
    std::ofstream f(p);
    if (!f)
      throw std::runtime_error(fmt::format("cannot write '{}'", p.string()));
    f << body;
    written.push_back(p.string());
  };
  {
    std::ostringstream os;
    write_runs_csv(os, spec.base, records);
    emit("runs.csv", os.str());
  }
  {
    std::ostringstream os;
    write_summary_csv(os, summary);
    emit("summary.csv", os.str());
  }

  auto curves = [&](auto pick) {
    std::vector<Series> series;
    for (const Strategy& s : spec.strategies) {
      Series line{s.label(), {}};
      for (int n : spec.node_counts)
        if (const PointSummary* p = summary.find(s.label(), n))
          if (const std::optional<Stat>& st = pick(*p))
            line.points.emplace_back(n, st->mean);
      series.push_back(std::move(line));
    }
    return series;
  };
  emit("goodput.svg", svg_line_chart("Network goodput", "sensor nodes", "goodput (%)",
                                     curves([](const PointSummary& p) -> const std::optional<Stat>& { return p.goodput; })));
  emit("app_capacity.svg",
       svg_line_chart("Application capacity", "sensor nodes", "application capacity (%)",
                      curves([](const PointSummary& p) -> const std::optional<Stat>& { return p.app_capacity; })));
  emit("energy.svg", svg_line_chart("Energy efficiency", "sensor nodes", "J per correct packet",
                                    curves([](const PointSummary& p) -> const std::optional<Stat>& {
                                      return p.energy_per_packet;
                                    })));

  const std::vector<std::string> gain_names{"frag_over_ba", "retx1_over_frag", "retx2_over_retx1"};
  std::vector<BarGroup> groups;
  for (int n_f = 2; n_f <= 5; ++n_f) {
    BarGroup g{fmt::format("{} fragments", n_f), {}};
    for (const std::string& name : gain_names)
      g.values.push_back(summary.gain(name, n_f).value_or(std::nan("")));
    groups.push_back(std::move(g));
  }
  emit("gains.svg", svg_bar_chart("Average goodput gains", "gain (percentage points)", gain_names, groups));
  return written;
}

} // namespace lpwan
