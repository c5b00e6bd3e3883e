#include "lpwan/config.hpp"

#include <charconv>
#include <fmt/format.h>
#include <fstream>
#include <functional>
#include <sstream>

namespace lpwan {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos)
    return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double to_double(std::string_view key, std::string_view v) {
  double out = 0.0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || p != v.data() + v.size())
    throw ConfigError(fmt::format("'{}' expects a number, got '{}'", key, v));
  return out;
}

template <typename Int>
Int to_int(std::string_view key, std::string_view v) {
  Int out{};
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || p != v.data() + v.size())
    throw ConfigError(fmt::format("'{}' expects an integer, got '{}'", key, v));
  return out;
}

bool to_bool(std::string_view key, std::string_view v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError(fmt::format("'{}' expects true/false, got '{}'", key, v));
}

std::string b(bool v) { return v ? "true" : "false"; }
std::string d(double v) { return fmt::format("{}", v); }

struct Field {
  std::string_view key;
  std::function<void(ScenarioConfig&, std::string_view)> set;
  std::function<std::string(const ScenarioConfig&)> get;
};

#define LPWAN_DOUBLE(name, member)                                                                                 \
  Field {                                                                                                          \
    name, [](ScenarioConfig& c, std::string_view v) { c.member = to_double(name, v); },                            \
        [](const ScenarioConfig& c) { return d(c.member); }                                                        \
  }
#define LPWAN_INT(name, member)                                                                                    \
  Field {                                                                                                          \
    name, [](ScenarioConfig& c, std::string_view v) { c.member = to_int<int>(name, v); },                          \
        [](const ScenarioConfig& c) { return std::to_string(c.member); }                                           \
  }
#define LPWAN_BOOL(name, member)                                                                                   \
  Field {                                                                                                          \
    name, [](ScenarioConfig& c, std::string_view v) { c.member = to_bool(name, v); },                              \
        [](const ScenarioConfig& c) { return b(c.member); }                                                        \
  }

const std::vector<Field>& fields() {
  static const std::vector<Field> table = {
      {"strategy",
       [](ScenarioConfig& c, std::string_view v) {
         const StrategyKind kind = parse_strategy_kind(v);
         switch (kind) {
         case StrategyKind::Aloha: c.strategy = Strategy::aloha(); break;
         case StrategyKind::BufferedAloha: c.strategy = Strategy::buffered_aloha(); break;
         case StrategyKind::FragNoRetx: c.strategy = Strategy::frag(3); break;
         case StrategyKind::FragRetx: c.strategy = Strategy::frag_retx(3, 1); break;
         }
       },
       [](const ScenarioConfig& c) { return std::string(c.strategy.kind_name()); }},
      LPWAN_INT("fragments", strategy.fragments_per_packet),
      LPWAN_INT("retx_sessions", strategy.retx_sessions_max),
      LPWAN_INT("node_count", node_count),
      {"channels_hz",
       [](ScenarioConfig& c, std::string_view v) {
         c.channel_frequencies_hz.clear();
         std::size_t start = 0;
         while (start <= v.size()) {
           std::size_t end = v.find(',', start);
           if (end == std::string_view::npos)
             end = v.size();
           c.channel_frequencies_hz.push_back(to_double("channels_hz", trim(v.substr(start, end - start))));
           start = end + 1;
         }
       },
       [](const ScenarioConfig& c) {
         std::string out;
         for (std::size_t i = 0; i < c.channel_frequencies_hz.size(); ++i)
           out += (i ? "," : "") + d(c.channel_frequencies_hz[i]);
         return out;
       }},
      LPWAN_INT("radio.spreading_factor", radio.spreading_factor),
      LPWAN_DOUBLE("radio.bandwidth_hz", radio.bandwidth_hz),
      LPWAN_INT("radio.coding_rate_denominator", radio.coding_rate_denominator),
      LPWAN_INT("radio.preamble_symbols", radio.preamble_symbols),
      LPWAN_BOOL("radio.explicit_header", radio.explicit_header),
      LPWAN_BOOL("radio.crc_enabled", radio.crc_enabled),
      LPWAN_BOOL("radio.low_data_rate_optimize", radio.low_data_rate_optimize),
      LPWAN_DOUBLE("radio.tx_power_dbm", radio.tx_power_dbm),
      LPWAN_DOUBLE("radio.tx_current_a", radio.tx_current_a),
      LPWAN_DOUBLE("radio.rx_current_a", radio.rx_current_a),
      LPWAN_DOUBLE("radio.supply_voltage_v", radio.supply_voltage_v),
      LPWAN_DOUBLE("duty_cycle_percent", duty_cycle_percent),
      LPWAN_INT("payload_bytes", payload_bytes),
      LPWAN_INT("fragment_header_bytes", fragment_header_bytes),
      LPWAN_INT("nack_header_bytes", nack_header_bytes),
      {"traffic.model",
       [](ScenarioConfig& c, std::string_view v) {
         if (v == "periodic")
           c.traffic.model = TrafficModel::Periodic;
         else if (v == "poisson")
           c.traffic.model = TrafficModel::Poisson;
         else
           throw ConfigError(fmt::format("'traffic.model' must be periodic or poisson, got '{}'", v));
       },
       [](const ScenarioConfig& c) {
         return std::string(c.traffic.model == TrafficModel::Periodic ? "periodic" : "poisson");
       }},
      LPWAN_DOUBLE("traffic.interval_s", traffic.interval_s),
      LPWAN_INT("traffic.packets_per_node", traffic.packets_per_node),
      LPWAN_DOUBLE("traffic.phase_window_s", traffic.phase_window_s),
      LPWAN_DOUBLE("sim_duration_s", sim_duration_s),
      {"seed", [](ScenarioConfig& c, std::string_view v) { c.seed = to_int<std::uint64_t>("seed", v); },
       [](const ScenarioConfig& c) { return std::to_string(c.seed); }},
      LPWAN_BOOL("capture.enabled", capture.enabled),
      LPWAN_DOUBLE("capture.margin_db", capture.margin_db),
      LPWAN_DOUBLE("sensitivity_dbm", sensitivity_dbm),
      LPWAN_DOUBLE("geometry.radius_m", geometry.radius_m),
      LPWAN_DOUBLE("geometry.path_loss_exponent", geometry.path_loss.exponent),
      LPWAN_DOUBLE("geometry.reference_loss_db", geometry.path_loss.reference_loss_db),
      LPWAN_DOUBLE("geometry.reference_distance_m", geometry.path_loss.reference_distance_m),
      LPWAN_DOUBLE("rx1_delay_s", rx1_delay_s),
      LPWAN_DOUBLE("rx2_delay_s", rx2_delay_s),
      LPWAN_DOUBLE("rx_window_symbols", rx_window_symbols),
      LPWAN_DOUBLE("tx_jitter_s", tx_jitter_s),
  };
  return table;
}

#undef LPWAN_DOUBLE
#undef LPWAN_INT
#undef LPWAN_BOOL

const Field* find_field(std::string_view key) {
  for (const Field& f : fields())
    if (f.key == key)
      return &f;
  return nullptr;
}

} // namespace

void apply_config_key(ScenarioConfig& config, std::string_view key, std::string_view value) {
  const Field* f = find_field(key);
  if (!f)
    throw ConfigError(fmt::format("unknown key '{}'", key));
  f->set(config, value);
}

ScenarioConfig parse_config(std::string_view text) {
  struct Entry {
    int line;
    std::string_view key;
    std::string_view value;
  };
  std::vector<Entry> entries;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos)
      end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos)
      line = line.substr(0, hash);
    line = trim(line);
    if (line.empty())
      continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw ConfigError(fmt::format("line {}: expected 'key = value'", line_no));
    Entry e{line_no, trim(line.substr(0, eq)), trim(line.substr(eq + 1))};
    if (e.key.empty() || e.value.empty())
      throw ConfigError(fmt::format("line {}: expected 'key = value'", line_no));
    if (!find_field(e.key))
      throw ConfigError(fmt::format("line {}: unknown key '{}'", line_no, e.key));
    for (const Entry& prev : entries)
      if (prev.key == e.key)
        throw ConfigError(fmt::format("line {}: duplicate key '{}' (first on line {})", line_no, e.key, prev.line));
    entries.push_back(e);
  }

  ScenarioConfig config;
  auto apply = [&](const Entry& e) {
    try {
      apply_config_key(config, e.key, e.value);
    } catch (const ConfigError& err) {
      throw ConfigError(fmt::format("line {}: {}", e.line, err.what()));
    }
  };
  // The strategy resets fragment defaults, so it goes first wherever it appears.
  for (const Entry& e : entries)
    if (e.key == "strategy")
      apply(e);
  for (const Entry& e : entries)
    if (e.key != "strategy")
      apply(e);

  try {
    config.validate();
  } catch (const ConfigError& err) {
    // Point at the line of the key the message names, when there is one.
    const std::string msg = err.what();
    for (const Entry& e : entries)
      if (msg.find(std::string(e.key)) != std::string::npos)
        throw ConfigError(fmt::format("line {}: {}", e.line, msg));
    throw;
  }
  return config;
}

ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in)
    throw ConfigError(fmt::format("cannot open config file '{}'", path));
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return parse_config(ss.str());
  } catch (const ConfigError& err) {
    throw ConfigError(fmt::format("{}: {}", path, err.what()));
  }
}

std::vector<std::string> config_lines(const ScenarioConfig& config) {
  std::vector<std::string> out;
  for (const Field& f : fields())
    out.push_back(fmt::format("{} = {}", f.key, f.get(config)));
  return out;
}

std::vector<std::string_view> config_keys() {
  std::vector<std::string_view> out;
  for (const Field& f : fields())
    out.push_back(f.key);
  return out;
}

} // namespace lpwan
