#pragma once

#include "lpwan/engine.hpp"

namespace lpwan {

/// Scenario stored in a log header.
ScenarioConfig config_from_log(const EventLog& log);

/// Recomputes a run's metrics from its event log alone.
MetricsReport replay_metrics(const EventLog& log);

} // namespace lpwan
