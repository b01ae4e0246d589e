#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "voltgrid/candle.hpp"
#include "voltgrid/connector.hpp"
#include "voltgrid/exchange.hpp"
#include "voltgrid/feedback.hpp"
#include "voltgrid/fixed.hpp"
#include "voltgrid/metrics.hpp"
#include "voltgrid/orders.hpp"
#include "voltgrid/params.hpp"
#include "voltgrid/solver.hpp"

#include "json.hpp"

namespace voltgrid {

/// Everything needed to replay a strategy against recorded or generated
/// market data: strategy parameters, venue configuration, the candle series
/// per pair, and the evaluation window.
struct BacktestConfig {
    BotParams params;
    SimConfig sim;
    std::map<std::string, PairSeries> series;
    std::map<std::string, PairRuntimeInfo> pair_info;
    std::int64_t start_ms = 0;
    std::int64_t end_ms = 0;
    std::int64_t cycle_ms = 60'000;
    DetectorConfig detector;
    /// 365 for around-the-clock venues, 252 for exchange-session markets;
    /// drives both return annualization and the per-sample ratio scaling.
    double annualization_days = 365.0;
};

/// Throws ValidationError / ConfigError when the window, cycle length, or
/// series set cannot produce a well-defined run. A zero-length window
/// (start == end) is allowed and yields an empty run.
void validate_backtest_config(const BacktestConfig& cfg);

/// Output of one replay: the assembled feedback record plus the raw logs
/// it was derived from.
struct BacktestResult {
    Feedback feedback;
    std::vector<FillRecord> fills;
    std::vector<std::pair<std::int64_t, Fixed>> equity;
    std::vector<nlohmann::ordered_json> action_log;
    std::vector<EngineEvent> events;
    std::vector<double> step_latency_ms;
    /// Ladder geometry at first formation per pair, as fed to the detectors.
    std::map<std::string, GridContext> grid_context;
    /// Per-pair (deployed, available) capital samples, one per executed cycle.
    std::map<std::string, std::vector<std::pair<double, double>>> utilization;
};

/// Controls which slice of the decision timeline a trade loop executes and
/// how venue hiccups are retried. `first_cycle`/`end_cycle` are cycle
/// indexes relative to cfg.start_ms; `end_cycle < 0` means "to the end of
/// the window". Splitting one window across two calls that share a
/// connector reproduces a process restart at a cycle boundary: venue state
/// survives, in-process state is rebuilt from the account snapshot.
struct TradeLoopOptions {
    std::int64_t first_cycle = 0;
    std::int64_t end_cycle = -1;
    RetryPolicy retry;
    /// Advances the market between decision times. Wired to
    /// FixtureConnector::advance for replay runs; a live venue advances
    /// itself, so the default is a no-op.
    std::function<void(std::int64_t from, std::int64_t to)> on_advance;
};

/// Runs the decision loop for the configured slice against an already
/// constructed venue connection. Returns logs covering only the executed
/// slice; the feedback record is assembled over the slice's time span.
BacktestResult run_trade_loop(const BacktestConfig& cfg, Connector& connector,
                              const TradeLoopOptions& options);

/// Convenience wrapper: builds a FixtureConnector from cfg and runs the
/// whole window in one process.
BacktestResult run_backtest(const BacktestConfig& cfg);

/// Assembles the feedback record for an executed slice from its raw logs.
/// Handles the degenerate zero-length window by reporting every metric as
/// undefined rather than failing integrity checks.
Feedback feedback_from_run(
    const BacktestConfig& cfg, std::int64_t period_start, std::int64_t period_end,
    const std::vector<FillRecord>& fills,
    const std::vector<std::pair<std::int64_t, Fixed>>& equity,
    const std::vector<EngineEvent>& events,
    const std::map<std::string, GridContext>& grid_context,
    const std::map<std::string, std::vector<std::pair<double, double>>>& utilization);

}  // namespace voltgrid
