#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "voltgrid/backtest.hpp"
#include "voltgrid/connector.hpp"
#include "voltgrid/exchange.hpp"
#include "voltgrid/feedback.hpp"
#include "voltgrid/optimize.hpp"
#include "voltgrid/params.hpp"
#include "voltgrid/scenarios.hpp"
#include "voltgrid/solver.hpp"

#include "json.hpp"

namespace voltgrid {

/// One candle file to load. `interval_s` = 0 infers the bar interval from
/// the data. Format is chosen by extension: .csv or .jsonl.
struct DataSourceSpec {
    std::string pair;
    std::string path;
    std::int64_t interval_s = 0;
};

/// A full run description as read from a JSON config file. Unknown keys are
/// rejected at every level so a typo cannot silently fall back to defaults.
/// Credentials never appear here; live connectors read them from the
/// environment.
struct RunConfig {
    std::string market_profile = "crypto"; ///< crypto | index_futures
    std::int64_t start_ms = 0;
    std::int64_t end_ms = 0;
    std::int64_t cycle_ms = 60'000;
    std::string out_dir = "out";
    std::vector<DataSourceSpec> data;
    std::map<std::string, PairRuntimeInfo> pair_info;
    BotParams params;
    SimConfig sim;
    DetectorConfig detector;
    ObjectiveSpec objective;
    RiskBudget budget;
    OptimizerConfig optimizer;
    RetryPolicy retry;

    /// 365 for the around-the-clock profile, 252 for session markets.
    double annualization_days() const;
};

/// Parses and validates a config object. Throws ConfigError naming the
/// first unknown or ill-typed key.
RunConfig run_config_from_json(const nlohmann::json& j);

nlohmann::ordered_json run_config_to_json(const RunConfig& cfg);

/// Reads, parses, and validates a config file.
RunConfig load_run_config(const std::string& path);

/// Loads every configured candle file (paths resolved relative to
/// `base_dir` unless absolute) and assembles the replay configuration.
BacktestConfig to_backtest_config(const RunConfig& cfg,
                                  const std::string& base_dir = "");

} // namespace voltgrid
