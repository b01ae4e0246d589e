#pragma once

#include "voltgrid/candle.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace voltgrid {

/// Deterministic indicator over a trailing window: value at `t_e` computed
/// from the candles covering [t_e - tau, t_e].
using IndicatorFn = Fixed (*)(const PairSeries& series, std::int64_t t_e_ms,
                              std::int64_t tau_s);

/// Price range over opens and closes only, relative to the window-end close:
/// (max{O,C} - min{O,C}) / C(t_e). The primary volatility estimate.
Fixed volatility(const PairSeries& series, std::int64_t t_e_ms,
                 std::int64_t tau_s);

/// As volatility(), but returns nullopt instead of throwing when the window
/// is not fully covered; the caller skips the pair for this cycle.
std::optional<Fixed> try_volatility(const PairSeries& series,
                                    std::int64_t t_e_ms, std::int64_t tau_s,
                                    const std::string& indicator_name);

/// Registered indicators: "oc_range_volatility" (the primary estimate),
/// "hl_range_volatility" (full-range alternative used for component-level
/// substitution), "rolling_volume" (quote turnover over the window).
const std::map<std::string, IndicatorFn>& indicator_registry();

/// Throws LookupError listing the registered names when `name` is unknown.
IndicatorFn indicator_registry_lookup(const std::string& name);

struct QualifyThresholds {
    Fixed v_req;                ///< minimum 24h quote turnover
    Fixed phi_req;              ///< minimum volatility ratio
    std::int64_t tau_s = 14400; ///< volatility look-back
    std::string volatility_indicator = "oc_range_volatility";
};

/// Pairs whose 24h volume and volatility both meet the thresholds, sorted by
/// pair id. Pairs lacking the data to compute volatility are excluded, never
/// errored.
std::vector<std::string> qualify_pairs(const MarketSnapshot& snapshot,
                                       const QualifyThresholds& thresholds);

} // namespace voltgrid
