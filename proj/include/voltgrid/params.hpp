#pragma once

#include "voltgrid/fixed.hpp"

#include <json.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace voltgrid {

/// Execution timetable: the engine (re)places entry grids only at times
/// t = anchor + n*period; each such time opens an interval of `width_s`
/// during which monitoring runs every cycle.
struct ExecutionSchedule {
    std::int64_t anchor_ms = 0;
    std::int64_t period_s = 900;
    std::int64_t width_s = 60;

    bool opens_interval(std::int64_t t_ms) const {
        return t_ms >= anchor_ms && (t_ms - anchor_ms) % (period_s * 1000) == 0;
    }
    /// Monotone cycle number derived from the clock alone, so a restarted
    /// engine continues the same numbering.
    std::int64_t cycle_index(std::int64_t t_ms) const {
        return (t_ms - anchor_ms) / (width_s * 1000);
    }
};

/// Market-cap sizing coefficient: piecewise-constant per rank quartile of a
/// configured universe, clamped to [floor, cap].
struct CapRankWeights {
    std::vector<Fixed> quartile_weights = {
        Fixed::from_int(1), Fixed::parse("0.75"), Fixed::parse("0.5"),
        Fixed::parse("0.25")};
    int universe_size = 200;
    Fixed floor = Fixed::parse("0.25");
    Fixed cap = Fixed::from_int(1);
};

/// Funding sizing coefficient: 1 while |funding| <= low_threshold, linearly
/// decaying to 0 at high_threshold (order deactivation).
struct FundingDecay {
    Fixed low_threshold = Fixed::parse("0.0001");
    Fixed high_threshold = Fixed::parse("0.001");
};

/// The complete externalized parameter record of the trading bot. Every
/// tunable the engine reads lives here; the engine itself carries no
/// embedded constants.
struct BotParams {
    ExecutionSchedule schedule;
    std::int64_t tau_s = 14400;       ///< volatility look-back (seconds)
    Fixed v_req;                      ///< min 24h quote turnover to qualify
    Fixed phi_req;                    ///< min volatility ratio to qualify
    Fixed capital_per_pair = Fixed::from_int(1000);
    std::vector<Fixed> entry_exponents = {Fixed::from_int(1), Fixed::from_int(2),
                                          Fixed::from_int(3)};
    std::vector<Fixed> entry_fractions = {Fixed::parse("0.2"), Fixed::parse("0.3"),
                                          Fixed::parse("0.5")};
    std::vector<Fixed> exit_exponents = {Fixed::from_int(1), Fixed::from_int(2)};
    CapRankWeights cap_weights;
    FundingDecay funding_decay;
    Fixed entry_scaling_exponent = Fixed::from_int(1);
    Fixed sweep_divisor = Fixed::from_int(100);
    Fixed deviation_tolerance = Fixed::parse("0.01");
    /// Exit ladder split; empty means equal fractions across exit levels,
    /// with the last level absorbing any rounding remainder.
    std::vector<Fixed> partial_close_fractions;
    std::string volatility_indicator = "oc_range_volatility";
    std::string strategy_template = "grid_long";

    std::size_t entry_levels() const { return entry_exponents.size(); }
    std::size_t exit_levels() const { return exit_exponents.size(); }
};

/// Throws ValidationError when structural invariants are broken: equal-length
/// strictly-increasing entry ladders, fractions in (0, 1], positive capital
/// and divisors, partial-close fractions summing to at most 1.
void validate_params(const BotParams& p);

nlohmann::ordered_json params_to_json(const BotParams& p);
/// Strict: unknown keys raise ConfigError naming the key.
BotParams params_from_json(const nlohmann::json& j);

} // namespace voltgrid
