#pragma once

#include "voltgrid/errors.hpp"
#include "voltgrid/fixed.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace voltgrid {

/// One OHLCV bar. `timestamp` is the bar's open time, epoch milliseconds UTC.
/// Prices are quote-currency; volume is quote-currency turnover.
struct Candle {
    std::int64_t timestamp = 0;
    Fixed open;
    Fixed high;
    Fixed low;
    Fixed close;
    Fixed volume;
};

/// Throws ValidationError unless low <= min(open, close) <= max(open, close)
/// <= high, all prices are positive, and volume is non-negative.
void validate_candle(const Candle& c);

/// Time-ordered candle history for one trading pair at a fixed interval.
struct PairSeries {
    std::string pair_id;
    std::int64_t interval_s = 900; ///< bar length in seconds
    std::vector<Candle> candles;   ///< strictly increasing, evenly spaced

    std::int64_t interval_ms() const { return interval_s * 1000; }
    /// Index of the candle whose open time equals ts_ms, or -1.
    std::ptrdiff_t index_at(std::int64_t ts_ms) const;
    /// Index of the newest candle opening at or before ts_ms, or -1 when the
    /// series is empty or starts after ts_ms.
    std::ptrdiff_t index_at_or_before(std::int64_t ts_ms) const;
    /// Latest candle open time <= ts_ms, or throws InsufficientDataError
    /// when the series is empty or starts after ts_ms.
    std::int64_t align_down(std::int64_t ts_ms) const;
};

/// Validates ordering, spacing, and per-candle invariants.
/// Duplicate timestamps raise ValidationError; uneven spacing raises
/// GapError listing every missing open time.
void validate_series(const PairSeries& series);

/// Per-pair quote-side state at one instant, as an exchange would report it.
struct PairQuote {
    Fixed latest;            ///< last traded price
    Fixed mark;              ///< exchange mark price used for PnL/risk checks
    Fixed volume_24h;        ///< rolling 24h quote-currency turnover
    Fixed funding_rate;      ///< current signed funding rate per interval
    int cap_rank = 1;        ///< market capitalization rank, 1 = largest
    Fixed tick = Fixed::from_raw(1);         ///< price increment
    Fixed lot = Fixed::from_raw(1);          ///< quantity increment
    Fixed min_notional;      ///< smallest accepted order value, 0 = none
};

/// Immutable market view at time `as_of`: quotes plus enough candle history
/// per pair for the indicator window the strategy is configured with.
struct MarketSnapshot {
    std::int64_t as_of = 0; ///< epoch milliseconds
    std::map<std::string, PairQuote> quotes;
    std::map<std::string, PairSeries> series;

    const PairQuote& quote(const std::string& pair_id) const;
    const PairSeries& history(const std::string& pair_id) const;
    bool has_history(const std::string& pair_id) const {
        return series.count(pair_id) != 0;
    }
};

} // namespace voltgrid
