#include "voltgrid/candle.hpp"

#include <algorithm>

namespace voltgrid {

void validate_candle(const Candle& c) {
    if (!(c.open > Fixed()) || !(c.high > Fixed()) || !(c.low > Fixed()) ||
        !(c.close > Fixed())) {
        throw ValidationError("candle at " + std::to_string(c.timestamp) +
                              " has a non-positive price");
    }
    if (c.volume.is_negative()) {
        throw ValidationError("candle at " + std::to_string(c.timestamp) +
                              " has negative volume");
    }
    Fixed body_lo = c.open < c.close ? c.open : c.close;
    Fixed body_hi = c.open < c.close ? c.close : c.open;
    if (c.low > body_lo || c.high < body_hi) {
        throw ValidationError("candle at " + std::to_string(c.timestamp) +
                              " violates low <= open/close <= high");
    }
}

std::ptrdiff_t PairSeries::index_at(std::int64_t ts_ms) const {
    if (candles.empty()) return -1;
    std::int64_t first = candles.front().timestamp;
    if (ts_ms < first) return -1;
    std::int64_t span = ts_ms - first;
    if (span % interval_ms() != 0) return -1;
    auto idx = span / interval_ms();
    if (idx >= static_cast<std::int64_t>(candles.size())) return -1;
    return static_cast<std::ptrdiff_t>(idx);
}

std::ptrdiff_t PairSeries::index_at_or_before(std::int64_t ts_ms) const {
    if (candles.empty() || ts_ms < candles.front().timestamp) return -1;
    auto idx = (ts_ms - candles.front().timestamp) / interval_ms();
    auto last = static_cast<std::int64_t>(candles.size()) - 1;
    return static_cast<std::ptrdiff_t>(std::min(idx, last));
}

std::int64_t PairSeries::align_down(std::int64_t ts_ms) const {
    if (candles.empty() || ts_ms < candles.front().timestamp) {
        throw InsufficientDataError("series " + pair_id +
                                    " has no candle at or before " +
                                    std::to_string(ts_ms));
    }
    std::int64_t span = ts_ms - candles.front().timestamp;
    return ts_ms - span % interval_ms();
}

void validate_series(const PairSeries& series) {
    if (series.interval_s <= 0) {
        throw ValidationError("series " + series.pair_id +
                              " has non-positive interval");
    }
    std::vector<long long> missing;
    for (std::size_t i = 0; i < series.candles.size(); ++i) {
        validate_candle(series.candles[i]);
        if (i == 0) continue;
        std::int64_t prev = series.candles[i - 1].timestamp;
        std::int64_t cur = series.candles[i].timestamp;
        if (cur == prev) {
            throw ValidationError("series " + series.pair_id +
                                  " has duplicate timestamp " +
                                  std::to_string(cur));
        }
        if (cur < prev) {
            throw ValidationError("series " + series.pair_id +
                                  " is not sorted at timestamp " +
                                  std::to_string(cur));
        }
        for (std::int64_t t = prev + series.interval_ms(); t < cur;
             t += series.interval_ms()) {
            missing.push_back(t);
        }
        if ((cur - prev) % series.interval_ms() != 0) {
            throw GapError("series " + series.pair_id +
                               " spacing is not a multiple of the interval at " +
                               std::to_string(cur),
                           missing);
        }
    }
    if (!missing.empty()) {
        throw GapError("series " + series.pair_id + " is missing " +
                           std::to_string(missing.size()) + " candle(s)",
                       missing);
    }
}

const PairQuote& MarketSnapshot::quote(const std::string& pair_id) const {
    auto it = quotes.find(pair_id);
    if (it == quotes.end()) {
        throw LookupError("no quote for pair " + pair_id);
    }
    return it->second;
}

const PairSeries& MarketSnapshot::history(const std::string& pair_id) const {
    auto it = series.find(pair_id);
    if (it == series.end()) {
        throw LookupError("no candle history for pair " + pair_id);
    }
    return it->second;
}

} // namespace voltgrid
