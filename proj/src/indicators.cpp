#include "voltgrid/indicators.hpp"

#include <algorithm>

namespace voltgrid {

namespace {

/// Resolves [t_e - tau, t_e] to candle indices [first, last]; tau is floored
/// to a whole number of candle intervals. The window is anchored at the
/// newest candle opening at or before t_e — for a history trimmed to closed
/// bars that is the bar whose close is the current price.
std::pair<std::size_t, std::size_t> window_indices(const PairSeries& series,
                                                   std::int64_t t_e_ms,
                                                   std::int64_t tau_s) {
    if (tau_s < 0) throw ValidationError("negative look-back duration");
    std::ptrdiff_t last = series.index_at_or_before(t_e_ms);
    if (last < 0) {
        throw InsufficientDataError("series " + series.pair_id +
                                    " does not cover " + std::to_string(t_e_ms));
    }
    std::int64_t steps = tau_s * 1000 / series.interval_ms();
    if (steps > last) {
        throw InsufficientDataError(
            "series " + series.pair_id + " covers only " +
            std::to_string(last) + " step(s) before " +
            std::to_string(series.candles[last].timestamp) + ", need " +
            std::to_string(steps));
    }
    return {static_cast<std::size_t>(last - steps), static_cast<std::size_t>(last)};
}

Fixed oc_range_volatility(const PairSeries& series, std::int64_t t_e_ms,
                          std::int64_t tau_s) {
    auto [first, last] = window_indices(series, t_e_ms, tau_s);
    Fixed hi = series.candles[first].open;
    Fixed lo = hi;
    for (std::size_t i = first; i <= last; ++i) {
        for (Fixed v : {series.candles[i].open, series.candles[i].close}) {
            hi = std::max(hi, v);
            lo = std::min(lo, v);
        }
    }
    return Fixed::div(hi - lo, series.candles[last].close);
}

Fixed hl_range_volatility(const PairSeries& series, std::int64_t t_e_ms,
                          std::int64_t tau_s) {
    auto [first, last] = window_indices(series, t_e_ms, tau_s);
    Fixed hi = series.candles[first].high;
    Fixed lo = series.candles[first].low;
    for (std::size_t i = first; i <= last; ++i) {
        hi = std::max(hi, series.candles[i].high);
        lo = std::min(lo, series.candles[i].low);
    }
    return Fixed::div(hi - lo, series.candles[last].close);
}

Fixed rolling_volume(const PairSeries& series, std::int64_t t_e_ms,
                     std::int64_t tau_s) {
    auto [first, last] = window_indices(series, t_e_ms, tau_s);
    Fixed sum;
    for (std::size_t i = first; i <= last; ++i) sum += series.candles[i].volume;
    return sum;
}

} // namespace

Fixed volatility(const PairSeries& series, std::int64_t t_e_ms,
                 std::int64_t tau_s) {
    return oc_range_volatility(series, t_e_ms, tau_s);
}

std::optional<Fixed> try_volatility(const PairSeries& series,
                                    std::int64_t t_e_ms, std::int64_t tau_s,
                                    const std::string& indicator_name) {
    IndicatorFn fn = indicator_registry_lookup(indicator_name);
    try {
        return fn(series, t_e_ms, tau_s);
    } catch (const InsufficientDataError&) {
        return std::nullopt;
    }
}

const std::map<std::string, IndicatorFn>& indicator_registry() {
    static const std::map<std::string, IndicatorFn> registry = {
        {"oc_range_volatility", &oc_range_volatility},
        {"hl_range_volatility", &hl_range_volatility},
        {"rolling_volume", &rolling_volume},
    };
    return registry;
}

IndicatorFn indicator_registry_lookup(const std::string& name) {
    const auto& registry = indicator_registry();
    auto it = registry.find(name);
    if (it != registry.end()) return it->second;
    std::string known;
    for (const auto& [k, _] : registry) {
        if (!known.empty()) known += ", ";
        known += k;
    }
    throw LookupError("unknown indicator '" + name + "'; registered: " + known);
}

std::vector<std::string> qualify_pairs(const MarketSnapshot& snapshot,
                                       const QualifyThresholds& thresholds) {
    std::vector<std::string> out;
    for (const auto& [pair_id, quote] : snapshot.quotes) {
        if (quote.volume_24h < thresholds.v_req) continue;
        if (!snapshot.has_history(pair_id)) continue;
        auto phi = try_volatility(snapshot.history(pair_id), snapshot.as_of,
                                  thresholds.tau_s, thresholds.volatility_indicator);
        if (!phi || *phi < thresholds.phi_req) continue;
        out.push_back(pair_id);
    }
    return out;
}

} // namespace voltgrid
