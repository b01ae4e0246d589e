#include "voltgrid/connector.hpp"

#include "voltgrid/errors.hpp"

#include <algorithm>
#include <tuple>

namespace voltgrid {

void validate_retry_policy(const RetryPolicy& p) {
    if (p.max_attempts < 1) {
        throw ConfigError("retry policy needs at least one attempt");
    }
    if (p.backoff_ms < 0) throw ConfigError("retry backoff cannot be negative");
    if (p.breaker_threshold < 1) {
        throw ConfigError("circuit breaker threshold must be >= 1");
    }
}

MarketSnapshot build_snapshot(
    const std::map<std::string, PairSeries>& series,
    const std::map<std::string, PairRuntimeInfo>& info,
    const std::map<std::string, PairFilters>& filters, std::int64_t t_ms) {
    MarketSnapshot snap;
    snap.as_of = t_ms;
    for (const auto& [pair, full] : series) {
        // Only bars already closed at t are visible to the strategy.
        PairSeries visible;
        visible.pair_id = full.pair_id;
        visible.interval_s = full.interval_s;
        for (const Candle& c : full.candles) {
            if (c.timestamp + full.interval_ms() <= t_ms) {
                visible.candles.push_back(c);
            } else {
                break;
            }
        }
        if (visible.candles.empty()) continue; // nothing tradable yet

        PairQuote quote;
        quote.latest = visible.candles.back().close;
        quote.mark = quote.latest;
        Fixed turnover;
        std::int64_t day_ago = t_ms - 24 * 3'600'000;
        for (auto it = visible.candles.rbegin(); it != visible.candles.rend();
             ++it) {
            if (it->timestamp < day_ago) break;
            turnover += it->volume;
        }
        quote.volume_24h = turnover;
        auto inf = info.find(pair);
        if (inf != info.end()) {
            quote.funding_rate = inf->second.funding_rate;
            quote.cap_rank = inf->second.cap_rank;
        }
        auto flt = filters.find(pair);
        if (flt != filters.end()) {
            quote.tick = flt->second.tick;
            quote.lot = flt->second.lot;
            quote.min_notional = flt->second.min_notional;
        }
        snap.quotes[pair] = quote;
        snap.series[pair] = std::move(visible);
    }
    return snap;
}

FixtureConnector::FixtureConnector(SimConfig sim_config,
                                   std::map<std::string, PairSeries> series,
                                   std::map<std::string, PairRuntimeInfo> info)
    : sim_(std::move(sim_config)), series_(std::move(series)),
      info_(std::move(info)), filters_(sim_.filters()) {
    for (const auto& [pair, s] : series_) {
        (void)pair;
        validate_series(s);
    }
}

MarketSnapshot FixtureConnector::fetch_snapshot(std::int64_t t_ms) {
    return build_snapshot(series_, info_, filters_, t_ms);
}

SubmitAck FixtureConnector::submit(const Action& action, std::int64_t t_ms) {
    return sim_.submit(action, t_ms);
}

bool FixtureConnector::cancel(const std::string& client_key, std::int64_t t_ms) {
    return sim_.cancel(client_key, t_ms);
}

AccountView FixtureConnector::fetch_account(std::int64_t t_ms) {
    return sim_.snapshot_account(t_ms);
}

const std::vector<FillRecord>& FixtureConnector::trade_log() const {
    return sim_.fills();
}

void FixtureConnector::advance(std::int64_t from_ms, std::int64_t to_ms) {
    if (to_ms <= from_ms) {
        throw ValidationError("market advance window must move forward");
    }
    // Bars closing in (from, to], across pairs, ordered by (close, pair):
    // a bar is matched only once it has fully formed, so a decision made at
    // `to` never acts on flow the strategy could not have seen.
    std::vector<std::tuple<std::int64_t, const std::string*, const Candle*>> due;
    for (const auto& [pair, s] : series_) {
        std::int64_t span = s.interval_ms();
        for (const Candle& c : s.candles) {
            std::int64_t close_at = c.timestamp + span;
            if (close_at > to_ms) break;
            if (close_at > from_ms) due.emplace_back(close_at, &pair, &c);
        }
    }
    std::sort(due.begin(), due.end(), [](const auto& a, const auto& b) {
        if (std::get<0>(a) != std::get<0>(b)) {
            return std::get<0>(a) < std::get<0>(b);
        }
        return *std::get<1>(a) < *std::get<1>(b);
    });
    for (const auto& [close_at, pair, candle] : due) {
        (void)close_at;
        sim_.match_candle(*pair, *candle);
    }

    // Funding boundaries crossed in (from, to].
    std::int64_t step = sim_.funding_config().interval_hours * 3'600'000;
    if (step > 0) {
        std::map<std::string, Fixed> rates;
        for (const auto& [pair, inf] : info_) {
            if (!inf.funding_rate.is_zero()) rates[pair] = inf.funding_rate;
        }
        if (!rates.empty()) {
            std::int64_t b = (from_ms / step) * step;
            if (b <= from_ms) b += step;
            for (; b <= to_ms; b += step) sim_.apply_funding(b, rates);
        }
    }
    sim_.sample_equity(to_ms);
}

} // namespace voltgrid
