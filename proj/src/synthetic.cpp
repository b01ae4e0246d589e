#include "voltgrid/synthetic.hpp"

#include "voltgrid/errors.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

namespace voltgrid {

namespace {

/// Uniform double in [-1, 1) from the raw engine: stable across standard
/// library implementations, unlike the distribution adaptors.
double unit_noise(std::mt19937_64& rng) {
    return (static_cast<double>(rng() >> 11) /
            static_cast<double>(1ULL << 53)) *
               2.0 -
           1.0;
}

/// Per-bar log-price drifts for each regime, all in log space so prices
/// stay positive regardless of amplitude.
std::vector<double> regime_drifts(const SyntheticSpec& spec,
                                  std::mt19937_64& rng) {
    std::vector<double> drift(static_cast<std::size_t>(spec.bars), 0.0);
    auto range_block = [&](int begin, int count, double pull) {
        // Mean reversion: drift pulls the walk back toward zero cumulative
        // displacement (handled by the caller tracking the level).
        for (int i = begin; i < begin + count && i < spec.bars; ++i) {
            drift[static_cast<std::size_t>(i)] = pull;
        }
    };
    auto move_block = [&](int begin, int count, double total) {
        if (count < 1) count = 1;
        double per_bar = total / count;
        for (int i = begin; i < begin + count && i < spec.bars; ++i) {
            drift[static_cast<std::size_t>(i)] = per_bar;
        }
    };
    (void)range_block;
    (void)rng;

    if (spec.kind == "mean_revert") {
        // Ranging market: the anchor swings sinusoidally around the base
        // price with relative amplitude `amplitude`; one directional leg
        // spans `event_bars` bars.
        double swing = std::log1p(spec.amplitude);
        double period = 2.0 * spec.event_bars;
        double two_pi = 2.0 * 3.14159265358979323846;
        for (int i = 0; i < spec.bars; ++i) {
            double now = swing * std::sin(two_pi * i / period);
            double next = swing * std::sin(two_pi * (i + 1) / period);
            drift[static_cast<std::size_t>(i)] = next - now;
        }
    } else if (spec.kind == "crash") {
        int lead = std::max(1, spec.bars / 3);
        move_block(lead, spec.event_bars, std::log1p(-spec.amplitude));
    } else if (spec.kind == "surge") {
        int lead = std::max(1, spec.bars / 3);
        move_block(lead, spec.event_bars, std::log1p(spec.amplitude));
    } else if (spec.kind == "trend") {
        move_block(0, spec.bars, std::log1p(spec.amplitude));
    } else if (spec.kind == "multi_regime") {
        int seg = spec.bars / 5;
        move_block(seg, spec.event_bars, std::log1p(-spec.amplitude));
        move_block(2 * seg, seg, std::log1p(spec.amplitude * 0.8));
        move_block(4 * seg, spec.event_bars, std::log1p(spec.amplitude * 0.6));
    } else {
        throw ConfigError("unknown synthetic kind '" + spec.kind + "'");
    }
    return drift;
}

} // namespace

void validate_synthetic_spec(const SyntheticSpec& spec) {
    if (spec.bars < 2) throw ConfigError("synthetic series needs >= 2 bars");
    if (spec.interval_s < 1) throw ConfigError("synthetic interval must be >= 1s");
    if (spec.event_bars < 1) throw ConfigError("synthetic event needs >= 1 bar");
    if (!(spec.base_price > Fixed())) {
        throw ConfigError("synthetic base price must be positive");
    }
    if (spec.amplitude <= -1.0 || spec.amplitude >= 10.0) {
        throw ConfigError("synthetic amplitude must lie in (-1, 10)");
    }
    if (spec.noise < 0.0 || spec.noise > 0.2) {
        throw ConfigError("synthetic noise must lie in [0, 0.2]");
    }
    if (!(spec.bar_volume > Fixed())) {
        throw ConfigError("synthetic bar volume must be positive");
    }
    std::mt19937_64 probe(spec.seed);
    regime_drifts(spec, probe); // rejects unknown kinds
}

PairSeries generate_series(const SyntheticSpec& spec) {
    validate_synthetic_spec(spec);

    std::mt19937_64 rng(spec.seed);
    std::vector<double> drift = regime_drifts(spec, rng);

    PairSeries series;
    series.pair_id = spec.pair_id;
    series.interval_s = spec.interval_s;
    series.candles.reserve(static_cast<std::size_t>(spec.bars));

    double base_log = std::log(spec.base_price.to_double());
    double level = base_log;    // current log price
    double anchor = base_log;   // regime anchor the noise reverts toward
    Fixed prev_close = spec.base_price;

    for (int i = 0; i < spec.bars; ++i) {
        anchor += drift[static_cast<std::size_t>(i)];
        double reversion = 0.1 * (anchor - level);
        double shock = spec.noise * unit_noise(rng);
        level += drift[static_cast<std::size_t>(i)] + reversion + shock;

        double close_d = std::exp(level);
        Fixed close = Fixed::from_double(close_d);
        if (!(close > Fixed())) close = Fixed::from_raw(1);
        Fixed open = prev_close;

        double wick = spec.noise * 0.5 *
                      (static_cast<double>(rng() % 1000) / 1000.0);
        Fixed hi_base = std::max(open, close);
        Fixed lo_base = std::min(open, close);
        Fixed high = Fixed::from_double(hi_base.to_double() * (1.0 + wick));
        Fixed low = Fixed::from_double(lo_base.to_double() * (1.0 - wick));
        if (high < hi_base) high = hi_base;
        if (low > lo_base) low = lo_base;
        if (!(low > Fixed())) low = Fixed::from_raw(1);

        double vol_jitter =
            1.0 + 0.5 * (static_cast<double>(rng() % 1000) / 1000.0);
        Fixed volume = Fixed::from_double(spec.bar_volume.to_double() * vol_jitter);

        Candle c;
        c.timestamp = spec.start_ms + static_cast<std::int64_t>(i) *
                                          spec.interval_s * 1000;
        c.open = open;
        c.high = high;
        c.low = low;
        c.close = close;
        c.volume = volume;
        series.candles.push_back(c);
        prev_close = close;
    }

    validate_series(series);
    return series;
}

} // namespace voltgrid
