#pragma once

#include "voltgrid/candle.hpp"

#include <cstdint>
#include <string>

namespace voltgrid {

/// Recipe for a seeded synthetic candle series exercising one market mode:
///   mean_revert — noisy oscillation around the base price
///   crash       — calm lead-in, then a sharp drop of `amplitude` within
///                 `event_bars`, then a depressed range
///   surge       — the upward mirror of crash
///   trend       — sustained drift gaining `amplitude` over the whole run
///   multi_regime — range, crash, recovery trend, range, surge, stitched in
///                 that order
/// Identical specs generate identical series, bar for bar.
struct SyntheticSpec {
    std::string kind = "mean_revert";
    std::string pair_id = "SYN/USD";
    std::int64_t start_ms = 0;
    std::int64_t interval_s = 60;
    int bars = 600;
    int event_bars = 30;            ///< length of the crash/surge move
    Fixed base_price = Fixed::from_int(100);
    double amplitude = 0.5;         ///< relative size of the regime move
    double noise = 0.002;           ///< per-bar relative noise
    Fixed bar_volume = Fixed::from_int(50'000);
    std::uint64_t seed = 1;
};
void validate_synthetic_spec(const SyntheticSpec& spec);

/// Generates the series; the result always passes series validation.
PairSeries generate_series(const SyntheticSpec& spec);

} // namespace voltgrid
