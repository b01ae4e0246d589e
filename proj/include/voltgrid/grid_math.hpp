#pragma once

#include "voltgrid/orders.hpp"
#include "voltgrid/params.hpp"

#include <vector>

namespace voltgrid {

/// Entry ladder prices: level i sits at p_recent * (1 - phi)^exponents[i] for
/// buys (below market) and p_recent * (1 + phi)^exponents[i] for sells (above
/// market), rounded to the tick toward the passive side (buys down, sells up).
/// Throws DegenerateVolatilityError when phi >= 1 would put a buy level at or
/// below zero.
std::vector<Fixed> grid_prices(Fixed p_recent, Fixed phi,
                               const std::vector<Fixed>& exponents, Side side,
                               Fixed tick);

/// Per-level base-asset quantities: (capital * fractions[i] * cm * cf) /
/// prices[i], rounded down to the lot so the placed notional never exceeds
/// the intended allocation. A zero entry means the level is skipped (too
/// small for the lot or the min-notional filter); cf = 0 zeroes every level.
std::vector<Fixed> order_quantities(Fixed capital,
                                    const std::vector<Fixed>& fractions,
                                    Fixed cm, Fixed cf,
                                    const std::vector<Fixed>& prices, Fixed lot,
                                    Fixed min_notional);

/// Allocation adjustment applied to new same-pair entries while a position is
/// open: (price / entry_price)^exponent.
Fixed entry_scaling(Fixed price, Fixed entry_price, Fixed exponent);

struct ProtectiveLevels {
    std::vector<Fixed> take_profit;
    std::vector<Fixed> stop;
};

/// Exit ladder around an entry: for a long, take-profits at
/// entry * (1 + phi)^exponents[i] and stops at entry * (1 - phi)^exponents[i],
/// mirrored for shorts. Prices round toward the exit order's passive side.
ProtectiveLevels profit_loss_levels(Fixed entry_price, Fixed phi_now,
                                    const std::vector<Fixed>& exponents,
                                    Side position_side, Fixed tick);

/// Splits a position across the exit ladder. Empty fractions mean an equal
/// split with the last level absorbing the lot-rounding remainder; explicit
/// fractions are honored as given. The returned quantities never sum to more
/// than the position.
std::vector<Fixed> partial_close_quantities(Fixed position_qty,
                                            const std::vector<Fixed>& fractions,
                                            std::size_t levels, Fixed lot);

/// Sizing coefficient from market-cap rank: piecewise-constant per quartile
/// of the configured universe, clamped to [floor, cap].
Fixed cap_rank_coefficient(int rank, const CapRankWeights& weights);

/// Sizing coefficient from the funding rate: 1 below the low threshold,
/// linear decay to 0 at the high threshold (deactivation).
Fixed funding_coefficient(Fixed funding_rate, const FundingDecay& decay);

/// True when the position is small enough (entry notional < capital/divisor,
/// strict) and currently profitable at the mark, so it should be market-swept.
bool sweep_eligible(const PositionView& position, Fixed mark, Fixed capital,
                    Fixed divisor);

/// |latest - mark| / mark, the pre-trade price sanity measure.
Fixed deviation_ratio(Fixed latest, Fixed mark);
/// True when the deviation exceeds the tolerance (strict), which blocks new
/// entries for the pair this cycle.
bool deviation_blocked(Fixed latest, Fixed mark, Fixed tolerance);

/// Sum of price*qty over a pair's entry placements in a batch (test hook for
/// the exposure-cap property).
Fixed batch_entry_notional(const ActionBatch& batch, const std::string& pair);

} // namespace voltgrid
