#include "voltgrid/grid_math.hpp"

#include "voltgrid/errors.hpp"

#include <algorithm>
#include <cmath>

namespace voltgrid {

namespace {

Fixed pow_scaled(Fixed base, Fixed exponent, Fixed scale_by) {
    double factor = std::pow(base.to_double(), exponent.to_double());
    return Fixed::from_double(scale_by.to_double() * factor);
}

} // namespace

std::vector<Fixed> grid_prices(Fixed p_recent, Fixed phi,
                               const std::vector<Fixed>& exponents, Side side,
                               Fixed tick) {
    if (!(p_recent > Fixed())) throw ValidationError("grid anchor price must be positive");
    if (phi.is_negative()) throw ValidationError("volatility must be non-negative");
    Fixed one = Fixed::from_int(1);
    if (side == Side::buy && phi >= one) {
        throw DegenerateVolatilityError(
            "volatility " + phi.str() + " puts buy levels at or below zero");
    }
    Fixed base = side == Side::buy ? one - phi : one + phi;
    std::vector<Fixed> out;
    out.reserve(exponents.size());
    for (Fixed e : exponents) {
        Fixed price = pow_scaled(base, e, p_recent);
        price = side == Side::buy ? price.floor_to(tick) : price.ceil_to(tick);
        if (!(price > Fixed())) {
            throw DegenerateVolatilityError("grid level at exponent " + e.str() +
                                            " rounds to a non-positive price");
        }
        out.push_back(price);
    }
    return out;
}

std::vector<Fixed> order_quantities(Fixed capital,
                                    const std::vector<Fixed>& fractions,
                                    Fixed cm, Fixed cf,
                                    const std::vector<Fixed>& prices, Fixed lot,
                                    Fixed min_notional) {
    if (fractions.size() != prices.size()) {
        throw ValidationError("fraction and price ladders differ in length");
    }
    std::vector<Fixed> out(prices.size());
    if (cf.is_zero()) return out;
    for (std::size_t i = 0; i < prices.size(); ++i) {
        Fixed notional = Fixed::mul(Fixed::mul(Fixed::mul(capital, fractions[i]), cm), cf);
        Fixed qty = Fixed::div_floor(notional, prices[i]).floor_to(lot);
        if (!(qty > Fixed())) continue;
        if (Fixed::mul(prices[i], qty) < min_notional) continue;
        out[i] = qty;
    }
    return out;
}

Fixed entry_scaling(Fixed price, Fixed entry_price, Fixed exponent) {
    if (!(price > Fixed()) || !(entry_price > Fixed())) {
        throw ValidationError("entry scaling needs positive prices");
    }
    double ratio = Fixed::div(price, entry_price).to_double();
    return Fixed::from_double(std::pow(ratio, exponent.to_double()));
}

ProtectiveLevels profit_loss_levels(Fixed entry_price, Fixed phi_now,
                                    const std::vector<Fixed>& exponents,
                                    Side position_side, Fixed tick) {
    if (!(entry_price > Fixed())) throw ValidationError("entry price must be positive");
    if (phi_now.is_negative()) throw ValidationError("volatility must be non-negative");
    Fixed one = Fixed::from_int(1);
    if (phi_now >= one) {
        throw DegenerateVolatilityError("volatility " + phi_now.str() +
                                        " degenerates the exit ladder");
    }
    Fixed up = one + phi_now;
    Fixed down = one - phi_now;
    // A long exits by selling (levels round up); a short exits by buying
    // (levels round down) — always toward the exit order's passive side.
    bool is_long = position_side == Side::buy;
    ProtectiveLevels out;
    for (Fixed h : exponents) {
        Fixed gain = pow_scaled(is_long ? up : down, h, entry_price);
        Fixed loss = pow_scaled(is_long ? down : up, h, entry_price);
        gain = is_long ? gain.ceil_to(tick) : gain.floor_to(tick);
        loss = is_long ? loss.ceil_to(tick) : loss.floor_to(tick);
        if (!(gain > Fixed()) || !(loss > Fixed())) {
            throw DegenerateVolatilityError("exit level at exponent " + h.str() +
                                            " rounds to a non-positive price");
        }
        out.take_profit.push_back(gain);
        out.stop.push_back(loss);
    }
    return out;
}

std::vector<Fixed> partial_close_quantities(Fixed position_qty,
                                            const std::vector<Fixed>& fractions,
                                            std::size_t levels, Fixed lot) {
    if (levels == 0) throw ValidationError("exit ladder needs at least one level");
    if (!fractions.empty() && fractions.size() != levels) {
        throw ValidationError("close fractions must match the exit ladder length");
    }
    std::vector<Fixed> out(levels);
    Fixed remaining = position_qty.floor_to(lot);
    Fixed equal_share = fractions.empty()
                            ? Fixed::div_floor(Fixed::from_int(1),
                                               Fixed::from_int(static_cast<std::int64_t>(levels)))
                            : Fixed();
    for (std::size_t i = 0; i < levels; ++i) {
        Fixed qty;
        if (fractions.empty() && i + 1 == levels) {
            qty = remaining; // last level absorbs the rounding remainder
        } else {
            Fixed f = fractions.empty() ? equal_share : fractions[i];
            qty = Fixed::mul(position_qty, f).floor_to(lot);
            qty = std::min(qty, remaining);
        }
        if (!(qty > Fixed())) continue;
        out[i] = qty;
        remaining -= qty;
    }
    return out;
}

Fixed cap_rank_coefficient(int rank, const CapRankWeights& weights) {
    if (weights.quartile_weights.empty()) {
        throw ValidationError("cap-rank weights are empty");
    }
    int universe = std::max(1, weights.universe_size);
    int clamped_rank = std::clamp(rank, 1, universe);
    std::size_t quartile = static_cast<std::size_t>(
        std::min<long long>(3, static_cast<long long>(clamped_rank - 1) * 4 / universe));
    quartile = std::min(quartile, weights.quartile_weights.size() - 1);
    Fixed w = weights.quartile_weights[quartile];
    return std::clamp(w, weights.floor, weights.cap);
}

Fixed funding_coefficient(Fixed funding_rate, const FundingDecay& decay) {
    Fixed a = funding_rate.abs();
    if (a <= decay.low_threshold) return Fixed::from_int(1);
    if (a >= decay.high_threshold) return Fixed();
    return Fixed::div(decay.high_threshold - a,
                      decay.high_threshold - decay.low_threshold);
}

bool sweep_eligible(const PositionView& position, Fixed mark, Fixed capital,
                    Fixed divisor) {
    if (!(position.qty > Fixed())) return false;
    Fixed notional = Fixed::mul(position.entry_price, position.qty);
    if (!(notional < Fixed::div(capital, divisor))) return false;
    return position.side == Side::buy ? mark > position.entry_price
                                      : mark < position.entry_price;
}

Fixed deviation_ratio(Fixed latest, Fixed mark) {
    if (!(mark > Fixed())) throw ValidationError("mark price must be positive");
    return Fixed::div((latest - mark).abs(), mark);
}

bool deviation_blocked(Fixed latest, Fixed mark, Fixed tolerance) {
    return deviation_ratio(latest, mark) > tolerance;
}

Fixed batch_entry_notional(const ActionBatch& batch, const std::string& pair) {
    Fixed sum;
    for (const Action& a : batch.actions) {
        if (a.kind == ActionKind::place_limit && !a.reduce_only && a.pair == pair) {
            sum += Fixed::mul(a.price, a.qty);
        }
    }
    return sum;
}

} // namespace voltgrid
