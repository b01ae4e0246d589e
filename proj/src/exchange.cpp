#include "voltgrid/exchange.hpp"

#include <algorithm>

namespace voltgrid {

namespace {

const Fixed kOne = Fixed::from_int(1);
const Fixed kBpsDenominator = Fixed::from_int(10'000);

Fixed bps_rate(int bps) { return Fixed::div(Fixed::from_int(bps), kBpsDenominator); }

} // namespace

void validate_sim_config(const SimConfig& cfg) {
    if (cfg.fees.maker_bps < 0) {
        throw ValidationError("maker fee must be non-negative");
    }
    if (cfg.fees.taker_bps < cfg.fees.maker_bps) {
        throw ValidationError("taker fee must be at least the maker fee");
    }
    if (cfg.slippage.bps < 0) {
        throw ValidationError("slippage must be non-negative");
    }
    if (cfg.slippage.impact_k < Fixed()) {
        throw ValidationError("impact coefficient must be non-negative");
    }
    if (cfg.funding.interval_hours < 1) {
        throw ValidationError("funding interval must be at least one hour");
    }
    const FaultProfile& f = cfg.faults;
    if (f.rate_limit_max < 0) {
        throw ValidationError("rate limit must be non-negative");
    }
    if (f.rate_limit_max > 0 && f.rate_limit_window_ms <= 0) {
        throw ValidationError("rate limit window must be positive");
    }
    if (f.timeout_probability < 0.0 || f.timeout_probability > 1.0) {
        throw ValidationError("timeout probability must lie in [0, 1]");
    }
    for (const auto& [from, to] : f.disconnect_intervals) {
        if (from > to) {
            throw ValidationError("disconnect interval ends before it starts");
        }
    }
    for (const auto& [pair, filt] : cfg.filters) {
        if (filt.tick <= Fixed() || filt.lot <= Fixed()) {
            throw ValidationError("tick and lot must be positive for " + pair);
        }
        if (filt.min_notional < Fixed()) {
            throw ValidationError("min notional must be non-negative for " + pair);
        }
    }
    if (cfg.initial_cash < Fixed()) {
        throw ValidationError("initial cash must be non-negative");
    }
}

ExchangeSim::ExchangeSim(SimConfig cfg) : cfg_(std::move(cfg)) {
    validate_sim_config(cfg_);
    maker_rate_ = bps_rate(cfg_.fees.maker_bps);
    taker_rate_ = bps_rate(cfg_.fees.taker_bps);
    slip_rate_ = bps_rate(cfg_.slippage.bps);
    cash_ = cfg_.initial_cash;
    rng_.seed(cfg_.faults.seed);
}

const PairFilters& ExchangeSim::filters_for(const std::string& pair) const {
    auto it = cfg_.filters.find(pair);
    if (it == cfg_.filters.end()) {
        throw LookupError("unknown pair '" + pair + "'");
    }
    return it->second;
}

void ExchangeSim::guard(std::int64_t now, bool rate_limited) const {
    for (const auto& [from, to] : cfg_.faults.disconnect_intervals) {
        if (now >= from && now < to) {
            throw FaultError(FaultKind::disconnect,
                             "disconnected until " + std::to_string(to));
        }
    }
    if (!rate_limited) return;
    if (cfg_.faults.rate_limit_max > 0) {
        const std::int64_t horizon = now - cfg_.faults.rate_limit_window_ms;
        while (!rate_window_.empty() && rate_window_.front() <= horizon) {
            rate_window_.pop_front();
        }
        if (static_cast<int>(rate_window_.size()) >= cfg_.faults.rate_limit_max) {
            throw FaultError(FaultKind::rate_limit, "rate limit exceeded");
        }
        rate_window_.push_back(now);
    }
    if (cfg_.faults.timeout_probability > 0.0) {
        std::bernoulli_distribution coin(cfg_.faults.timeout_probability);
        if (coin(rng_)) {
            throw FaultError(FaultKind::timeout, "request timed out");
        }
    }
}

Fixed ExchangeSim::taker_price(Side side, Fixed reference, Fixed qty,
                               Fixed volume) const {
    Fixed rate = slip_rate_;
    if (cfg_.slippage.impact_k != Fixed() && volume > Fixed()) {
        rate += Fixed::mul(cfg_.slippage.impact_k, Fixed::div(qty, volume));
    }
    Fixed mult = side == Side::buy ? kOne + rate : kOne - rate;
    return Fixed::mul(reference, mult);
}

Fixed ExchangeSim::cap_reduce_only(const SimOrder& o) const {
    auto it = positions_.find(o.view.pair);
    if (it == positions_.end() || it->second.side == o.view.side) return Fixed();
    return it->second.qty;
}

void ExchangeSim::record_fill(const std::string& pair, Side side, Fixed price,
                              Fixed qty, Fixed fee, bool maker, Fixed realized,
                              bool opened, const std::string& order_id,
                              std::int64_t ts, std::vector<FillRecord>* out) {
    FillRecord f;
    f.fill_id = std::to_string(next_fill_id_++);
    f.order_id = order_id;
    f.pair = pair;
    f.side = side;
    f.price = price;
    f.qty = qty;
    f.fee = fee;
    f.maker = maker;
    f.timestamp = ts;
    f.realized = realized;
    f.opened = opened;
    fills_.push_back(f);
    if (out) out->push_back(f);
}

void ExchangeSim::ledger_fill(const std::string& pair, Side side, Fixed price,
                              Fixed qty, bool maker, const std::string& order_id,
                              std::int64_t ts, std::vector<FillRecord>* out) {
    const Fixed rate = maker ? maker_rate_ : taker_rate_;

    // Portion that reduces an existing opposite-side position.
    Fixed close_qty;
    auto it = positions_.find(pair);
    if (it != positions_.end() && it->second.side != side) {
        close_qty = std::min(qty, it->second.qty);
    }
    if (close_qty > Fixed()) {
        PositionView& p = it->second;
        Fixed swept = Fixed::mul(price, close_qty);
        Fixed fee = Fixed::mul(swept, rate);
        // Releasing a proportional slice keeps the remaining basis exact:
        // whatever rounding the slice takes, the remainder absorbs it.
        Fixed released = close_qty == p.qty
                             ? p.cost
                             : Fixed::mul(p.cost, Fixed::div(close_qty, p.qty));
        Fixed realized = p.side == Side::buy ? swept - released : released - swept;
        cash_ = side == Side::sell ? cash_ + swept - fee : cash_ - swept - fee;
        fees_cum_ += fee;
        realized_cum_ += realized;
        p.cost -= released;
        p.qty -= close_qty;
        if (p.qty == Fixed()) {
            positions_.erase(it);
        } else {
            p.entry_price = Fixed::div(p.cost, p.qty);
        }
        record_fill(pair, side, price, close_qty, fee, maker, realized, false,
                    order_id, ts, out);
    }

    Fixed open_qty = qty - close_qty;
    if (open_qty > Fixed()) {
        Fixed notional = Fixed::mul(price, open_qty);
        Fixed fee = Fixed::mul(notional, rate);
        cash_ = side == Side::buy ? cash_ - notional - fee : cash_ + notional - fee;
        fees_cum_ += fee;
        PositionView& p = positions_[pair];
        if (p.qty == Fixed()) p.side = side;
        p.cost += notional;
        p.qty += open_qty;
        p.entry_price = Fixed::div(p.cost, p.qty);
        record_fill(pair, side, price, open_qty, fee, maker, Fixed(), true,
                    order_id, ts, out);
    }
}

void ExchangeSim::apply_fill(SimOrder& o, Fixed price, Fixed qty, bool maker,
                             std::int64_t ts, std::vector<FillRecord>* out) {
    o.open = false;
    if (qty == Fixed()) return; // reduce-only with nothing left to reduce
    ledger_fill(o.view.pair, o.view.side, price, qty, maker, o.view.order_id, ts,
                out);
}

SubmitAck ExchangeSim::submit(const Action& action, std::int64_t now) {
    guard(now, true);
    if (action.kind == ActionKind::cancel) {
        throw ValidationError("cancellations go through cancel(), not submit()");
    }
    const PairFilters& filt = filters_for(action.pair);

    if (!action.client_key.empty()) {
        auto seen = acked_keys_.find(action.client_key);
        if (seen != acked_keys_.end()) {
            SubmitAck ack = seen->second;
            ack.duplicate = true;
            return ack;
        }
    }

    SubmitAck ack;
    auto reject = [&](const std::string& why) {
        ack.accepted = false;
        ack.reject_reason = why;
        return ack;
    };

    if (action.qty <= Fixed() || !action.qty.is_multiple_of(filt.lot)) {
        return reject("quantity violates the lot filter");
    }
    const bool market = action.kind == ActionKind::place_market;
    if (market) {
        auto lp = last_price_.find(action.pair);
        if (lp == last_price_.end()) {
            throw ValidationError("no traded price yet for " + action.pair);
        }
        if (Fixed::mul(lp->second, action.qty) < filt.min_notional) {
            return reject("notional below the exchange minimum");
        }
    } else {
        if (action.price <= Fixed() || !action.price.is_multiple_of(filt.tick)) {
            return reject("price violates the tick filter");
        }
        if (Fixed::mul(action.price, action.qty) < filt.min_notional) {
            return reject("notional below the exchange minimum");
        }
    }

    SimOrder o;
    o.view.order_id = std::to_string(next_order_id_++);
    o.view.client_key = action.client_key;
    o.view.pair = action.pair;
    switch (action.kind) {
    case ActionKind::place_limit: o.view.kind = OrderKind::limit; break;
    case ActionKind::place_take_profit: o.view.kind = OrderKind::take_profit; break;
    case ActionKind::place_stop: o.view.kind = OrderKind::stop; break;
    default: o.view.kind = OrderKind::market; break;
    }
    o.view.side = action.side;
    o.view.price = action.price;
    o.view.qty = action.qty;
    o.view.reduce_only = action.reduce_only;
    o.view.placed_at = now;
    o.view.level = action.level;

    ack.order_id = o.view.order_id;
    ack.accepted = true;

    orders_.push_back(o);
    std::size_t idx = orders_.size() - 1;
    by_order_id_[o.view.order_id] = idx;
    if (!o.view.client_key.empty()) {
        by_client_key_[o.view.client_key] = idx;
        acked_keys_[o.view.client_key] = ack;
    }

    if (market) {
        SimOrder& placed = orders_[idx];
        Fixed qty = placed.view.qty;
        if (placed.view.reduce_only) qty = std::min(qty, cap_reduce_only(placed));
        Fixed volume;
        auto lv = last_volume_.find(action.pair);
        if (lv != last_volume_.end()) volume = lv->second;
        Fixed px = taker_price(placed.view.side, last_price_.at(action.pair),
                               qty, volume);
        apply_fill(placed, px, qty, false, now, nullptr);
    }
    return ack;
}

bool ExchangeSim::cancel(const std::string& key, std::int64_t now) {
    guard(now, true);
    std::size_t idx = 0;
    if (auto ck = by_client_key_.find(key); ck != by_client_key_.end()) {
        idx = ck->second;
    } else if (auto oid = by_order_id_.find(key); oid != by_order_id_.end()) {
        idx = oid->second;
    } else {
        return false;
    }
    SimOrder& o = orders_[idx];
    if (!o.open) return false;
    o.open = false;
    return true;
}

AccountView ExchangeSim::snapshot_account(std::int64_t now) const {
    guard(now, false); // only connectivity can interrupt a read
    AccountView view;
    view.cash = cash_;
    view.positions = positions_;
    for (const SimOrder& o : orders_) {
        if (o.open) view.open_orders.push_back(o.view);
    }
    return view;
}

std::vector<FillRecord> ExchangeSim::match_candle(const std::string& pair,
                                                  const Candle& c) {
    filters_for(pair); // unknown pair check
    validate_candle(c);
    auto clk = pair_clock_.find(pair);
    if (clk != pair_clock_.end() && c.timestamp <= clk->second) {
        throw ValidationError("candle does not advance the clock for " + pair);
    }

    std::vector<FillRecord> out;
    auto pass = [&](OrderKind kind) {
        for (SimOrder& so : orders_) {
            if (!so.open || so.view.pair != pair || so.view.kind != kind) continue;
            const Fixed p = so.view.price;
            const bool buy = so.view.side == Side::buy;
            Fixed px;
            bool hit = false;
            switch (kind) {
            case OrderKind::limit:
                // A resting limit fills when the bar trades through it; a
                // marketable limit cannot fill outside the bar's range.
                if (buy ? c.low <= p : c.high >= p) {
                    hit = true;
                    px = buy ? std::min(p, c.high) : std::max(p, c.low);
                }
                break;
            case OrderKind::stop:
                if (buy ? c.high >= p : c.low <= p) {
                    hit = true;
                    px = std::clamp(taker_price(so.view.side, p, so.view.qty,
                                                c.volume),
                                    c.low, c.high);
                }
                break;
            case OrderKind::take_profit:
                if (buy ? c.low <= p : c.high >= p) {
                    hit = true;
                    px = std::clamp(taker_price(so.view.side, p, so.view.qty,
                                                c.volume),
                                    c.low, c.high);
                }
                break;
            default:
                break;
            }
            if (!hit) continue;
            Fixed qty = so.view.qty;
            if (so.view.reduce_only) qty = std::min(qty, cap_reduce_only(so));
            apply_fill(so, px, qty, kind == OrderKind::limit, c.timestamp, &out);
        }
    };
    // Pessimistic intrabar ordering: protective stops consume the position
    // before profit-taking orders see it.
    pass(OrderKind::stop);
    pass(OrderKind::limit);
    pass(OrderKind::take_profit);

    last_price_[pair] = c.close;
    last_volume_[pair] = c.volume;
    pair_clock_[pair] = c.timestamp;
    return out;
}

Fixed ExchangeSim::apply_funding(std::int64_t t,
                                 const std::map<std::string, Fixed>& rates) {
    const std::int64_t interval_ms =
        static_cast<std::int64_t>(cfg_.funding.interval_hours) * 3'600'000;
    if (t % interval_ms != 0) {
        throw ValidationError("funding time is not on a boundary");
    }
    Fixed delta;
    for (auto& [pair, pos] : positions_) {
        auto r = rates.find(pair);
        if (r == rates.end() || r->second == Fixed()) continue;
        Fixed notional = Fixed::mul(last_price_.at(pair), pos.qty);
        Fixed paid = Fixed::mul(r->second, notional);
        if (pos.side == Side::buy) {
            cash_ -= paid;
            funding_cum_ += paid;
            delta -= paid;
        } else {
            cash_ += paid;
            funding_cum_ -= paid;
            delta += paid;
        }
    }
    return delta;
}

Fixed ExchangeSim::equity() const {
    Fixed total = cash_;
    for (const auto& [pair, p] : positions_) {
        Fixed notional = Fixed::mul(last_price_.at(pair), p.qty);
        total = p.side == Side::buy ? total + notional : total - notional;
    }
    return total;
}

void ExchangeSim::sample_equity(std::int64_t t) {
    if (!equity_curve_.empty() && t <= equity_curve_.back().first) {
        throw ValidationError("equity samples must advance in time");
    }
    equity_curve_.emplace_back(t, equity());
}

Fixed ExchangeSim::last_price(const std::string& pair) const {
    auto it = last_price_.find(pair);
    if (it == last_price_.end()) {
        throw LookupError("no traded price yet for " + pair);
    }
    return it->second;
}

void ExchangeSim::conservation_check() const {
    Fixed lhs = cash_ + fees_cum_ + funding_cum_ - cfg_.initial_cash;
    Fixed rhs = realized_cum_;
    for (const auto& [pair, p] : positions_) {
        Fixed notional = Fixed::mul(last_price_.at(pair), p.qty);
        if (p.side == Side::buy) {
            lhs += notional;
            rhs += notional - p.cost;
        } else {
            lhs -= notional;
            rhs += p.cost - notional;
        }
    }
    if (lhs != rhs) {
        throw IntegrityError("accounting identity violated: " + lhs.str() +
                             " != " + rhs.str());
    }
}

} // namespace voltgrid
