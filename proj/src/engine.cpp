#include "voltgrid/engine.hpp"

#include "voltgrid/grid_math.hpp"
#include "voltgrid/indicators.hpp"

#include <algorithm>
#include <optional>
#include <set>

namespace voltgrid {

namespace {

char kind_code(OrderKind k) {
    switch (k) {
    case OrderKind::limit: return 'l';
    case OrderKind::take_profit: return 't';
    case OrderKind::stop: return 's';
    case OrderKind::market: return 'm';
    }
    return '?';
}

Side exit_side(Side position_side) {
    return position_side == Side::buy ? Side::sell : Side::buy;
}

void place_grid(const PlacementContext& c, Side side,
                const std::vector<Fixed>& fractions, ActionBatch& batch,
                std::vector<EngineEvent>& events) {
    std::vector<Fixed> prices = grid_prices(c.quote.latest, c.phi,
                                            c.params.entry_exponents, side,
                                            c.quote.tick);
    std::vector<Fixed> qtys =
        order_quantities(c.params.capital_per_pair, fractions, c.cm, c.cf,
                         prices, c.quote.lot, c.quote.min_notional);
    Fixed one = Fixed::from_int(1);
    Fixed scale = one;
    if (c.position && c.position->qty > Fixed()) {
        scale = entry_scaling(c.quote.latest, c.position->entry_price,
                              c.params.entry_scaling_exponent);
    }
    for (std::size_t i = 0; i < prices.size(); ++i) {
        Fixed qty = qtys[i];
        if (scale != one && qty > Fixed()) {
            qty = Fixed::mul(qty, scale).floor_to(c.quote.lot);
        }
        int level = static_cast<int>(i);
        if (!(qty > Fixed())) {
            events.push_back({"level_skipped", c.pair, c.clock_ms,
                              Fixed::from_int(level),
                              std::string("entry level too small on the ") +
                                  to_string(side) + " side"});
            continue;
        }
        Action a;
        a.kind = ActionKind::place_limit;
        a.pair = c.pair;
        a.side = side;
        a.price = prices[i];
        a.qty = qty;
        a.level = level;
        a.reason_code = "grid_entry";
        a.client_key =
            make_client_key(c.cycle_id, c.pair, OrderKind::limit, side, level);
        batch.actions.push_back(std::move(a));
    }
}

void grid_long(const PlacementContext& c, ActionBatch& b,
               std::vector<EngineEvent>& ev) {
    place_grid(c, Side::buy, c.params.entry_fractions, b, ev);
}

void grid_short(const PlacementContext& c, ActionBatch& b,
                std::vector<EngineEvent>& ev) {
    place_grid(c, Side::sell, c.params.entry_fractions, b, ev);
}

void grid_neutral(const PlacementContext& c, ActionBatch& b,
                  std::vector<EngineEvent>& ev) {
    std::vector<Fixed> half;
    half.reserve(c.params.entry_fractions.size());
    Fixed two = Fixed::from_int(2);
    for (Fixed f : c.params.entry_fractions) half.push_back(Fixed::div(f, two));
    place_grid(c, Side::buy, half, b, ev);
    place_grid(c, Side::sell, half, b, ev);
}

/// Momentum-gated single entry: joins an up-move with one buy level, stands
/// aside otherwise. The minimal non-grid template used when strategy-level
/// substitution is escalated to.
void trend_follow(const PlacementContext& c, ActionBatch& b,
                  std::vector<EngineEvent>& ev) {
    std::int64_t aligned = c.history.align_down(c.clock_ms);
    std::ptrdiff_t last = c.history.index_at(aligned);
    std::int64_t steps = c.params.tau_s * 1000 / c.history.interval_ms();
    if (last < 0 || steps > last) return; // qualification guarantees coverage
    const Candle& oldest = c.history.candles[static_cast<std::size_t>(last - steps)];
    const Candle& newest = c.history.candles[static_cast<std::size_t>(last)];
    if (!(newest.close > oldest.open)) return;
    std::vector<Fixed> exps = {c.params.entry_exponents.front()};
    std::vector<Fixed> fracs = {c.params.entry_fractions.front()};
    std::vector<Fixed> prices =
        grid_prices(c.quote.latest, c.phi, exps, Side::buy, c.quote.tick);
    std::vector<Fixed> qtys =
        order_quantities(c.params.capital_per_pair, fracs, c.cm, c.cf, prices,
                         c.quote.lot, c.quote.min_notional);
    if (!(qtys[0] > Fixed())) {
        ev.push_back({"level_skipped", c.pair, c.clock_ms, Fixed(),
                      "trend entry too small"});
        return;
    }
    Action a;
    a.kind = ActionKind::place_limit;
    a.pair = c.pair;
    a.side = Side::buy;
    a.price = prices[0];
    a.qty = qtys[0];
    a.level = 0;
    a.reason_code = "trend_entry";
    a.client_key =
        make_client_key(c.cycle_id, c.pair, OrderKind::limit, Side::buy, 0, "tr");
    b.actions.push_back(std::move(a));
}

struct DesiredExit {
    OrderKind kind;
    Side side;
    Fixed price;
    Fixed qty;
    int level;
};

bool matches_existing(const std::vector<DesiredExit>& desired,
                      const std::vector<const OrderView*>& existing) {
    if (desired.size() != existing.size()) return false;
    auto key = [](OrderKind k, Side s, Fixed p, Fixed q) {
        return std::make_tuple(static_cast<int>(k), static_cast<int>(s), p.raw(),
                               q.raw());
    };
    std::vector<std::tuple<int, int, std::int64_t, std::int64_t>> a, b;
    for (const auto& d : desired) a.push_back(key(d.kind, d.side, d.price, d.qty));
    for (const auto* o : existing) b.push_back(key(o->kind, o->side, o->price, o->qty));
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    return a == b;
}

} // namespace

std::string make_client_key(std::int64_t cycle_id, const std::string& pair,
                            OrderKind kind, Side side, int level,
                            const char* tag) {
    std::string key = "c" + std::to_string(cycle_id) + "|" + pair + "|";
    key += kind_code(kind);
    key += side == Side::buy ? "|b|" : "|s|";
    key += std::to_string(level);
    if (tag[0] != '\0') {
        key += "|";
        key += tag;
    }
    return key;
}

BotState rebuild_state(const AccountView& view) {
    BotState s;
    s.positions = view.positions;
    s.open_orders = view.open_orders;
    return s;
}

std::vector<std::string> qualify_pairs(const MarketSnapshot& snapshot,
                                       const BotParams& params) {
    QualifyThresholds th;
    th.v_req = params.v_req;
    th.phi_req = params.phi_req;
    th.tau_s = params.tau_s;
    th.volatility_indicator = params.volatility_indicator;
    return qualify_pairs(snapshot, th);
}

const std::map<std::string, PlacementFn>& strategy_registry() {
    static const std::map<std::string, PlacementFn> registry = {
        {"grid_long", &grid_long},
        {"grid_short", &grid_short},
        {"grid_neutral", &grid_neutral},
        {"trend_follow", &trend_follow},
    };
    return registry;
}

PlacementFn strategy_registry_lookup(const std::string& name) {
    const auto& registry = strategy_registry();
    auto it = registry.find(name);
    if (it != registry.end()) return it->second;
    std::string known;
    for (const auto& [k, _] : registry) {
        if (!known.empty()) known += ", ";
        known += k;
    }
    throw LookupError("unknown strategy template '" + name + "'; registered: " + known);
}

StepResult step(const BotState& state, const MarketSnapshot& snapshot,
                const BotParams& params, std::int64_t clock_ms) {
    if (snapshot.as_of != clock_ms) {
        throw StaleSnapshotError("snapshot as_of " + std::to_string(snapshot.as_of) +
                                 " does not match clock " + std::to_string(clock_ms));
    }
    validate_params(params);
    PlacementFn place = strategy_registry_lookup(params.strategy_template);

    StepResult r;
    r.state = state;
    r.batch.cycle_id = params.schedule.cycle_index(clock_ms);
    const bool exec = params.schedule.opens_interval(clock_ms);

    auto has_position = [&](const std::string& pair) {
        auto it = state.positions.find(pair);
        return it != state.positions.end() && it->second.qty > Fixed();
    };

    auto cancel = [&](const OrderView& o, const char* reason) {
        Action a;
        a.kind = ActionKind::cancel;
        a.pair = o.pair;
        a.side = o.side;
        a.level = o.level;
        a.reason_code = reason;
        a.cancel_target = o.client_key;
        a.client_key = "x|" + o.client_key;
        r.batch.actions.push_back(std::move(a));
    };

    // Book hygiene: exit orders whose position is gone are always cancelled;
    // unfilled entries from earlier cycles are cleared at execution times
    // before the ladder is re-laid.
    for (const OrderView& o : state.open_orders) {
        if (o.reduce_only && !has_position(o.pair)) {
            cancel(o, "orphan_exit");
        } else if (exec && !o.reduce_only && o.kind == OrderKind::limit &&
                   o.placed_at < clock_ms) {
            cancel(o, "stale_entry");
        }
    }

    if (exec) {
        r.state.qualified = qualify_pairs(snapshot, params);
        for (const std::string& pair : r.state.qualified) {
            const PairQuote& quote = snapshot.quote(pair);
            auto phi = try_volatility(snapshot.history(pair), clock_ms,
                                      params.tau_s, params.volatility_indicator);
            if (!phi) continue; // qualification already required coverage
            r.state.last_phi[pair] = *phi;
            if (deviation_blocked(quote.latest, quote.mark,
                                  params.deviation_tolerance)) {
                r.events.push_back({"deviation_block", pair, clock_ms,
                                    deviation_ratio(quote.latest, quote.mark),
                                    "entries withheld: latest vs mark divergence"});
                continue;
            }
            Fixed cm = cap_rank_coefficient(quote.cap_rank, params.cap_weights);
            Fixed cf = funding_coefficient(quote.funding_rate, params.funding_decay);
            if (cf.is_zero()) {
                r.events.push_back({"funding_deactivation", pair, clock_ms,
                                    quote.funding_rate.abs(),
                                    "funding rate beyond the deactivation threshold"});
                continue;
            }
            auto pos_it = state.positions.find(pair);
            const PositionView* pos =
                pos_it != state.positions.end() && pos_it->second.qty > Fixed()
                    ? &pos_it->second
                    : nullptr;
            PlacementContext ctx{pair,      quote,
                                 snapshot.history(pair),
                                 *phi,      cm,
                                 cf,        params,
                                 pos,       r.batch.cycle_id,
                                 clock_ms};
            place(ctx, r.batch, r.events);
        }
    }

    // Monitoring: sweep small profitable positions, otherwise keep the exit
    // ladder aligned with current volatility.
    for (const auto& [pair, pos] : state.positions) {
        if (!(pos.qty > Fixed())) continue;
        std::vector<const OrderView*> exits;
        for (const OrderView& o : state.open_orders) {
            if (o.pair == pair && o.reduce_only) exits.push_back(&o);
        }
        const PairQuote* quote =
            snapshot.quotes.count(pair) ? &snapshot.quote(pair) : nullptr;

        if (quote && sweep_eligible(pos, quote->mark, params.capital_per_pair,
                                    params.sweep_divisor)) {
            for (const OrderView* o : exits) cancel(*o, "sweep");
            Action a;
            a.kind = ActionKind::place_market;
            a.pair = pair;
            a.side = exit_side(pos.side);
            a.qty = pos.qty;
            a.reduce_only = true;
            a.reason_code = "sweep";
            a.client_key = make_client_key(r.batch.cycle_id, pair,
                                           OrderKind::market, a.side, 0, "sw");
            r.batch.actions.push_back(std::move(a));
            continue;
        }

        std::optional<Fixed> phi_now;
        if (quote && snapshot.has_history(pair)) {
            phi_now = try_volatility(snapshot.history(pair), clock_ms,
                                     params.tau_s, params.volatility_indicator);
        }
        if (!phi_now) {
            // Leave whatever ladder is resting on the book untouched: it is
            // the previous cycle's levels, held on the exchange, not locally.
            r.events.push_back({"stale_indicator", pair, clock_ms, Fixed(),
                                "volatility unavailable; exit ladder kept"});
            continue;
        }
        r.state.last_phi[pair] = *phi_now;
        ProtectiveLevels levels =
            profit_loss_levels(pos.entry_price, *phi_now, params.exit_exponents,
                               pos.side, quote->tick);
        std::vector<Fixed> qtys = partial_close_quantities(
            pos.qty, params.partial_close_fractions, params.exit_levels(),
            quote->lot);
        std::vector<DesiredExit> desired;
        Side x_side = exit_side(pos.side);
        for (std::size_t i = 0; i < qtys.size(); ++i) {
            if (!(qtys[i] > Fixed())) continue;
            int level = static_cast<int>(i);
            desired.push_back({OrderKind::take_profit, x_side,
                               levels.take_profit[i], qtys[i], level});
            desired.push_back(
                {OrderKind::stop, x_side, levels.stop[i], qtys[i], level});
        }
        if (matches_existing(desired, exits)) continue;
        for (const OrderView* o : exits) cancel(*o, "exit_refresh");
        for (const DesiredExit& d : desired) {
            Action a;
            a.kind = d.kind == OrderKind::take_profit ? ActionKind::place_take_profit
                                                      : ActionKind::place_stop;
            a.pair = pair;
            a.side = d.side;
            a.price = d.price;
            a.qty = d.qty;
            a.level = d.level;
            a.reduce_only = true;
            a.reason_code = "exit_refresh";
            a.client_key =
                make_client_key(r.batch.cycle_id, pair, d.kind, d.side, d.level);
            r.batch.actions.push_back(std::move(a));
        }
    }

    // Reconciliation: an instruction whose idempotency key already rests on
    // the book was delivered in a previous life of this very cycle (crash
    // between submit and the next bar). The venue would ignore the
    // resubmission; the decision log should not carry it either.
    std::set<std::string> resting;
    for (const OrderView& o : state.open_orders) resting.insert(o.client_key);
    std::erase_if(r.batch.actions, [&](const Action& a) {
        return a.kind != ActionKind::cancel && resting.count(a.client_key) > 0;
    });

    sort_batch(r.batch);
    return r;
}

} // namespace voltgrid
