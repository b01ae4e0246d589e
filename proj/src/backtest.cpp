#include "voltgrid/backtest.hpp"

#include "voltgrid/engine.hpp"
#include "voltgrid/errors.hpp"

#include <chrono>
#include <cmath>
#include <string>
#include <utility>

namespace voltgrid {

namespace {

/// The highest exponent of whichever ladder sells into a rising market:
/// short-side templates lay sell entries above the anchor, long-side
/// templates top out at their highest take-profit level.
Fixed sell_ladder_top(const BotParams& params) {
    if (params.strategy_template == "grid_short" ||
        params.strategy_template == "grid_neutral") {
        return params.entry_exponents.back();
    }
    return params.exit_exponents.back();
}

/// Cash plus signed mark-to-market value of every open position, valued the
/// same way the venue values them: longs add notional, shorts owe it.
Fixed account_equity(const AccountView& account, const MarketSnapshot& snap) {
    Fixed eq = account.cash;
    for (const auto& [pair, pos] : account.positions) {
        Fixed mark =
            snap.quotes.count(pair) ? snap.quotes.at(pair).mark : pos.entry_price;
        Fixed notional = Fixed::mul(pos.qty, mark);
        eq = pos.side == Side::buy ? eq + notional : eq - notional;
    }
    return eq;
}

} // namespace

void validate_backtest_config(const BacktestConfig& cfg) {
    validate_params(cfg.params);
    validate_sim_config(cfg.sim);
    validate_detector_config(cfg.detector);
    if (cfg.cycle_ms < 1) throw ConfigError("cycle length must be positive");
    if (cfg.end_ms < cfg.start_ms) {
        throw ConfigError("evaluation window is inverted");
    }
    if ((cfg.end_ms - cfg.start_ms) % cfg.cycle_ms != 0) {
        throw ConfigError("evaluation window must span a whole number of cycles");
    }
    if (!(cfg.annualization_days > 0.0)) {
        throw ConfigError("annualization days must be positive");
    }
    for (const auto& [pair, s] : cfg.series) {
        if (pair != s.pair_id) {
            throw ConfigError("series key does not match its pair id: " + pair);
        }
        validate_series(s);
    }
}

BacktestResult run_trade_loop(const BacktestConfig& cfg, Connector& connector,
                              const TradeLoopOptions& options) {
    validate_backtest_config(cfg);
    validate_retry_policy(options.retry);

    const std::int64_t total_cycles = cfg.cycle_ms > 0
        ? (cfg.end_ms - cfg.start_ms) / cfg.cycle_ms
        : 0;
    const std::int64_t first = std::max<std::int64_t>(0, options.first_cycle);
    const std::int64_t last = options.end_cycle < 0
        ? total_cycles
        : std::min(options.end_cycle, total_cycles);
    if (first > last) throw ValidationError("trade loop slice is inverted");

    BacktestResult out;
    std::map<std::string, GridContext> grid_ctx;
    std::map<std::string, std::vector<std::pair<double, double>>> utilization;
    const double capital = cfg.params.capital_per_pair.to_double();

    int unreachable_streak = 0;
    for (std::int64_t ci = first; ci < last; ++ci) {
        const std::int64_t t = cfg.start_ms + ci * cfg.cycle_ms;
        if (unreachable_streak >= options.retry.breaker_threshold) {
            throw FaultError(FaultKind::disconnect,
                             "circuit breaker tripped after " +
                                 std::to_string(unreachable_streak) +
                                 " consecutive unreachable cycles");
        }

        AccountView account;
        MarketSnapshot snap;
        bool reachable = false;
        std::string why;
        for (int attempt = 0; attempt < options.retry.max_attempts && !reachable;
             ++attempt) {
            try {
                account = connector.fetch_account(t);
                snap = connector.fetch_snapshot(t);
                reachable = true;
            } catch (const FaultError& e) {
                why = e.what();
            }
        }

        if (!reachable) {
            ++unreachable_streak;
            out.events.push_back({"cycle_skipped", "", t, Fixed(), why});
        } else {
            unreachable_streak = 0;
            BotState state = rebuild_state(account);
            auto t0 = std::chrono::steady_clock::now();
            StepResult sr = step(state, snap, cfg.params, t);
            auto t1 = std::chrono::steady_clock::now();
            out.step_latency_ms.push_back(
                std::chrono::duration<double, std::milli>(t1 - t0).count());

            for (const Action& a : sr.batch.actions) {
                if (a.kind != ActionKind::place_limit || a.reduce_only) continue;
                if (grid_ctx.count(a.pair) != 0) continue;
                GridContext g;
                g.p_before = snap.quotes.count(a.pair)
                    ? snap.quotes.at(a.pair).latest
                    : a.price;
                auto ph = sr.state.last_phi.find(a.pair);
                g.phi = ph != sr.state.last_phi.end() ? ph->second : Fixed();
                g.top_exponent = sell_ladder_top(cfg.params);
                grid_ctx.emplace(a.pair, g);
            }

            for (const Action& a : sr.batch.actions) {
                out.action_log.push_back(action_to_json(sr.batch.cycle_id, a));
                bool delivered = false;
                std::string fail;
                for (int attempt = 0;
                     attempt < options.retry.max_attempts && !delivered;
                     ++attempt) {
                    try {
                        if (a.kind == ActionKind::cancel) {
                            connector.cancel(a.cancel_target, t);
                        } else {
                            connector.submit(a, t);
                        }
                        delivered = true;
                    } catch (const FaultError& e) {
                        fail = e.what();
                    }
                }
                if (!delivered) {
                    out.events.push_back({"action_dropped", a.pair, t, Fixed(),
                                          fail + " [" + a.client_key + "]"});
                }
            }

            for (EngineEvent& e : sr.events) out.events.push_back(std::move(e));

            out.equity.emplace_back(t, account_equity(account, snap));
            for (const auto& [pair, series] : cfg.series) {
                (void)series;
                double deployed = 0.0;
                auto pit = account.positions.find(pair);
                if (pit != account.positions.end()) {
                    deployed = std::fabs(pit->second.cost.to_double());
                }
                utilization[pair].emplace_back(deployed, capital);
            }
        }

        if (options.on_advance) options.on_advance(t, t + cfg.cycle_ms);
    }

    // Terminal mark once the slice completes the window, so the curve ends on
    // post-flow equity rather than the last decision-time value.
    if (last == total_cycles && total_cycles > 0 && last > first) {
        bool reachable = false;
        for (int attempt = 0; attempt < options.retry.max_attempts && !reachable;
             ++attempt) {
            try {
                AccountView account = connector.fetch_account(cfg.end_ms);
                MarketSnapshot snap = connector.fetch_snapshot(cfg.end_ms);
                out.equity.emplace_back(cfg.end_ms, account_equity(account, snap));
                reachable = true;
            } catch (const FaultError&) {
            }
        }
    }

    const std::int64_t slice_start = cfg.start_ms + first * cfg.cycle_ms;
    const std::int64_t slice_end =
        last == total_cycles ? cfg.end_ms : cfg.start_ms + last * cfg.cycle_ms;
    out.fills = connector.trade_log();
    out.grid_context = std::move(grid_ctx);
    out.utilization = std::move(utilization);
    out.feedback = feedback_from_run(cfg, slice_start, slice_end, out.fills,
                                     out.equity, out.events, out.grid_context,
                                     out.utilization);
    return out;
}

BacktestResult run_backtest(const BacktestConfig& cfg) {
    validate_backtest_config(cfg);
    FixtureConnector connector(cfg.sim, cfg.series, cfg.pair_info);
    TradeLoopOptions options;
    options.on_advance = [&connector](std::int64_t from, std::int64_t to) {
        connector.advance(from, to);
    };
    return run_trade_loop(cfg, connector, options);
}

Feedback feedback_from_run(
    const BacktestConfig& cfg, std::int64_t period_start, std::int64_t period_end,
    const std::vector<FillRecord>& fills,
    const std::vector<std::pair<std::int64_t, Fixed>>& equity,
    const std::vector<EngineEvent>& events,
    const std::map<std::string, GridContext>& grid_context,
    const std::map<std::string, std::vector<std::pair<double, double>>>&
        utilization) {
    if (period_end <= period_start) {
        Feedback f;
        f.period_start = period_start;
        f.period_end = period_end;
        MetricValue none = MetricValue::none("zero-length evaluation window");
        f.arr = none;
        f.sharpe = none;
        f.sortino = none;
        f.mdd = none;
        f.win_rate = none;
        f.profit_factor = none;
        f.capital_utilization = none;
        f.pnl_per_unit_capital = none;
        f.fill_count = fills.size();
        return f;
    }

    FeedbackInputs in;
    in.period_start = period_start;
    in.period_end = period_end;
    in.equity = equity;
    for (const FillRecord& f : fills) {
        if (f.timestamp >= period_start && f.timestamp <= period_end) {
            in.fills.push_back(f);
        }
    }
    for (const auto& [pair, s] : cfg.series) {
        PairSeries trimmed;
        trimmed.pair_id = s.pair_id;
        trimmed.interval_s = s.interval_s;
        const std::int64_t span = s.interval_ms();
        for (const Candle& c : s.candles) {
            if (c.timestamp < period_start) continue;
            if (c.timestamp + span > period_end) break;
            trimmed.candles.push_back(c);
        }
        if (!trimmed.candles.empty()) in.series[pair] = std::move(trimmed);
    }
    in.grid_context = grid_context;
    for (const EngineEvent& e : events) {
        if (e.at_ms >= period_start && e.at_ms <= period_end) {
            in.engine_events.push_back(e);
        }
    }
    in.utilization = utilization;
    in.annualization_days = cfg.annualization_days;
    in.periods_per_year =
        cfg.annualization_days * 86'400'000.0 / static_cast<double>(cfg.cycle_ms);
    in.trade_log_ref = "run:" + std::to_string(period_start) + ".." +
                       std::to_string(period_end);
    in.market_ref = std::to_string(cfg.series.size()) + " pair series";
    return assemble_feedback(in, cfg.detector);
}

} // namespace voltgrid
