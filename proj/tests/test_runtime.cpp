#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "voltgrid/backtest.hpp"
#include "voltgrid/config.hpp"
#include "voltgrid/connector.hpp"
#include "voltgrid/engine.hpp"
#include "voltgrid/report.hpp"
#include "voltgrid/synthetic.hpp"

#include <string>
#include <vector>

using namespace voltgrid;

namespace {

Fixed fx(const char* s) { return Fixed::parse(s); }

/// Ranging market whose swings are wide enough, relative to a 30-minute
/// volatility look-back, that the entry ladder actually fills.
PairSeries ranging_series(std::uint64_t seed) {
    SyntheticSpec spec;
    spec.kind = "mean_revert";
    spec.pair_id = "SYN/USD";
    spec.interval_s = 60;
    spec.bars = 600;
    spec.event_bars = 45; // one directional leg
    spec.amplitude = 0.03;
    spec.seed = seed;
    return generate_series(spec);
}

BacktestConfig active_config(std::uint64_t seed = 11) {
    BacktestConfig cfg;
    cfg.params.tau_s = 1800;
    cfg.params.capital_per_pair = Fixed::from_int(1000);
    cfg.sim.initial_cash = Fixed::from_int(10'000);
    PairFilters filters;
    filters.tick = fx("0.01");
    filters.lot = fx("0.0001");
    filters.min_notional = Fixed::from_int(5);
    cfg.sim.filters["SYN/USD"] = filters;
    cfg.series["SYN/USD"] = ranging_series(seed);
    cfg.pair_info["SYN/USD"] = PairRuntimeInfo{fx("0.0001"), 1};
    cfg.start_ms = 18'000'000;
    cfg.end_ms = 30'000'000;
    cfg.cycle_ms = 60'000;
    return cfg;
}

std::string dump_actions(const std::vector<nlohmann::ordered_json>& log) {
    std::string out;
    for (const auto& j : log) out += j.dump() + "\n";
    return out;
}

std::string dump_fills(const std::vector<FillRecord>& fills) {
    std::string out;
    for (const auto& f : fills) out += fill_to_json(f).dump() + "\n";
    return out;
}

std::string dump_equity(const std::vector<std::pair<std::int64_t, Fixed>>& eq) {
    std::string out;
    for (const auto& [t, v] : eq) {
        out += std::to_string(t) + "," + v.str() + "\n";
    }
    return out;
}

std::string dump_events(const std::vector<EngineEvent>& events) {
    std::string out;
    for (const auto& e : events) {
        out += e.kind + "|" + e.pair + "|" + std::to_string(e.at_ms) + "|" +
               e.magnitude.str() + "|" + e.note + "\n";
    }
    return out;
}

nlohmann::json minimal_run_config_json() {
    return nlohmann::json{
        {"start_ms", 18'000'000},
        {"end_ms", 30'000'000},
        {"cycle_ms", 60'000},
        {"data",
         {{{"pair", "SYN/USD"}, {"path", "syn.csv"}, {"interval_s", 60}}}},
        {"params", {{"tau_s", 1800}, {"capital_per_pair", "1000"}}},
        {"sim",
         {{"initial_cash", "10000"},
          {"filters",
           {{"SYN/USD",
             {{"tick", "0.01"}, {"lot", "0.0001"}, {"min_notional", "5"}}}}}}}};
}

} // namespace

// ---------------------------------------------------------------- synthetic

TEST_CASE("synthetic generation is deterministic and validated") {
    PairSeries a = ranging_series(11);
    PairSeries b = ranging_series(11);
    REQUIRE(a.candles.size() == b.candles.size());
    for (std::size_t i = 0; i < a.candles.size(); ++i) {
        CHECK(a.candles[i].timestamp == b.candles[i].timestamp);
        CHECK(a.candles[i].open == b.candles[i].open);
        CHECK(a.candles[i].high == b.candles[i].high);
        CHECK(a.candles[i].low == b.candles[i].low);
        CHECK(a.candles[i].close == b.candles[i].close);
        CHECK(a.candles[i].volume == b.candles[i].volume);
    }
    PairSeries c = ranging_series(12);
    bool differs = false;
    for (std::size_t i = 0; i < c.candles.size(); ++i) {
        if (c.candles[i].close != a.candles[i].close) differs = true;
    }
    CHECK(differs);

    SyntheticSpec bad;
    bad.kind = "sideways_miracle";
    CHECK_THROWS_AS(generate_series(bad), ConfigError);
    SyntheticSpec noisy;
    noisy.noise = 0.5;
    CHECK_THROWS_AS(generate_series(noisy), ConfigError);
}

TEST_CASE("ranging amplitude widens the swing beyond bare noise") {
    SyntheticSpec flat;
    flat.kind = "mean_revert";
    flat.amplitude = 0.0;
    flat.bars = 600;
    flat.interval_s = 60;
    flat.seed = 11;
    SyntheticSpec wide = flat;
    wide.amplitude = 0.03;
    wide.event_bars = 45;

    auto range_of = [](const PairSeries& s) {
        Fixed hi = s.candles.front().close;
        Fixed lo = hi;
        for (const Candle& c : s.candles) {
            hi = std::max(hi, c.close);
            lo = std::min(lo, c.close);
        }
        return (hi - lo).to_double();
    };
    double flat_range = range_of(generate_series(flat));
    double wide_range = range_of(generate_series(wide));
    CHECK(wide_range > flat_range + 3.0); // ~±3 around 100 vs noise-only
}

// ----------------------------------------------------------------- replays

TEST_CASE("replaying a window twice is byte-identical and nontrivial") {
    BacktestConfig cfg = active_config();
    BacktestResult a = run_backtest(cfg);
    BacktestResult b = run_backtest(cfg);

    CHECK(a.fills.size() > 0);
    CHECK(a.action_log.size() > 100);
    CHECK(dump_actions(a.action_log) == dump_actions(b.action_log));
    CHECK(dump_fills(a.fills) == dump_fills(b.fills));
    CHECK(dump_equity(a.equity) == dump_equity(b.equity));
    CHECK(dump_events(a.events) == dump_events(b.events));
    CHECK(feedback_to_json(a.feedback).dump() ==
          feedback_to_json(b.feedback).dump());

    // One equity sample per cycle plus the terminal sample.
    auto cycles = (cfg.end_ms - cfg.start_ms) / cfg.cycle_ms;
    CHECK(a.equity.size() == static_cast<std::size_t>(cycles) + 1);
    CHECK(a.equity.back().first == cfg.end_ms);
}

TEST_CASE("venue faults leave the replay deterministic") {
    BacktestConfig cfg = active_config();
    cfg.sim.faults.timeout_probability = 0.2;
    cfg.sim.faults.seed = 5;
    BacktestResult a = run_backtest(cfg);
    BacktestResult b = run_backtest(cfg);
    CHECK(dump_actions(a.action_log) == dump_actions(b.action_log));
    CHECK(dump_fills(a.fills) == dump_fills(b.fills));
    CHECK(dump_equity(a.equity) == dump_equity(b.equity));
}

TEST_CASE("a zero-length window yields an all-undefined feedback") {
    BacktestConfig cfg = active_config();
    cfg.end_ms = cfg.start_ms;
    BacktestResult r = run_backtest(cfg);
    CHECK(r.fills.empty());
    CHECK(r.action_log.empty());
    CHECK(r.equity.empty());
    CHECK_FALSE(r.feedback.arr.defined);
    CHECK_FALSE(r.feedback.sharpe.defined);
    CHECK_FALSE(r.feedback.sortino.defined);
    CHECK_FALSE(r.feedback.mdd.defined);
    CHECK_FALSE(r.feedback.win_rate.defined);
    CHECK_FALSE(r.feedback.profit_factor.defined);
    CHECK_FALSE(r.feedback.capital_utilization.defined);
    CHECK_FALSE(r.feedback.pnl_per_unit_capital.defined);
    CHECK(r.feedback.fill_count == 0);
    CHECK(r.feedback.arr.note.find("zero-length") != std::string::npos);
}

TEST_CASE("window validation rejects ragged cycle coverage") {
    BacktestConfig cfg = active_config();
    cfg.end_ms = cfg.start_ms + 90'000; // 1.5 cycles
    CHECK_THROWS_AS(run_backtest(cfg), ConfigError);
    cfg.end_ms = cfg.start_ms - 60'000;
    CHECK_THROWS_AS(run_backtest(cfg), ConfigError);
}

// ------------------------------------------------------------ restart drill

TEST_CASE("a trade loop restarted at a cycle boundary preserves every artifact") {
    BacktestConfig cfg = active_config();
    BacktestResult whole = run_backtest(cfg);

    FixtureConnector conn(cfg.sim, cfg.series, cfg.pair_info);
    TradeLoopOptions opt;
    opt.on_advance = [&conn](std::int64_t from, std::int64_t to) {
        conn.advance(from, to);
    };
    TradeLoopOptions first = opt;
    first.end_cycle = 100;
    BacktestResult a = run_trade_loop(cfg, conn, first);
    TradeLoopOptions second = opt;
    second.first_cycle = 100;
    BacktestResult b = run_trade_loop(cfg, conn, second);

    CHECK(dump_actions(a.action_log) + dump_actions(b.action_log) ==
          dump_actions(whole.action_log));
    CHECK(dump_equity(a.equity) + dump_equity(b.equity) ==
          dump_equity(whole.equity));
    CHECK(dump_events(a.events) + dump_events(b.events) ==
          dump_events(whole.events));
    CHECK(dump_fills(conn.trade_log()) == dump_fills(whole.fills));

    Feedback merged = feedback_from_run(
        cfg, cfg.start_ms, cfg.end_ms, conn.trade_log(),
        [&] {
            auto eq = a.equity;
            eq.insert(eq.end(), b.equity.begin(), b.equity.end());
            return eq;
        }(),
        [&] {
            auto ev = a.events;
            ev.insert(ev.end(), b.events.begin(), b.events.end());
            return ev;
        }(),
        whole.grid_context, whole.utilization);
    CHECK(feedback_to_json(merged).dump() ==
          feedback_to_json(whole.feedback).dump());
}

TEST_CASE("orders that outlived a crashed process are not resubmitted") {
    BacktestConfig cfg = active_config();
    BacktestResult whole = run_backtest(cfg);
    const std::int64_t k = 105; // mid-window decision cycle
    const std::int64_t t_k = cfg.start_ms + k * cfg.cycle_ms;

    FixtureConnector conn(cfg.sim, cfg.series, cfg.pair_info);
    TradeLoopOptions opt;
    opt.on_advance = [&conn](std::int64_t from, std::int64_t to) {
        conn.advance(from, to);
    };
    TradeLoopOptions first = opt;
    first.end_cycle = k;
    BacktestResult a = run_trade_loop(cfg, conn, first);

    // The process decides cycle k and delivers its orders to the venue, then
    // dies before persisting anything and before the market moves on.
    {
        BotState state = rebuild_state(conn.fetch_account(t_k));
        MarketSnapshot snap = conn.fetch_snapshot(t_k);
        StepResult phantom = step(state, snap, cfg.params, t_k);
        for (const Action& act : phantom.batch.actions) {
            if (act.kind == ActionKind::cancel) {
                conn.cancel(act.cancel_target, t_k);
            } else {
                conn.submit(act, t_k);
            }
        }
        CHECK(phantom.batch.actions.size() > 0); // the drill exercised something
    }

    TradeLoopOptions second = opt;
    second.first_cycle = k;
    BacktestResult b = run_trade_loop(cfg, conn, second);

    // The venue executed exactly what the uninterrupted run executed: the
    // restarted loop recognised the resting orders instead of re-placing them.
    CHECK(dump_fills(conn.trade_log()) == dump_fills(whole.fills));

    // Batch ids are clock-derived, not loop-local — translate the slice
    // boundary into the id the phantom cycle carried.
    const std::int64_t kid = cfg.params.schedule.cycle_index(t_k);

    // Nothing was logged twice for the phantom cycle...
    for (const auto& j : b.action_log) {
        CHECK(j.at("cycle_id").get<std::int64_t>() > kid);
    }
    // ...and every later decision matches the uninterrupted run exactly.
    auto after_kid = [&](const std::vector<nlohmann::ordered_json>& log) {
        std::string out;
        for (const auto& j : log) {
            if (j.at("cycle_id").get<std::int64_t>() > kid) out += j.dump() + "\n";
        }
        return out;
    };
    CHECK(after_kid(b.action_log) == after_kid(whole.action_log));
    CHECK(dump_actions(a.action_log) ==
          [&] {
              std::string out;
              for (const auto& j : whole.action_log) {
                  if (j.at("cycle_id").get<std::int64_t>() < kid) {
                      out += j.dump() + "\n";
                  }
              }
              return out;
          }());
}

// ------------------------------------------------------------------- config

TEST_CASE("run configs reject unknown keys by name") {
    nlohmann::json j = minimal_run_config_json();
    j["surprise"] = 1;
    try {
        run_config_from_json(j);
        FAIL("unknown top-level key accepted");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("surprise") != std::string::npos);
    }

    j = minimal_run_config_json();
    j["params"]["grid_spacing"] = 2;
    CHECK_THROWS_AS(run_config_from_json(j), ConfigError);

    j = minimal_run_config_json();
    j["sim"]["fees"] = {{"maker_bps", "1"}, {"gst_bps", "18"}};
    CHECK_THROWS_AS(run_config_from_json(j), ConfigError);

    j = minimal_run_config_json();
    j["data"].push_back(j["data"][0]); // duplicate pair
    CHECK_THROWS_AS(run_config_from_json(j), ConfigError);

    j = minimal_run_config_json();
    j["market_profile"] = "commodities";
    CHECK_THROWS_AS(run_config_from_json(j), ConfigError);
}

TEST_CASE("run configs round-trip through their JSON form") {
    nlohmann::json j = minimal_run_config_json();
    j["pair_info"] = {{"SYN/USD", {{"funding_rate", "0.0001"}, {"cap_rank", 3}}}};
    j["objective"] = {{"weights", {{"return", 0.6}, {"neg_mdd", 0.4}}},
                      {"seeds", {4, 5}}};
    j["optimizer"] = {{"seed", 9}, {"budget", 48}, {"max_cycles", 2}};
    j["budget"] = {{"global_capital", "20000"},
                   {"n_parallel", 2},
                   {"safety_factor", "2"}};
    j["retry"] = {{"max_attempts", 4}, {"backoff_ms", 100},
                  {"breaker_threshold", 6}};

    RunConfig once = run_config_from_json(j);
    nlohmann::ordered_json emitted = run_config_to_json(once);
    RunConfig twice = run_config_from_json(emitted);
    CHECK(run_config_to_json(twice).dump() == emitted.dump());
    CHECK(once.annualization_days() == 365.0);
    once.market_profile = "index_futures";
    CHECK(once.annualization_days() == 252.0);
}

// ----------------------------------------------------------------- feedback

TEST_CASE("feedback documents round-trip through their JSON form") {
    BacktestConfig cfg = active_config();
    BacktestResult r = run_backtest(cfg);
    nlohmann::ordered_json j = feedback_to_json(r.feedback);
    Feedback parsed = feedback_from_json(j);
    CHECK(feedback_to_json(parsed).dump() == j.dump());

    nlohmann::json broken = j;
    broken.erase("metrics");
    CHECK_THROWS_AS(feedback_from_json(broken), ConfigError);
}

// ------------------------------------------------------------------- report

TEST_CASE("report tables derive per-pair rows from the trade log") {
    // Two-day window, one open and one close, hand-checkable.
    ReportInputs in;
    in.feedback.period_start = 0;
    in.feedback.period_end = 2 * 86'400'000;
    in.feedback.arr = MetricValue::of(0.5);
    in.feedback.sharpe = MetricValue::none("too short");
    in.feedback.mdd = MetricValue::of(0.031415);
    in.capital_per_pair = Fixed::from_int(1000);
    in.pairs = {"AAA/USD", "BBB/USD"};

    FillRecord open;
    open.fill_id = "f1";
    open.order_id = "o1";
    open.pair = "AAA/USD";
    open.side = Side::buy;
    open.price = Fixed::from_int(100);
    open.qty = Fixed::from_int(2);
    open.fee = fx("0.5");
    open.timestamp = 3'600'000;
    open.realized = Fixed();
    open.opened = true;
    FillRecord close = open;
    close.fill_id = "f2";
    close.order_id = "o2";
    close.side = Side::sell;
    close.timestamp = 90'000'000; // day 2
    close.realized = Fixed::from_int(25);
    close.opened = false;
    in.fills = {open, close};
    in.equity = {{0, Fixed::from_int(1000)}, {86'400'000, fx("999.50")}};

    ReportTables t = build_report(in);

    // The traded pair's row reproduces the metric operations applied to the
    // daily realized-profit curve [1000, 999.5, 1024].
    std::vector<EquityPoint> curve = {
        {0, 1000.0}, {86'400'000, 999.5}, {2 * 86'400'000, 1024.0}};
    char expect_arr[64], expect_sharpe[64];
    std::snprintf(expect_arr, sizeof expect_arr, "%.4f",
                  arr(curve, 2.0, 365.0) * 100.0);
    std::snprintf(expect_sharpe, sizeof expect_sharpe, "%.4f",
                  sharpe(returns_from_equity(curve), 0.0, 365.0));
    std::string aaa_row = std::string("AAA/USD,") + expect_arr + "," +
                          expect_sharpe + ",0.0500,1,1.0000\n";
    CHECK(t.metrics_csv.find(aaa_row) != std::string::npos);

    // A configured pair with no trades reports zero frequency, not blanks.
    CHECK(t.metrics_csv.find("BBB/USD,n/a,n/a,n/a,0,0.0000\n") !=
          std::string::npos);
    // The account row echoes the feedback record at fixed formatting.
    CHECK(t.metrics_csv.find("ACCOUNT,50.0000,n/a,3.1415,1,1.0000\n") !=
          std::string::npos);
    CHECK(t.transactions.at("AAA/USD").size() == 2);
    CHECK_FALSE(t.transactions.contains("BBB/USD"));
    CHECK(t.equity_csv ==
          "timestamp,equity\n0,1000.00000000\n86400000,999.50000000\n");

    ReportTables again = build_report(in);
    CHECK(again.metrics_csv == t.metrics_csv);
    CHECK(again.transactions.dump() == t.transactions.dump());

    in.feedback.period_end = -1;
    CHECK_THROWS_AS(build_report(in), ValidationError);
}

TEST_CASE("report metric rows stay consistent with the replay's own feedback") {
    BacktestConfig cfg = active_config();
    BacktestResult r = run_backtest(cfg);
    REQUIRE(r.fills.size() > 0);

    ReportInputs in;
    in.feedback = r.feedback;
    in.fills = r.fills;
    in.equity = r.equity;
    in.pairs = {"SYN/USD"};
    in.capital_per_pair = cfg.params.capital_per_pair;
    in.annualization_days = cfg.annualization_days;
    ReportTables t = build_report(in);

    char cell[64];
    std::snprintf(cell, sizeof cell, "%.4f", r.feedback.arr.value * 100.0);
    CHECK(t.metrics_csv.find(std::string("ACCOUNT,") + cell + ",") !=
          std::string::npos);
    std::size_t closing = 0;
    for (const auto& f : r.fills) {
        if (!f.opened) ++closing;
    }
    CHECK(t.transactions.at("SYN/USD").size() == r.fills.size());
    std::string aaa = t.metrics_csv.substr(t.metrics_csv.find("SYN/USD,"));
    aaa = aaa.substr(0, aaa.find('\n'));
    CHECK(aaa.find("," + std::to_string(closing) + ",") != std::string::npos);
}
