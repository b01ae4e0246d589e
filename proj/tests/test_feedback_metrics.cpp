#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "voltgrid/feedback.hpp"
#include "voltgrid/metrics.hpp"

#include <random>

using namespace voltgrid;

namespace {

Fixed fx(const char* s) { return Fixed::parse(s); }

std::vector<EquityPoint> curve(std::initializer_list<double> values) {
    std::vector<EquityPoint> out;
    std::int64_t t = 0;
    for (double v : values) out.emplace_back(t++, v);
    return out;
}

Candle flat(std::int64_t ts, const char* px) {
    Fixed p = fx(px);
    return Candle{ts, p, p, p, p, Fixed::from_int(1000)};
}

FillRecord fill(const char* pair, bool opened, const char* price, const char* qty,
                const char* realized, std::int64_t ts) {
    FillRecord f;
    f.pair = pair;
    f.opened = opened;
    f.price = fx(price);
    f.qty = fx(qty);
    f.realized = fx(realized);
    f.timestamp = ts;
    f.side = opened ? Side::buy : Side::sell;
    return f;
}

} // namespace

TEST_CASE("annualized return scales the raw ratio linearly") {
    CHECK(arr(curve({100, 100, 100}), 365.0, 365.0) == 0.0);
    CHECK(arr(curve({100, 110}), 365.0, 365.0) == 0.1);
    CHECK(arr(curve({100, 110}), 182.5, 365.0) == 0.2);
    CHECK_THROWS_AS(arr({}, 10.0, 365.0), UndefinedMetricError);
    CHECK_THROWS_AS(arr(curve({0, 50}), 10.0, 365.0), UndefinedMetricError);
    CHECK_THROWS_AS(arr(curve({100, 110}), 0.0, 365.0), ValidationError);
}

TEST_CASE("risk-adjusted return over population dispersion") {
    CHECK(sharpe({0.01, 0.03}, 0.0, 1.0) == 2.0);
    CHECK_THROWS_AS(sharpe({0.02, 0.02, 0.02}, 0.02, 1.0), UndefinedMetricError);
    CHECK_THROWS_AS(sharpe({0.01}, 0.0, 1.0), UndefinedMetricError);
    // Shifting every return and the risk-free rate together changes nothing.
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> ret(-0.05, 0.05);
    std::vector<double> rs;
    for (int i = 0; i < 50; ++i) rs.push_back(ret(rng));
    double base = sharpe(rs, 0.001, 365.0);
    std::vector<double> shifted = rs;
    for (double& r : shifted) r += 0.01;
    CHECK(sharpe(shifted, 0.011, 365.0) == doctest::Approx(base).epsilon(1e-9));
}

TEST_CASE("downside-only dispersion in the denominator") {
    CHECK(sortino({-0.02, 0.04}, 0.0, 1.0) == 0.7071067811865476);
    CHECK_THROWS_AS(sortino({0.01, 0.02}, 0.0, 1.0), UndefinedMetricError);

    // Whenever the downside deviation is no larger than the full deviation
    // and the mean excess is non-negative, the downside-adjusted ratio
    // cannot be smaller.
    std::mt19937_64 rng(6);
    std::normal_distribution<double> ret(0.004, 0.02);
    int checked = 0;
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> rs;
        for (int i = 0; i < 30; ++i) rs.push_back(ret(rng));
        double m = 0.0;
        for (double r : rs) m += r;
        m /= static_cast<double>(rs.size());
        if (m < 0.0) continue;
        double var = 0.0, down = 0.0;
        for (double r : rs) {
            var += (r - m) * (r - m);
            if (r < 0.0) down += r * r;
        }
        if (down == 0.0 || down > var) continue;
        CHECK(sortino(rs, 0.0, 365.0) >= sharpe(rs, 0.0, 365.0));
        ++checked;
    }
    CHECK(checked > 100); // the property was actually exercised
}

TEST_CASE("maximum drawdown against the running peak") {
    CHECK(mdd(curve({100, 105, 120, 130})) == 0.0);
    CHECK(mdd(curve({100, 120, 90, 130})) == 0.25);
    CHECK_THROWS_AS(mdd({}), UndefinedMetricError);

    // Random curves agree exactly with the all-pairs brute force, stay in
    // [0, 1), and never shrink when the curve is extended.
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> level(1.0, 1000.0);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<EquityPoint> c;
        for (int i = 0; i < 60; ++i) c.emplace_back(i, level(rng));
        double brute = 0.0;
        for (std::size_t i = 0; i < c.size(); ++i) {
            for (std::size_t j = i + 1; j < c.size(); ++j) {
                if (c[i].second <= 0.0) continue;
                brute = std::max(brute,
                                 (c[i].second - c[j].second) / c[i].second);
            }
        }
        double got = mdd(c);
        CHECK(got == brute);
        CHECK(got >= 0.0);
        CHECK(got < 1.0);
        std::vector<EquityPoint> prefix(c.begin(), c.begin() + 30);
        CHECK(mdd(prefix) <= got);
    }
}

TEST_CASE("capital utilization averages pairs' time-averaged ratios") {
    CHECK(capital_utilization({}) == 0.0);
    CHECK(capital_utilization({{{0, 1000}, {0, 1000}}}) == 0.0);
    CHECK(capital_utilization({{{500, 1000}}}) == 0.5);
    CHECK(capital_utilization({{{200, 1000}}, {{600, 1000}}}) == 0.4);
    CHECK_THROWS_AS(capital_utilization({{{10, 0}}}), ValidationError);
}

TEST_CASE("trade statistics aggregate the log exactly") {
    std::vector<FillRecord> fills = {
        fill("A", true, "100", "5", "0", 10),
        fill("A", false, "110", "1", "10", 20),
        fill("A", false, "95", "1", "-5", 30),
        fill("A", false, "103", "1", "3", 40),
        fill("A", false, "98", "1", "-2", 50),
        fill("A", false, "104", "1", "4", 60),
    };
    TradeStats s = trade_stats(fills);
    CHECK(s.closed == 5);
    CHECK(s.wins == 3);
    CHECK(s.gross_profit == 17.0);
    CHECK(s.gross_loss == 7.0);
    CHECK(s.invested_notional == 500.0);
    CHECK(win_rate(s) == 0.6);
    CHECK(profit_factor(s) == 2.4285714285714284);
    CHECK(pnl_per_unit_capital(s) == 0.02);

    CHECK_THROWS_AS(win_rate(trade_stats({})), UndefinedMetricError);
    TradeStats no_loss = trade_stats({fill("A", false, "110", "1", "10", 20)});
    CHECK_THROWS_AS(profit_factor(no_loss), UndefinedMetricError);
    CHECK_THROWS_AS(pnl_per_unit_capital(no_loss), UndefinedMetricError);

    // Randomized cross-check against an independent accumulation.
    std::mt19937_64 rng(8);
    std::uniform_int_distribution<int> cents(-500, 500);
    std::uniform_int_distribution<int> flag(0, 1);
    std::vector<FillRecord> rand_fills;
    double exp_profit = 0.0, exp_loss = 0.0, exp_invested = 0.0;
    std::int64_t exp_closed = 0, exp_wins = 0;
    for (int i = 0; i < 500; ++i) {
        bool opened = flag(rng) == 1;
        Fixed price = Fixed::div(Fixed::from_int(10'000 + cents(rng)),
                                 Fixed::from_int(100));
        Fixed qty = Fixed::div(Fixed::from_int(1 + (i % 7)), Fixed::from_int(10));
        Fixed realized = opened ? Fixed()
                                : Fixed::div(Fixed::from_int(cents(rng)),
                                             Fixed::from_int(100));
        FillRecord f;
        f.pair = "A";
        f.opened = opened;
        f.price = price;
        f.qty = qty;
        f.realized = realized;
        f.timestamp = i;
        rand_fills.push_back(f);
        if (opened) {
            exp_invested += Fixed::mul(price, qty).to_double();
        } else {
            ++exp_closed;
            double r = realized.to_double();
            if (r > 0.0) {
                ++exp_wins;
                exp_profit += r;
            } else if (r < 0.0) {
                exp_loss += -r;
            }
        }
    }
    TradeStats rs = trade_stats(rand_fills);
    CHECK(rs.closed == exp_closed);
    CHECK(rs.wins == exp_wins);
    CHECK(rs.gross_profit == exp_profit);
    CHECK(rs.gross_loss == exp_loss);
    CHECK(rs.invested_notional == exp_invested);
}

TEST_CASE("action-cost efficiency ratio and its limit") {
    EfficiencyReport r = efficiency_report(2.0, 0.01, 100.0, 50.0, 1000, "usd");
    CHECK(r.eta == 12.5); // 2000 / (150 + 10)
    CHECK(r.unit == "usd");

    // Monotone in the action count, bounded by c_agent / c_bot.
    double prev = 0.0;
    for (std::int64_t n : {10, 100, 1000, 10'000, 100'000}) {
        double eta = efficiency_report(2.0, 0.01, 100.0, 50.0, n, "usd").eta;
        CHECK(eta > prev);
        CHECK(eta < 2.0 / 0.01);
        prev = eta;
    }
    CHECK(efficiency_report(2.0, 0.01, 100.0, 50.0, 1'000'000'000, "usd").eta ==
          doctest::Approx(200.0).epsilon(1e-4));

    CHECK_THROWS_AS(efficiency_report(-1, 0.01, 0, 0, 10, "s"), ValidationError);
    CHECK_THROWS_AS(efficiency_report(1, 0.0, 0, 0, 10, "s"), ValidationError);
    CHECK_THROWS_AS(efficiency_report(1, 0.01, 0, 0, -1, "s"), ValidationError);
    CHECK_THROWS_AS(efficiency_report(1, 0.01, 0, 0, 0, "s"),
                    UndefinedMetricError); // zero denominator
}

// ------------------------------------------------------------------ detectors

TEST_CASE("deep fast drawdown with dense adding is a cascade") {
    DetectorConfig cfg;
    std::vector<std::pair<std::int64_t, Fixed>> eq = {
        {0, fx("1000")}, {300'000, fx("900")}, {1'500'000, fx("430")}};
    std::vector<FillRecord> fills;
    for (int i = 0; i < 6; ++i) {
        fills.push_back(fill("A", true, "100", "1", "0", 100'000 + i * 100'000));
    }
    auto ev = detect_drawdown_cascade(eq, fills, cfg);
    REQUIRE(ev.has_value());
    CHECK(ev->kind == "drawdown_cascade");
    CHECK(ev->t0 == 0);
    CHECK(ev->t1 == 1'500'000);
    CHECK(ev->magnitudes.at("drawdown") == 0.57);
    CHECK(ev->magnitudes.at("entry_fills") == 6.0);

    // Too few adds: not a cascade.
    std::vector<FillRecord> sparse(fills.begin(), fills.begin() + 4);
    CHECK_FALSE(detect_drawdown_cascade(eq, sparse, cfg).has_value());

    // Same depth stretched over more than the window: not a cascade.
    std::vector<std::pair<std::int64_t, Fixed>> slow = {
        {0, fx("1000")}, {1'700'000, fx("740")}, {3'400'000, fx("480")}};
    CHECK_FALSE(detect_drawdown_cascade(slow, fills, cfg).has_value());

    // Deep but with no adding at all: not a cascade.
    CHECK_FALSE(detect_drawdown_cascade(eq, {}, cfg).has_value());
}

TEST_CASE("price escaping the ladder top and holding above is a breach") {
    GridContext ctx{fx("100"), fx("0.1"), fx("2")}; // boundary = 121
    PairSeries s;
    s.pair_id = "A";
    s.interval_s = 900;
    s.candles = {
        Candle{0, fx("100"), fx("105"), fx("99"), fx("105"), fx("1000")},
        Candle{900'000, fx("105"), fx("120"), fx("104"), fx("119"), fx("1000")},
        Candle{1'800'000, fx("119"), fx("123"), fx("118"), fx("122"), fx("1000")},
        Candle{2'700'000, fx("122"), fx("126"), fx("121"), fx("125"), fx("1000")},
    };
    auto ev = detect_boundary_breach("A", s, ctx);
    REQUIRE(ev.has_value());
    CHECK(ev->kind == "boundary_breach");
    CHECK(ev->pair == "A");
    CHECK(ev->t0 == 1'800'000);
    CHECK(ev->magnitudes.at("p_peak") == 126.0);
    CHECK(ev->magnitudes.at("p_before") == 100.0);
    CHECK(ev->magnitudes.at("phi") == 0.1);

    // A wick through the boundary that closes back inside is not a breach.
    PairSeries spike = s;
    spike.candles[3] =
        Candle{2'700'000, fx("122"), fx("124"), fx("118"), fx("119"), fx("1000")};
    spike.candles[2].close = fx("119"); // breach candle itself closes inside
    spike.candles[2].low = fx("118");
    CHECK_FALSE(detect_boundary_breach("A", spike, ctx).has_value());

    // Price that never reaches the boundary is not a breach.
    PairSeries calm = s;
    calm.candles.resize(2);
    CHECK_FALSE(detect_boundary_breach("A", calm, ctx).has_value());
}

TEST_CASE("underperforming a trend with shallow exits is premature") {
    DetectorConfig cfg;
    GridContext ctx{fx("100"), fx("0.05"), fx("2")};
    PairSeries s;
    s.pair_id = "A";
    s.interval_s = 900;
    s.candles = {flat(0, "100"), flat(900'000, "102"), flat(1'800'000, "110"),
                 flat(2'700'000, "130"), flat(3'600'000, "150")};
    std::vector<std::pair<std::int64_t, Fixed>> eq = {{0, fx("1000")},
                                                      {3'600'000, fx("1010")}};
    std::vector<FillRecord> fills = {
        fill("A", true, "100", "2", "0", 900'000),
        fill("A", false, "110", "1", "10", 1'800'000),
    };
    auto ev = detect_premature_exit("A", s, ctx, eq, fills, cfg);
    REQUIRE(ev.has_value());
    CHECK(ev->kind == "premature_exit");
    CHECK(ev->magnitudes.at("p_entry") == 100.0);
    CHECK(ev->magnitudes.at("delta_p") == 50.0);
    CHECK(ev->magnitudes.at("captured") == 0.2);
    CHECK(ev->magnitudes.at("phi") == 0.05);

    // Exits that keep most of the move are fine.
    std::vector<FillRecord> deep = {
        fill("A", true, "100", "2", "0", 900'000),
        fill("A", false, "140", "1", "40", 2'700'000),
    };
    CHECK_FALSE(detect_premature_exit("A", s, ctx, eq, deep, cfg).has_value());

    // Outperforming buy-and-hold is fine regardless of capture.
    std::vector<std::pair<std::int64_t, Fixed>> strong = {{0, fx("1000")},
                                                          {3'600'000, fx("2000")}};
    CHECK_FALSE(detect_premature_exit("A", s, ctx, strong, fills, cfg).has_value());
}

// ------------------------------------------------------------- feedback record

namespace {

FeedbackInputs composite_inputs() {
    FeedbackInputs in;
    in.period_start = 0;
    in.period_end = 10LL * 86'400'000;
    const int vals[] = {1000, 1010, 1005, 1020, 990, 1002,
                        1015, 1013, 1030, 1025, 1040};
    for (int i = 0; i < 11; ++i) {
        in.equity.emplace_back(static_cast<std::int64_t>(i) * 86'400'000,
                               Fixed::from_int(vals[i]));
    }
    in.fills = {
        fill("A", true, "100", "5", "0", 10),
        fill("A", false, "110", "1", "10", 20),
        fill("A", false, "95", "1", "-5", 30),
        fill("A", false, "103", "1", "3", 40),
        fill("A", false, "98", "1", "-2", 50),
        fill("A", false, "104", "1", "4", 60),
    };
    in.utilization["A"] = {{200, 1000}};
    in.utilization["B"] = {{600, 1000}};
    in.trade_log_ref = "trades.jsonl";
    in.market_ref = "window-0";
    return in;
}

} // namespace

TEST_CASE("the feedback record reproduces every metric bit for bit") {
    Feedback f = assemble_feedback(composite_inputs(), DetectorConfig{});
    REQUIRE(f.arr.defined);
    CHECK(f.arr.value == 1.46);
    REQUIRE(f.sharpe.defined);
    CHECK(f.sharpe.value == 5.595171531561283);
    REQUIRE(f.sortino.defined);
    CHECK(f.sortino.value == 8.030103550987173);
    REQUIRE(f.mdd.defined);
    CHECK(f.mdd.value == 0.029411764705882353);
    REQUIRE(f.win_rate.defined);
    CHECK(f.win_rate.value == 0.6);
    REQUIRE(f.profit_factor.defined);
    CHECK(f.profit_factor.value == 2.4285714285714284);
    REQUIRE(f.capital_utilization.defined);
    CHECK(f.capital_utilization.value == 0.4);
    REQUIRE(f.pnl_per_unit_capital.defined);
    CHECK(f.pnl_per_unit_capital.value == 0.02);
    CHECK(f.fill_count == 6);
    CHECK(f.risk_events.empty());

    // Determinism: assembling twice yields byte-identical documents.
    Feedback g = assemble_feedback(composite_inputs(), DetectorConfig{});
    CHECK(feedback_to_json(f).dump() == feedback_to_json(g).dump());
}

TEST_CASE("an empty log leaves trade metrics undefined, not zero") {
    FeedbackInputs in = composite_inputs();
    in.fills.clear();
    Feedback f = assemble_feedback(in, DetectorConfig{});
    CHECK(f.arr.defined);
    CHECK(f.mdd.defined);
    CHECK_FALSE(f.win_rate.defined);
    CHECK_FALSE(f.win_rate.note.empty());
    CHECK_FALSE(f.profit_factor.defined);
    CHECK_FALSE(f.pnl_per_unit_capital.defined);
    CHECK(f.risk_events.empty());
    nlohmann::ordered_json j = feedback_to_json(f);
    CHECK(j["metrics"]["win_rate"]["defined"] == false);
    CHECK(j["metrics"]["arr"]["value"] == 1.46);
}

TEST_CASE("logs outside the declared period are an integrity violation") {
    FeedbackInputs in = composite_inputs();
    in.fills[0].timestamp = -5;
    CHECK_THROWS_AS(assemble_feedback(in, DetectorConfig{}), IntegrityError);

    in = composite_inputs();
    in.equity[3].first = in.equity[2].first; // stalled clock
    CHECK_THROWS_AS(assemble_feedback(in, DetectorConfig{}), IntegrityError);

    in = composite_inputs();
    in.period_end = in.period_start;
    CHECK_THROWS_AS(assemble_feedback(in, DetectorConfig{}), IntegrityError);

    CHECK_THROWS_AS(validate_detector_config(DetectorConfig{0.0, 1000, 5, 0.5}),
                    ValidationError);
}

TEST_CASE("engine guard events are merged as risk events") {
    FeedbackInputs in = composite_inputs();
    in.engine_events.push_back({"deviation_block", "A", 1000, fx("0.02"), ""});
    in.engine_events.push_back({"funding_deactivation", "B", 2000, fx("-0.002"), ""});
    in.engine_events.push_back({"stale_indicator", "C", 3000, Fixed(), ""});
    Feedback f = assemble_feedback(in, DetectorConfig{});
    REQUIRE(f.risk_events.size() == 2);
    CHECK(f.risk_events[0].kind == "deviation_block");
    CHECK(f.risk_events[0].magnitudes.at("magnitude") == 0.02);
    CHECK(f.risk_events[1].kind == "funding_deactivation");
    CHECK(f.risk_events[1].magnitudes.at("magnitude") == 0.002);
    for (const RiskEvent& ev : f.risk_events) {
        CHECK(ev.t0 >= f.period_start);
        CHECK(ev.t1 <= f.period_end);
        for (const auto& [k, v] : ev.magnitudes) CHECK(v >= 0.0);
    }
}

TEST_CASE("detector findings appear in the assembled record") {
    FeedbackInputs in;
    in.period_start = 0;
    in.period_end = 3'600'000;
    in.equity = {{0, fx("1000")}, {300'000, fx("900")}, {1'500'000, fx("430")}};
    for (int i = 0; i < 6; ++i) {
        in.fills.push_back(fill("A", true, "100", "1", "0", 100'000 + i * 100'000));
    }
    Feedback f = assemble_feedback(in, DetectorConfig{});
    REQUIRE(f.risk_events.size() == 1);
    CHECK(f.risk_events[0].kind == "drawdown_cascade");
    CHECK(f.risk_events[0].magnitudes.at("drawdown") == 0.57);
}
