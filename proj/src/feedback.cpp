#include "voltgrid/feedback.hpp"

#include <algorithm>
#include <cmath>

namespace voltgrid {

void validate_detector_config(const DetectorConfig& cfg) {
    if (cfg.dd_trigger <= 0.0 || cfg.dd_trigger > 1.0) {
        throw ValidationError("drawdown trigger must lie in (0, 1]");
    }
    if (cfg.dd_window_ms <= 0) {
        throw ValidationError("drawdown window must be positive");
    }
    if (cfg.dd_min_entry_fills < 1) {
        throw ValidationError("entry-fill threshold must be at least 1");
    }
    if (cfg.capture_ratio <= 0.0 || cfg.capture_ratio > 1.0) {
        throw ValidationError("capture ratio must lie in (0, 1]");
    }
}

std::optional<RiskEvent> detect_drawdown_cascade(
    const std::vector<std::pair<std::int64_t, Fixed>>& equity,
    const std::vector<FillRecord>& fills, const DetectorConfig& cfg) {
    std::vector<double> values;
    values.reserve(equity.size());
    for (const auto& [ts, v] : equity) values.push_back(v.to_double());

    std::optional<RiskEvent> worst;
    double worst_dd = 0.0;
    for (std::size_t i = 0; i < equity.size(); ++i) {
        if (values[i] <= 0.0) continue;
        for (std::size_t j = i + 1; j < equity.size(); ++j) {
            if (equity[j].first - equity[i].first > cfg.dd_window_ms) break;
            const double dd = (values[i] - values[j]) / values[i];
            if (dd < cfg.dd_trigger || dd <= worst_dd) continue;
            int entries = 0;
            for (const FillRecord& f : fills) {
                if (f.opened && f.timestamp >= equity[i].first &&
                    f.timestamp <= equity[j].first) {
                    ++entries;
                }
            }
            if (entries < cfg.dd_min_entry_fills) continue;
            RiskEvent ev;
            ev.kind = "drawdown_cascade";
            ev.t0 = equity[i].first;
            ev.t1 = equity[j].first;
            ev.magnitudes["drawdown"] = dd;
            ev.magnitudes["entry_fills"] = static_cast<double>(entries);
            worst = ev;
            worst_dd = dd;
        }
    }
    return worst;
}

std::optional<RiskEvent> detect_boundary_breach(const std::string& pair,
                                                const PairSeries& series,
                                                const GridContext& ctx) {
    if (series.candles.empty()) return std::nullopt;
    const double boundary =
        ctx.p_before.to_double() *
        std::pow(1.0 + ctx.phi.to_double(), ctx.top_exponent.to_double());

    std::size_t breach = series.candles.size();
    for (std::size_t i = 0; i < series.candles.size(); ++i) {
        if (series.candles[i].high.to_double() > boundary) {
            breach = i;
            break;
        }
    }
    if (breach == series.candles.size()) return std::nullopt;

    bool continued = false;
    double peak = series.candles[breach].high.to_double();
    for (std::size_t i = breach + 1; i < series.candles.size(); ++i) {
        if (series.candles[i].close.to_double() > boundary) continued = true;
        peak = std::max(peak, series.candles[i].high.to_double());
    }
    if (!continued) return std::nullopt;

    RiskEvent ev;
    ev.kind = "boundary_breach";
    ev.pair = pair;
    ev.t0 = series.candles[breach].timestamp;
    ev.t1 = series.candles.back().timestamp;
    ev.magnitudes["p_peak"] = peak;
    ev.magnitudes["p_before"] = ctx.p_before.to_double();
    ev.magnitudes["phi"] = ctx.phi.to_double();
    ev.magnitudes["boundary"] = boundary;
    return ev;
}

std::optional<RiskEvent> detect_premature_exit(
    const std::string& pair, const PairSeries& series, const GridContext& ctx,
    const std::vector<std::pair<std::int64_t, Fixed>>& equity,
    const std::vector<FillRecord>& fills, const DetectorConfig& cfg) {
    if (series.candles.size() < 2 || equity.size() < 2) return std::nullopt;
    const double e0 = equity.front().second.to_double();
    const double e1 = equity.back().second.to_double();
    const double c0 = series.candles.front().close.to_double();
    if (e0 <= 0.0 || c0 <= 0.0) return std::nullopt;
    const double r_strategy = e1 / e0 - 1.0;
    const double r_buy_hold = series.candles.back().close.to_double() / c0 - 1.0;
    if (r_strategy >= r_buy_hold) return std::nullopt;

    // First position-opening fill for the pair anchors the trend measurement.
    const FillRecord* entry = nullptr;
    for (const FillRecord& f : fills) {
        if (f.pair == pair && f.opened && (!entry || f.timestamp < entry->timestamp)) {
            entry = &f;
        }
    }
    if (!entry) return std::nullopt;
    const double p_entry = entry->price.to_double();
    if (p_entry <= 0.0) return std::nullopt;

    double peak_after_entry = p_entry;
    for (const Candle& c : series.candles) {
        if (c.timestamp >= entry->timestamp) {
            peak_after_entry = std::max(peak_after_entry, c.close.to_double());
        }
    }
    if (peak_after_entry <= p_entry) return std::nullopt;

    // How much of the subsequent move did each profitable exit keep?
    double captured_acc = 0.0;
    int exits = 0;
    for (const FillRecord& f : fills) {
        if (f.pair != pair || f.opened || !(f.realized > Fixed())) continue;
        double peak_after_exit = 0.0;
        for (const Candle& c : series.candles) {
            if (c.timestamp >= f.timestamp) {
                peak_after_exit = std::max(peak_after_exit, c.close.to_double());
            }
        }
        if (peak_after_exit <= p_entry) continue; // no further favorable move
        captured_acc += (f.price.to_double() - p_entry) / (peak_after_exit - p_entry);
        ++exits;
    }
    if (exits == 0) return std::nullopt;
    const double captured = captured_acc / exits;
    if (captured >= cfg.capture_ratio) return std::nullopt;

    RiskEvent ev;
    ev.kind = "premature_exit";
    ev.pair = pair;
    ev.t0 = entry->timestamp;
    ev.t1 = series.candles.back().timestamp;
    ev.magnitudes["p_entry"] = p_entry;
    ev.magnitudes["delta_p"] = peak_after_entry - p_entry;
    ev.magnitudes["phi"] = ctx.phi.to_double();
    ev.magnitudes["captured"] = captured;
    ev.magnitudes["r_strategy"] = std::abs(r_strategy);
    ev.magnitudes["r_buy_hold"] = std::abs(r_buy_hold);
    return ev;
}

namespace {

MetricValue guard(const char* name, double (*fn)(const FeedbackInputs&),
                  const FeedbackInputs& in) {
    try {
        return MetricValue::of(fn(in));
    } catch (const UndefinedMetricError& e) {
        return MetricValue::none(std::string(name) + ": " + e.what());
    }
}

void check_integrity(const FeedbackInputs& in) {
    if (in.period_start >= in.period_end) {
        throw IntegrityError("feedback period is empty or inverted");
    }
    std::int64_t prev = in.period_start - 1;
    for (const auto& [ts, v] : in.equity) {
        if (ts < in.period_start || ts > in.period_end) {
            throw IntegrityError("equity sample outside the feedback period");
        }
        if (ts <= prev) {
            throw IntegrityError("equity samples must advance in time");
        }
        prev = ts;
    }
    for (const FillRecord& f : in.fills) {
        if (f.timestamp < in.period_start || f.timestamp > in.period_end) {
            throw IntegrityError("trade log fill outside the feedback period");
        }
    }
    for (const EngineEvent& e : in.engine_events) {
        if (e.at_ms < in.period_start || e.at_ms > in.period_end) {
            throw IntegrityError("engine event outside the feedback period");
        }
    }
}

std::vector<EquityPoint> to_double_curve(
    const std::vector<std::pair<std::int64_t, Fixed>>& equity) {
    std::vector<EquityPoint> out;
    out.reserve(equity.size());
    for (const auto& [ts, v] : equity) out.emplace_back(ts, v.to_double());
    return out;
}

} // namespace

Feedback assemble_feedback(const FeedbackInputs& in, const DetectorConfig& cfg) {
    validate_detector_config(cfg);
    check_integrity(in);

    Feedback f;
    f.period_start = in.period_start;
    f.period_end = in.period_end;
    f.fill_count = in.fills.size();
    f.trade_log_ref = in.trade_log_ref;
    f.market_ref = in.market_ref;

    f.arr = guard("arr",
                  [](const FeedbackInputs& i) {
                      const double period_days =
                          static_cast<double>(i.period_end - i.period_start) /
                          86'400'000.0;
                      return arr(to_double_curve(i.equity), period_days,
                                 i.annualization_days);
                  },
                  in);
    f.sharpe = guard("sharpe",
                     [](const FeedbackInputs& i) {
                         return sharpe(returns_from_equity(to_double_curve(i.equity)),
                                       0.0, i.periods_per_year);
                     },
                     in);
    f.sortino = guard("sortino",
                      [](const FeedbackInputs& i) {
                          return sortino(
                              returns_from_equity(to_double_curve(i.equity)), 0.0,
                              i.periods_per_year);
                      },
                      in);
    f.mdd = guard("mdd",
                  [](const FeedbackInputs& i) {
                      return mdd(to_double_curve(i.equity));
                  },
                  in);
    f.capital_utilization =
        guard("capital_utilization",
              [](const FeedbackInputs& i) {
                  std::vector<std::vector<std::pair<double, double>>> per_pair;
                  per_pair.reserve(i.utilization.size());
                  for (const auto& [pair, samples] : i.utilization) {
                      per_pair.push_back(samples);
                  }
                  return capital_utilization(per_pair);
              },
              in);
    f.win_rate = guard("win_rate",
                       [](const FeedbackInputs& i) {
                           return win_rate(trade_stats(i.fills));
                       },
                       in);
    f.profit_factor = guard("profit_factor",
                            [](const FeedbackInputs& i) {
                                return profit_factor(trade_stats(i.fills));
                            },
                            in);
    f.pnl_per_unit_capital =
        guard("pnl_per_unit_capital",
              [](const FeedbackInputs& i) {
                  return pnl_per_unit_capital(trade_stats(i.fills));
              },
              in);

    if (auto ev = detect_drawdown_cascade(in.equity, in.fills, cfg)) {
        f.risk_events.push_back(*ev);
    }
    for (const auto& [pair, ctx] : in.grid_context) {
        auto s = in.series.find(pair);
        if (s == in.series.end()) continue;
        if (auto ev = detect_boundary_breach(pair, s->second, ctx)) {
            f.risk_events.push_back(*ev);
        }
        if (auto ev = detect_premature_exit(pair, s->second, ctx, in.equity,
                                            in.fills, cfg)) {
            f.risk_events.push_back(*ev);
        }
    }
    for (const EngineEvent& e : in.engine_events) {
        if (e.kind != "deviation_block" && e.kind != "funding_deactivation") {
            continue;
        }
        RiskEvent ev;
        ev.kind = e.kind;
        ev.pair = e.pair;
        ev.t0 = e.at_ms;
        ev.t1 = e.at_ms;
        ev.magnitudes["magnitude"] = std::abs(e.magnitude.to_double());
        f.risk_events.push_back(ev);
    }
    return f;
}

namespace {

nlohmann::ordered_json metric_json(const MetricValue& m) {
    nlohmann::ordered_json j;
    j["defined"] = m.defined;
    if (m.defined) {
        j["value"] = m.value;
    } else {
        j["note"] = m.note;
    }
    return j;
}

} // namespace

nlohmann::ordered_json feedback_to_json(const Feedback& f) {
    nlohmann::ordered_json j;
    j["period_start"] = f.period_start;
    j["period_end"] = f.period_end;
    nlohmann::ordered_json metrics;
    metrics["arr"] = metric_json(f.arr);
    metrics["sharpe"] = metric_json(f.sharpe);
    metrics["sortino"] = metric_json(f.sortino);
    metrics["mdd"] = metric_json(f.mdd);
    metrics["win_rate"] = metric_json(f.win_rate);
    metrics["profit_factor"] = metric_json(f.profit_factor);
    metrics["capital_utilization"] = metric_json(f.capital_utilization);
    metrics["pnl_per_unit_capital"] = metric_json(f.pnl_per_unit_capital);
    j["metrics"] = metrics;
    j["fill_count"] = f.fill_count;
    j["trade_log_ref"] = f.trade_log_ref;
    j["market_ref"] = f.market_ref;
    nlohmann::ordered_json events = nlohmann::ordered_json::array();
    for (const RiskEvent& ev : f.risk_events) {
        nlohmann::ordered_json e;
        e["kind"] = ev.kind;
        e["pair"] = ev.pair;
        e["t0"] = ev.t0;
        e["t1"] = ev.t1;
        nlohmann::ordered_json mags;
        for (const auto& [k, v] : ev.magnitudes) mags[k] = v;
        e["magnitudes"] = mags;
        events.push_back(e);
    }
    j["risk_events"] = events;
    return j;
}

namespace {

MetricValue metric_from_json(const nlohmann::json& j, const char* name) {
    if (!j.is_object() || !j.contains("defined")) {
        throw ConfigError(std::string("metric ") + name +
                          " must be an object with a 'defined' flag");
    }
    if (j["defined"].get<bool>()) {
        return MetricValue::of(j.at("value").get<double>());
    }
    return MetricValue::none(j.value("note", ""));
}

} // namespace

Feedback feedback_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ConfigError("feedback must be a JSON object");
    Feedback f;
    try {
        f.period_start = j.at("period_start").get<std::int64_t>();
        f.period_end = j.at("period_end").get<std::int64_t>();
        const auto& m = j.at("metrics");
        f.arr = metric_from_json(m.at("arr"), "arr");
        f.sharpe = metric_from_json(m.at("sharpe"), "sharpe");
        f.sortino = metric_from_json(m.at("sortino"), "sortino");
        f.mdd = metric_from_json(m.at("mdd"), "mdd");
        f.win_rate = metric_from_json(m.at("win_rate"), "win_rate");
        f.profit_factor = metric_from_json(m.at("profit_factor"), "profit_factor");
        f.capital_utilization =
            metric_from_json(m.at("capital_utilization"), "capital_utilization");
        f.pnl_per_unit_capital = metric_from_json(m.at("pnl_per_unit_capital"),
                                                  "pnl_per_unit_capital");
        f.fill_count = j.at("fill_count").get<std::size_t>();
        f.trade_log_ref = j.value("trade_log_ref", "");
        f.market_ref = j.value("market_ref", "");
        for (const auto& e : j.value("risk_events", nlohmann::json::array())) {
            RiskEvent ev;
            ev.kind = e.at("kind").get<std::string>();
            ev.pair = e.value("pair", "");
            ev.t0 = e.at("t0").get<std::int64_t>();
            ev.t1 = e.at("t1").get<std::int64_t>();
            for (auto it = e.at("magnitudes").begin();
                 it != e.at("magnitudes").end(); ++it) {
                ev.magnitudes[it.key()] = it.value().get<double>();
            }
            f.risk_events.push_back(std::move(ev));
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("malformed feedback document: ") +
                          e.what());
    }
    return f;
}

} // namespace voltgrid
