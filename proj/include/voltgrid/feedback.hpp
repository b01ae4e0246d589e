#pragma once

#include "voltgrid/candle.hpp"
#include "voltgrid/engine.hpp"
#include "voltgrid/metrics.hpp"

#include <json.hpp>

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace voltgrid {

/// A metric that may legitimately be uncomputable. Undefined is a
/// first-class state carrying the reason — downstream consumers must not
/// read an undefined metric as zero.
struct MetricValue {
    bool defined = false;
    double value = 0.0;
    std::string note;

    static MetricValue of(double v) { return {true, v, ""}; }
    static MetricValue none(std::string why) { return {false, 0.0, std::move(why)}; }
};

/// Something that went wrong (or nearly wrong) during the period, with the
/// raw quantities a later optimization pass needs. Magnitudes are
/// non-negative; the window lies within the feedback period.
struct RiskEvent {
    std::string kind; ///< drawdown_cascade | boundary_breach | premature_exit
                      ///< | deviation_block | funding_deactivation
    std::string pair; ///< empty for account-level events
    std::int64_t t0 = 0;
    std::int64_t t1 = 0;
    std::map<std::string, double> magnitudes;
};

struct DetectorConfig {
    double dd_trigger = 0.5;                  ///< drawdown ratio that counts
    std::int64_t dd_window_ms = 30 * 60'000;  ///< ... within this window
    int dd_min_entry_fills = 5;               ///< ... with this much adding
    double capture_ratio = 0.5; ///< minimum share of a move exits should take
};
void validate_detector_config(const DetectorConfig& cfg);

/// Grid geometry at formation time, needed to judge whether price escaped
/// the laid ladder or a trend outran the profit-taking levels.
struct GridContext {
    Fixed p_before;     ///< anchor price when the ladder was laid
    Fixed phi;          ///< volatility coefficient at formation
    Fixed top_exponent; ///< highest sell-side ladder exponent
};

/// Deep, fast drawdown accompanied by dense position-adding fills.
std::optional<RiskEvent> detect_drawdown_cascade(
    const std::vector<std::pair<std::int64_t, Fixed>>& equity,
    const std::vector<FillRecord>& fills, const DetectorConfig& cfg);

/// Price exceeded the ladder's top level and kept going: a later close also
/// holds above the boundary.
std::optional<RiskEvent> detect_boundary_breach(const std::string& pair,
                                                const PairSeries& series,
                                                const GridContext& ctx);

/// The strategy underperformed buy-and-hold over a favorable move and its
/// profitable exits captured less than the configured share of that move.
std::optional<RiskEvent> detect_premature_exit(
    const std::string& pair, const PairSeries& series, const GridContext& ctx,
    const std::vector<std::pair<std::int64_t, Fixed>>& equity,
    const std::vector<FillRecord>& fills, const DetectorConfig& cfg);

/// Everything the feedback assembly consumes, all within [period_start,
/// period_end]. Utilization samples are (deployed, available) per pair.
struct FeedbackInputs {
    std::int64_t period_start = 0;
    std::int64_t period_end = 0;
    std::vector<std::pair<std::int64_t, Fixed>> equity;
    std::vector<FillRecord> fills;
    std::map<std::string, PairSeries> series;
    std::map<std::string, GridContext> grid_context;
    std::vector<EngineEvent> engine_events;
    std::map<std::string, std::vector<std::pair<double, double>>> utilization;
    double periods_per_year = 365.0;
    double annualization_days = 365.0;
    std::string trade_log_ref;
    std::string market_ref;
};

/// The period's self-contained report card: performance metrics plus the
/// risk events that the optimizer turns into constraints.
struct Feedback {
    std::int64_t period_start = 0;
    std::int64_t period_end = 0;
    MetricValue arr;
    MetricValue sharpe;
    MetricValue sortino;
    MetricValue mdd;
    MetricValue win_rate;
    MetricValue profit_factor;
    MetricValue capital_utilization;
    MetricValue pnl_per_unit_capital;
    std::size_t fill_count = 0;
    std::string trade_log_ref;
    std::string market_ref;
    std::vector<RiskEvent> risk_events;
};

/// Computes all metrics (undefined where uncomputable), runs the detectors,
/// and merges engine-reported risk events. Pure: identical inputs yield an
/// identical record. Throws IntegrityError when logs fall outside the
/// declared period or equity timestamps go backwards.
Feedback assemble_feedback(const FeedbackInputs& in, const DetectorConfig& cfg);

nlohmann::ordered_json feedback_to_json(const Feedback& f);

/// Inverse of feedback_to_json. Throws ConfigError on a malformed document.
Feedback feedback_from_json(const nlohmann::json& j);

} // namespace voltgrid
