#pragma once

#include "voltgrid/errors.hpp"
#include "voltgrid/orders.hpp"

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace voltgrid {

/// Performance metrics live in the double domain: they summarize the ledger
/// but never feed back into it. Every function here is a pure function of
/// its inputs with a pinned evaluation order, so recomputation reproduces
/// results bit for bit. Metrics that cannot be computed from the data throw
/// UndefinedMetricError rather than returning a silent zero — "no risk" and
/// "no data" must stay distinguishable downstream.

using EquityPoint = std::pair<std::int64_t, double>;

/// Annualized rate of return: raw return (final - initial) / initial scaled
/// linearly by annualization_days / period_days.
double arr(const std::vector<EquityPoint>& curve, double period_days,
           double annualization_days);

/// Per-period simple returns e_i / e_{i-1} - 1 from an equity curve.
/// Undefined when any base value is non-positive or fewer than two samples.
std::vector<double> returns_from_equity(const std::vector<EquityPoint>& curve);

/// Mean excess return over the population standard deviation of excess
/// returns, annualized by sqrt(periods_per_year).
double sharpe(const std::vector<double>& returns, double risk_free,
              double periods_per_year);

/// As sharpe, but the denominator is the downside deviation: root mean
/// square of negative excess returns over the full sample count.
double sortino(const std::vector<double>& returns, double risk_free,
               double periods_per_year);

/// Maximum drawdown as a magnitude in [0, 1): the deepest peak-to-trough
/// loss ratio against the running peak. Monotone-increasing curves score 0.
double mdd(const std::vector<EquityPoint>& curve);

/// Mean over pairs of the time-averaged deployed/available ratio. Pairs
/// without samples are skipped; no pairs at all scores 0.
double capital_utilization(
    const std::vector<std::vector<std::pair<double, double>>>& per_pair);

/// Aggregates a trade log into the quantities the ratio metrics divide.
struct TradeStats {
    std::int64_t closed = 0; ///< closing fills (position-reducing)
    std::int64_t wins = 0;   ///< closing fills with positive realized profit
    double gross_profit = 0.0;
    double gross_loss = 0.0;        ///< magnitude of losing fills' realized sum
    double invested_notional = 0.0; ///< sum of opening-fill notionals
};
TradeStats trade_stats(const std::vector<FillRecord>& fills);

double win_rate(const TradeStats& s);
double profit_factor(const TradeStats& s);
/// Realized profit per unit of capital actually put into positions.
double pnl_per_unit_capital(const TradeStats& s);

/// Cost-efficiency of scheduled bot actions against per-action agent
/// inference: eta = (c_agent * n) / (c_policy + c_optimization + c_bot * n),
/// which approaches c_agent / c_bot as n grows. Units are whatever the
/// caller measured costs in (label them).
struct EfficiencyReport {
    double c_agent = 0.0;
    double c_bot = 0.0;
    double c_policy = 0.0;
    double c_optimization = 0.0;
    std::int64_t n = 0;
    double eta = 0.0;
    std::string unit;
};
EfficiencyReport efficiency_report(double c_agent, double c_bot, double c_policy,
                                   double c_optimization, std::int64_t n,
                                   std::string unit);

} // namespace voltgrid
