#include "voltgrid/metrics.hpp"

#include <cmath>
#include <limits>

namespace voltgrid {

namespace {

double mean_of(const std::vector<double>& xs) {
    double acc = 0.0;
    for (double x : xs) acc += x;
    return acc / static_cast<double>(xs.size());
}

} // namespace

double arr(const std::vector<EquityPoint>& curve, double period_days,
           double annualization_days) {
    if (curve.empty()) {
        throw UndefinedMetricError("return of an empty equity curve");
    }
    if (period_days <= 0.0 || annualization_days <= 0.0) {
        throw ValidationError("return periods must be positive");
    }
    const double v_initial = curve.front().second;
    const double v_final = curve.back().second;
    if (v_initial == 0.0) {
        throw UndefinedMetricError("return on zero initial capital");
    }
    const double raw = (v_final - v_initial) / v_initial;
    return raw * (annualization_days / period_days);
}

std::vector<double> returns_from_equity(const std::vector<EquityPoint>& curve) {
    if (curve.size() < 2) {
        throw UndefinedMetricError("returns need at least two equity samples");
    }
    std::vector<double> out;
    out.reserve(curve.size() - 1);
    for (std::size_t i = 1; i < curve.size(); ++i) {
        const double base = curve[i - 1].second;
        if (base <= 0.0) {
            throw UndefinedMetricError("returns over non-positive equity");
        }
        out.push_back(curve[i].second / base - 1.0);
    }
    return out;
}

double sharpe(const std::vector<double>& returns, double risk_free,
              double periods_per_year) {
    if (returns.size() < 2) {
        throw UndefinedMetricError("risk-adjusted return needs two observations");
    }
    std::vector<double> excess;
    excess.reserve(returns.size());
    for (double r : returns) excess.push_back(r - risk_free);
    const double m = mean_of(excess);
    double acc = 0.0;
    for (double e : excess) {
        const double d = e - m;
        acc += d * d;
    }
    const double sd = std::sqrt(acc / static_cast<double>(excess.size()));
    if (sd == 0.0) {
        throw UndefinedMetricError("zero return dispersion");
    }
    return (m / sd) * std::sqrt(periods_per_year);
}

double sortino(const std::vector<double>& returns, double risk_free,
               double periods_per_year) {
    if (returns.size() < 2) {
        throw UndefinedMetricError("risk-adjusted return needs two observations");
    }
    double m_acc = 0.0;
    double d_acc = 0.0;
    bool any_downside = false;
    for (double r : returns) {
        const double ex = r - risk_free;
        m_acc += ex;
        if (ex < 0.0) {
            d_acc += ex * ex;
            any_downside = true;
        }
    }
    if (!any_downside) {
        throw UndefinedMetricError("no downside observations");
    }
    const double m = m_acc / static_cast<double>(returns.size());
    const double dd = std::sqrt(d_acc / static_cast<double>(returns.size()));
    return (m / dd) * std::sqrt(periods_per_year);
}

double mdd(const std::vector<EquityPoint>& curve) {
    if (curve.empty()) {
        throw UndefinedMetricError("drawdown of an empty equity curve");
    }
    double peak = -std::numeric_limits<double>::infinity();
    double worst = 0.0;
    for (const auto& [ts, v] : curve) {
        if (v > peak) peak = v;
        if (peak > 0.0) {
            const double dd = (peak - v) / peak;
            if (dd > worst) worst = dd;
        }
    }
    return worst;
}

double capital_utilization(
    const std::vector<std::vector<std::pair<double, double>>>& per_pair) {
    double acc = 0.0;
    std::size_t pairs = 0;
    for (const auto& samples : per_pair) {
        if (samples.empty()) continue;
        double pair_acc = 0.0;
        for (const auto& [deployed, available] : samples) {
            if (available <= 0.0) {
                throw ValidationError("available capital must be positive");
            }
            pair_acc += deployed / available;
        }
        acc += pair_acc / static_cast<double>(samples.size());
        ++pairs;
    }
    return pairs == 0 ? 0.0 : acc / static_cast<double>(pairs);
}

TradeStats trade_stats(const std::vector<FillRecord>& fills) {
    TradeStats s;
    for (const FillRecord& f : fills) {
        if (f.opened) {
            s.invested_notional += Fixed::mul(f.price, f.qty).to_double();
            continue;
        }
        ++s.closed;
        const double realized = f.realized.to_double();
        if (realized > 0.0) {
            ++s.wins;
            s.gross_profit += realized;
        } else if (realized < 0.0) {
            s.gross_loss += -realized;
        }
    }
    return s;
}

double win_rate(const TradeStats& s) {
    if (s.closed == 0) {
        throw UndefinedMetricError("win rate without closing fills");
    }
    return static_cast<double>(s.wins) / static_cast<double>(s.closed);
}

double profit_factor(const TradeStats& s) {
    if (s.gross_loss == 0.0) {
        throw UndefinedMetricError("profit factor without losses");
    }
    return s.gross_profit / s.gross_loss;
}

double pnl_per_unit_capital(const TradeStats& s) {
    if (s.invested_notional == 0.0) {
        throw UndefinedMetricError("per-capital profit with no capital deployed");
    }
    return (s.gross_profit - s.gross_loss) / s.invested_notional;
}

EfficiencyReport efficiency_report(double c_agent, double c_bot, double c_policy,
                                   double c_optimization, std::int64_t n,
                                   std::string unit) {
    if (c_agent < 0.0 || c_policy < 0.0 || c_optimization < 0.0) {
        throw ValidationError("costs must be non-negative");
    }
    if (c_bot <= 0.0) {
        throw ValidationError("per-action bot cost must be positive");
    }
    if (n < 0) {
        throw ValidationError("action count must be non-negative");
    }
    EfficiencyReport r;
    r.c_agent = c_agent;
    r.c_bot = c_bot;
    r.c_policy = c_policy;
    r.c_optimization = c_optimization;
    r.n = n;
    r.unit = std::move(unit);
    const double denom = c_policy + c_optimization + c_bot * static_cast<double>(n);
    if (denom == 0.0) {
        throw UndefinedMetricError("efficiency with zero total bot-side cost");
    }
    r.eta = (c_agent * static_cast<double>(n)) / denom;
    return r;
}

} // namespace voltgrid
