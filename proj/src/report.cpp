#include "voltgrid/report.hpp"

#include "voltgrid/errors.hpp"
#include "voltgrid/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <set>

namespace voltgrid {

namespace {

std::string fmt4(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.4f", v);
    return buf;
}

constexpr std::int64_t kDayMs = 86'400'000;

/// Realized-profit equity proxy for one pair, sampled on day boundaries
/// (plus the period end): starting capital plus cumulative realized profit
/// net of fees, stepped at fill times. Derivable from the trade log alone.
std::vector<EquityPoint> daily_realized_curve(
    const std::vector<const FillRecord*>& fills, Fixed capital,
    std::int64_t period_start, std::int64_t period_end) {
    std::vector<std::int64_t> grid;
    for (std::int64_t t = period_start; t <= period_end; t += kDayMs) {
        grid.push_back(t);
    }
    if (grid.back() != period_end) grid.push_back(period_end);

    std::vector<EquityPoint> curve;
    curve.reserve(grid.size());
    Fixed value = capital;
    std::size_t next = 0;
    for (std::int64_t t : grid) {
        while (next < fills.size() && fills[next]->timestamp <= t) {
            value += fills[next]->realized - fills[next]->fee;
            ++next;
        }
        curve.emplace_back(t, value.to_double());
    }
    return curve;
}

std::string metric_cell(const MetricValue& m, double scale) {
    return m.defined ? fmt4(m.value * scale) : "n/a";
}

} // namespace

ReportTables build_report(const ReportInputs& in) {
    if (in.feedback.period_end < in.feedback.period_start) {
        throw ValidationError("report period is inverted");
    }
    const double period_days =
        static_cast<double>(in.feedback.period_end - in.feedback.period_start) /
        static_cast<double>(kDayMs);

    // Deterministic row order: configured pairs first, then any traded pair
    // the configuration did not list, all sorted.
    std::set<std::string> row_pairs(in.pairs.begin(), in.pairs.end());
    for (const FillRecord& f : in.fills) row_pairs.insert(f.pair);

    std::map<std::string, std::vector<const FillRecord*>> by_pair;
    for (const FillRecord& f : in.fills) by_pair[f.pair].push_back(&f);

    ReportTables out;
    out.metrics_csv = "pair,arr_pct,sharpe,mdd_pct,n_p,trades_per_day\n";
    out.transactions = nlohmann::ordered_json::object();

    for (const std::string& pair : row_pairs) {
        auto it = by_pair.find(pair);
        const bool traded = it != by_pair.end() && !it->second.empty();

        std::string arr_cell = "n/a";
        std::string sharpe_cell = "n/a";
        std::string mdd_cell = "n/a";
        std::int64_t n_p = 0;
        std::string freq_cell = "n/a";

        if (traded && period_days > 0.0) {
            std::vector<const FillRecord*> fills = it->second;
            std::stable_sort(fills.begin(), fills.end(),
                             [](const FillRecord* a, const FillRecord* b) {
                                 return a->timestamp < b->timestamp;
                             });
            auto curve =
                daily_realized_curve(fills, in.capital_per_pair,
                                     in.feedback.period_start,
                                     in.feedback.period_end);
            try {
                arr_cell =
                    fmt4(arr(curve, period_days, in.annualization_days) * 100.0);
            } catch (const UndefinedMetricError&) {
            }
            try {
                sharpe_cell = fmt4(sharpe(returns_from_equity(curve), 0.0,
                                          in.annualization_days));
            } catch (const UndefinedMetricError&) {
            }
            try {
                mdd_cell = fmt4(mdd(curve) * 100.0);
            } catch (const UndefinedMetricError&) {
            }
            for (const FillRecord* f : fills) {
                if (!f->opened) ++n_p;
            }
            freq_cell =
                fmt4(static_cast<double>(fills.size()) / period_days);
        } else if (traded) {
            for (const FillRecord* f : it->second) {
                if (!f->opened) ++n_p;
            }
        } else if (period_days > 0.0) {
            freq_cell = fmt4(0.0); // a quiet pair traded zero times — defined
        }

        out.metrics_csv += pair + "," + arr_cell + "," + sharpe_cell + "," +
                           mdd_cell + "," + std::to_string(n_p) + "," +
                           freq_cell + "\n";

        if (traded) {
            nlohmann::ordered_json arr_json = nlohmann::ordered_json::array();
            for (const FillRecord* f : it->second) {
                arr_json.push_back({{"t", f->timestamp},
                                    {"side", to_string(f->side)},
                                    {"price", f->price.str()},
                                    {"qty", f->qty.str()}});
            }
            out.transactions[pair] = std::move(arr_json);
        }
    }

    std::int64_t closed_total = 0;
    for (const FillRecord& f : in.fills) {
        if (!f.opened) ++closed_total;
    }
    std::string account_freq = "n/a";
    if (period_days > 0.0) {
        account_freq =
            fmt4(static_cast<double>(in.fills.size()) / period_days);
    }
    out.metrics_csv += "ACCOUNT," + metric_cell(in.feedback.arr, 100.0) + "," +
                       metric_cell(in.feedback.sharpe, 1.0) + "," +
                       metric_cell(in.feedback.mdd, 100.0) + "," +
                       std::to_string(closed_total) + "," + account_freq + "\n";

    out.equity_csv = "timestamp,equity\n";
    for (const auto& [t, v] : in.equity) {
        out.equity_csv += std::to_string(t) + "," + v.str() + "\n";
    }
    return out;
}

} // namespace voltgrid
