#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "voltgrid/feedback.hpp"
#include "voltgrid/fixed.hpp"
#include "voltgrid/orders.hpp"

#include "json.hpp"

namespace voltgrid {

/// Raw run logs the report tables are derived from. `pairs` is the
/// configured universe: a pair that never traded still gets a row, with
/// undefined markers where no data exists.
struct ReportInputs {
    Feedback feedback;
    std::vector<FillRecord> fills;
    std::vector<std::pair<std::int64_t, Fixed>> equity;
    std::vector<std::string> pairs;
    Fixed capital_per_pair;
    double annualization_days = 365.0;
};

/// Plot-ready run summary. All text is deterministically formatted:
/// identical inputs produce identical bytes.
struct ReportTables {
    /// One row per pair plus a final ACCOUNT row:
    /// pair,arr_pct,sharpe,mdd_pct,n_p,trades_per_day
    std::string metrics_csv;
    /// pair -> [{t, side, price, qty}, ...] in execution order.
    nlohmann::ordered_json transactions;
    /// timestamp,equity — the sampled account curve.
    std::string equity_csv;
};

/// Builds the per-pair metric table (metrics computed on daily-resampled
/// realized-profit curves per pair), the account summary row (taken from the
/// feedback record), the transaction series, and the equity curve table.
ReportTables build_report(const ReportInputs& in);

} // namespace voltgrid
