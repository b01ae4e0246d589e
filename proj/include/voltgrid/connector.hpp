#pragma once

#include "voltgrid/exchange.hpp"

#include <cstdint>
#include <map>
#include <memory>
#include <string>

namespace voltgrid {

/// Static per-pair facts the candle stream does not carry.
struct PairRuntimeInfo {
    Fixed funding_rate; ///< constant signed rate per funding interval
    int cap_rank = 1;
};

/// Builds the strategy's market view at time t from candle series: only
/// bars already closed at t are visible (no lookahead), the latest price is
/// the last closed bar's close, and 24h turnover is the rolling volume sum.
MarketSnapshot build_snapshot(
    const std::map<std::string, PairSeries>& series,
    const std::map<std::string, PairRuntimeInfo>& info,
    const std::map<std::string, PairFilters>& filters, std::int64_t t_ms);

/// How a caller should treat transient connectivity faults.
struct RetryPolicy {
    int max_attempts = 3;
    std::int64_t backoff_ms = 250;
    int breaker_threshold = 5; ///< consecutive exhausted retries that trip it
};
void validate_retry_policy(const RetryPolicy& p);

/// The venue surface the trading loop runs against. Every mutation carries
/// an idempotency key inside the action, and recovery uses only
/// fetch_account plus the open-order listing it returns — never local
/// memory. Implementations may throw FaultError from any call.
class Connector {
public:
    virtual ~Connector() = default;
    virtual MarketSnapshot fetch_snapshot(std::int64_t t_ms) = 0;
    virtual SubmitAck submit(const Action& action, std::int64_t t_ms) = 0;
    virtual bool cancel(const std::string& client_key, std::int64_t t_ms) = 0;
    virtual AccountView fetch_account(std::int64_t t_ms) = 0;
    /// Every fill the venue has executed for this account, oldest first.
    virtual const std::vector<FillRecord>& trade_log() const = 0;
};

/// In-process venue: an exchange simulator fed from recorded candle series.
/// The same data driven through this connector must reproduce the backtest
/// path action for action. The simulator outlives any trading-loop restart,
/// standing in for the remote venue surviving a bot crash.
class FixtureConnector : public Connector {
public:
    FixtureConnector(SimConfig sim_config,
                     std::map<std::string, PairSeries> series,
                     std::map<std::string, PairRuntimeInfo> info);

    MarketSnapshot fetch_snapshot(std::int64_t t_ms) override;
    SubmitAck submit(const Action& action, std::int64_t t_ms) override;
    bool cancel(const std::string& client_key, std::int64_t t_ms) override;
    AccountView fetch_account(std::int64_t t_ms) override;
    const std::vector<FillRecord>& trade_log() const override;

    /// Replays market flow through (from_ms, to_ms]: matches every bar that
    /// closes in the window and charges funding on every boundary crossed,
    /// then samples the equity curve at to_ms.
    void advance(std::int64_t from_ms, std::int64_t to_ms);

    ExchangeSim& sim() { return sim_; }
    const std::map<std::string, PairSeries>& series() const { return series_; }
    const std::map<std::string, PairRuntimeInfo>& info() const { return info_; }

private:
    ExchangeSim sim_;
    std::map<std::string, PairSeries> series_;
    std::map<std::string, PairRuntimeInfo> info_;
    std::map<std::string, PairFilters> filters_;
};

} // namespace voltgrid
