#pragma once

#include "voltgrid/candle.hpp"
#include "voltgrid/errors.hpp"
#include "voltgrid/fixed.hpp"
#include "voltgrid/orders.hpp"

#include <cstdint>
#include <deque>
#include <map>
#include <random>
#include <string>
#include <utility>
#include <vector>

namespace voltgrid {

/// Trading fees in basis points of fill notional. Resting (maker) fills are
/// never charged more than aggressive (taker) fills.
struct FeesConfig {
    int maker_bps = 2;
    int taker_bps = 5;
};

/// Price adjustment applied to aggressive fills: a fixed spread in basis
/// points plus an optional size-impact term `impact_k * qty / bar_volume`
/// (disabled when impact_k is zero, the default).
struct SlippageConfig {
    int bps = 5;
    Fixed impact_k;
};

struct FundingConfig {
    int interval_hours = 8;
};

/// Deterministic connectivity-fault schedule. All randomness comes from the
/// named seed, so two runs with equal seeds fail at exactly the same calls.
struct FaultProfile {
    int rate_limit_max = 0; ///< accepted calls per window; 0 disables
    std::int64_t rate_limit_window_ms = 60'000;
    double timeout_probability = 0.0;
    std::vector<std::pair<std::int64_t, std::int64_t>> disconnect_intervals;
    std::uint64_t seed = 0;
};

/// Per-pair exchange filters orders must satisfy at submission.
struct PairFilters {
    Fixed tick = Fixed::from_raw(1);
    Fixed lot = Fixed::from_raw(1);
    Fixed min_notional;
};

struct SimConfig {
    FeesConfig fees;
    SlippageConfig slippage;
    FundingConfig funding;
    FaultProfile faults;
    std::map<std::string, PairFilters> filters;
    Fixed initial_cash = Fixed::from_int(10'000);
};

/// Throws ValidationError when any field is out of range (negative fees,
/// maker above taker, probabilities outside [0, 1], inverted intervals...).
void validate_sim_config(const SimConfig& cfg);

struct SubmitAck {
    std::string order_id;
    bool accepted = false;
    bool duplicate = false;    ///< an order with this client key already exists
    std::string reject_reason; ///< set when accepted == false
};

/// Candle-level exchange emulator. Orders rest on a book and are matched
/// against OHLCV bars one candle at a time; the account ledger tracks cash,
/// cost-basis positions, fees, funding, and realized profit in exact
/// fixed-point arithmetic so the accounting identity
///
///   cash + sum(signed position notional at mark) + fees + funding
///     - initial cash == realized + unrealized profit
///
/// holds to the last digit after every event (`conservation_check`).
///
/// Single-owner state machine: callers must sequence mutating calls
/// externally; const snapshots may be taken concurrently.
class ExchangeSim {
public:
    explicit ExchangeSim(SimConfig cfg);

    /// Places one order (fault-guarded). Market orders fill immediately at
    /// the last traded price adjusted by slippage. Filter violations come
    /// back as a rejected ack, not an exception. Resubmitting an accepted
    /// client key is answered with the original ack (duplicate=true).
    SubmitAck submit(const Action& action, std::int64_t now);

    /// Cancels by client key or order id (fault-guarded). Returns false when
    /// no such order is open.
    bool cancel(const std::string& key, std::int64_t now);

    /// Authoritative account state (fault-guarded: disconnect only).
    AccountView snapshot_account(std::int64_t now) const;

    /// Matches all resting orders against one bar, pessimistically ordered:
    /// stops first, then limits, then take-profits. Returns the fills, which
    /// are also appended to the trade log. The candle must advance the
    /// pair's clock.
    std::vector<FillRecord> match_candle(const std::string& pair, const Candle& c);

    /// Charges funding on every open position: longs pay positive rates on
    /// notional at the last traded price, shorts receive them. `t` must lie
    /// on a funding boundary. Returns the signed cash delta.
    Fixed apply_funding(std::int64_t t, const std::map<std::string, Fixed>& rates);

    /// Appends (t, equity) to the equity curve; t must strictly increase.
    void sample_equity(std::int64_t t);

    /// Cash plus signed position notional at the last traded prices.
    Fixed equity() const;

    /// Throws IntegrityError if the accounting identity is violated.
    void conservation_check() const;

    const std::vector<FillRecord>& fills() const { return fills_; }
    const std::vector<std::pair<std::int64_t, Fixed>>& equity_curve() const {
        return equity_curve_;
    }
    Fixed cash() const { return cash_; }
    Fixed fees_paid() const { return fees_cum_; }
    Fixed funding_paid() const { return funding_cum_; }
    Fixed realized() const { return realized_cum_; }
    Fixed initial_capital() const { return cfg_.initial_cash; }
    Fixed last_price(const std::string& pair) const;
    const std::map<std::string, PairFilters>& filters() const {
        return cfg_.filters;
    }
    const FundingConfig& funding_config() const { return cfg_.funding; }

private:
    struct SimOrder {
        OrderView view;
        bool open = true;
    };

    const PairFilters& filters_for(const std::string& pair) const;
    void guard(std::int64_t now, bool rate_limited) const;
    Fixed taker_price(Side side, Fixed reference, Fixed qty, Fixed volume) const;
    Fixed cap_reduce_only(const SimOrder& o) const;
    void apply_fill(SimOrder& o, Fixed price, Fixed qty, bool maker,
                    std::int64_t ts, std::vector<FillRecord>* out);
    void ledger_fill(const std::string& pair, Side side, Fixed price, Fixed qty,
                     bool maker, const std::string& order_id, std::int64_t ts,
                     std::vector<FillRecord>* out);
    void record_fill(const std::string& pair, Side side, Fixed price, Fixed qty,
                     Fixed fee, bool maker, Fixed realized, bool opened,
                     const std::string& order_id, std::int64_t ts,
                     std::vector<FillRecord>* out);

    SimConfig cfg_;
    Fixed maker_rate_;
    Fixed taker_rate_;
    Fixed slip_rate_;

    Fixed cash_;
    Fixed fees_cum_;
    Fixed funding_cum_;
    Fixed realized_cum_;
    std::map<std::string, PositionView> positions_;
    std::vector<SimOrder> orders_;
    std::map<std::string, std::size_t> by_client_key_;
    std::map<std::string, std::size_t> by_order_id_;
    std::map<std::string, SubmitAck> acked_keys_;
    std::map<std::string, Fixed> last_price_;
    std::map<std::string, Fixed> last_volume_;
    std::map<std::string, std::int64_t> pair_clock_;
    std::vector<FillRecord> fills_;
    std::vector<std::pair<std::int64_t, Fixed>> equity_curve_;
    std::int64_t next_order_id_ = 1;
    std::int64_t next_fill_id_ = 1;

    mutable std::mt19937_64 rng_;
    mutable std::deque<std::int64_t> rate_window_;
};

} // namespace voltgrid
