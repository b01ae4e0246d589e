#pragma once

#include "voltgrid/candle.hpp"
#include "voltgrid/orders.hpp"
#include "voltgrid/params.hpp"

#include <map>
#include <string>
#include <vector>

namespace voltgrid {

/// Non-order observations the strategy makes while deciding: blocked pairs,
/// deactivations, skipped levels, stale indicators. These flow into the
/// feedback record alongside the trade log.
struct EngineEvent {
    std::string kind; ///< deviation_block | funding_deactivation |
                      ///< stale_indicator | level_skipped
    std::string pair;
    std::int64_t at_ms = 0;
    Fixed magnitude;
    std::string note;
};

/// Working state of the strategy. Everything here is reconstructed from the
/// exchange's authoritative account view plus market data each cycle — the
/// strategy holds no memory a restart could lose.
struct BotState {
    std::map<std::string, PositionView> positions;
    std::vector<OrderView> open_orders;
    std::vector<std::string> qualified;
    std::map<std::string, Fixed> last_phi;
};

/// Rebuilds BotState from the exchange view (recovery path and every-cycle
/// refresh are the same code path).
BotState rebuild_state(const AccountView& view);

struct StepResult {
    BotState state;
    ActionBatch batch;
    std::vector<EngineEvent> events;
};

/// One decision cycle. At execution times (per params.schedule): cancels
/// stale entry orders, re-qualifies pairs, and lays the entry ladder for each
/// qualified pair through the configured strategy template, subject to the
/// price-deviation gate and funding deactivation. On every call: refreshes
/// the exit ladder against current volatility (leaving it untouched when the
/// indicator is unavailable), market-closes small profitable positions, and
/// cancels exit orders whose position is gone.
///
/// Pure function of its arguments; identical inputs produce an identical
/// batch. Throws StaleSnapshotError when snapshot.as_of != clock_ms.
StepResult step(const BotState& state, const MarketSnapshot& snapshot,
                const BotParams& params, std::int64_t clock_ms);

/// Pairs passing both qualification thresholds under these params.
std::vector<std::string> qualify_pairs(const MarketSnapshot& snapshot,
                                       const BotParams& params);

/// Everything a strategy template may consult when laying entries for one
/// qualified pair.
struct PlacementContext {
    const std::string& pair;
    const PairQuote& quote;
    const PairSeries& history;
    Fixed phi;
    Fixed cm;
    Fixed cf;
    const BotParams& params;
    const PositionView* position; ///< nullptr when flat
    std::int64_t cycle_id;
    std::int64_t clock_ms;
};

using PlacementFn = void (*)(const PlacementContext&, ActionBatch&,
                             std::vector<EngineEvent>&);

/// Registered strategy templates: "grid_long" (buy ladder below market),
/// "grid_short" (sell ladder above), "grid_neutral" (half-sized ladders both
/// sides), "trend_follow" (single momentum-gated entry).
const std::map<std::string, PlacementFn>& strategy_registry();

/// Throws LookupError listing the registered names when `name` is unknown.
PlacementFn strategy_registry_lookup(const std::string& name);

/// Deterministic idempotency key for an order action.
std::string make_client_key(std::int64_t cycle_id, const std::string& pair,
                            OrderKind kind, Side side, int level,
                            const char* tag = "");

} // namespace voltgrid
