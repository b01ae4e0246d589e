#pragma once

#include "voltgrid/fixed.hpp"

#include <json.hpp>

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace voltgrid {

enum class Side { buy, sell };
enum class OrderKind { limit, take_profit, stop, market };
enum class ActionKind {
    place_limit,
    place_take_profit,
    place_stop,
    place_market,
    cancel
};

const char* to_string(Side s);
const char* to_string(OrderKind k);
const char* to_string(ActionKind k);
Side side_from_string(const std::string& s);
OrderKind order_kind_from_string(const std::string& s);
ActionKind action_kind_from_string(const std::string& s);

/// One instruction from the strategy to the exchange. `client_key` is the
/// idempotency key: resubmitting an action with a key the exchange has
/// already seen is a no-op, which makes batch replay safe.
struct Action {
    ActionKind kind = ActionKind::place_limit;
    std::string pair;
    Side side = Side::buy;
    Fixed price;               ///< zero for market and cancel actions
    Fixed qty;                 ///< zero for cancel actions
    int level = 0;             ///< ladder index the action belongs to
    bool reduce_only = false;  ///< exit-side orders may only shrink a position
    std::string client_key;
    std::string reason_code;
    std::string cancel_target; ///< client_key of the order being cancelled
};

struct ActionBatch {
    std::int64_t cycle_id = 0;
    std::vector<Action> actions;
};

/// Deterministic batch order: cancels first, then placements sorted by
/// (pair, kind, level, side); ties broken by client key.
void sort_batch(ActionBatch& batch);

nlohmann::ordered_json action_to_json(std::int64_t cycle_id, const Action& a);
Action action_from_json(const nlohmann::json& j);

/// A resting or processed exchange order as the exchange reports it.
struct OrderView {
    std::string order_id;
    std::string client_key;
    std::string pair;
    OrderKind kind = OrderKind::limit;
    Side side = Side::buy;
    Fixed price;
    Fixed qty;
    bool reduce_only = false;
    std::int64_t placed_at = 0;
    int level = 0;
};

/// One open position. `cost` is the signed entry notional basis actually
/// paid (long) or received (short); entry_price = cost / qty.
struct PositionView {
    Side side = Side::buy;
    Fixed qty;
    Fixed cost;
    Fixed entry_price;
};

/// The authoritative account state fetched from the exchange. The strategy
/// reconstructs everything it needs from this view each cycle, so a restart
/// loses nothing.
struct AccountView {
    Fixed cash;
    std::map<std::string, PositionView> positions;
    std::vector<OrderView> open_orders;
};

/// An executed fill, as appended to the trade log. `realized` is the signed
/// profit this fill realized against the position's cost basis (zero for
/// opening fills).
struct FillRecord {
    std::string fill_id;
    std::string order_id;
    std::string pair;
    Side side = Side::buy;
    Fixed price;
    Fixed qty;
    Fixed fee;
    bool maker = false;
    std::int64_t timestamp = 0;
    Fixed realized;
    bool opened = false; ///< true when the fill grew the position
};

nlohmann::ordered_json fill_to_json(const FillRecord& f);
FillRecord fill_from_json(const nlohmann::json& j);

} // namespace voltgrid
