#include "voltgrid/orders.hpp"

#include "voltgrid/errors.hpp"

#include <algorithm>
#include <tuple>

namespace voltgrid {

const char* to_string(Side s) { return s == Side::buy ? "buy" : "sell"; }

const char* to_string(OrderKind k) {
    switch (k) {
    case OrderKind::limit: return "limit";
    case OrderKind::take_profit: return "take_profit";
    case OrderKind::stop: return "stop";
    case OrderKind::market: return "market";
    }
    return "?";
}

const char* to_string(ActionKind k) {
    switch (k) {
    case ActionKind::place_limit: return "place_limit";
    case ActionKind::place_take_profit: return "place_take_profit";
    case ActionKind::place_stop: return "place_stop";
    case ActionKind::place_market: return "place_market";
    case ActionKind::cancel: return "cancel";
    }
    return "?";
}

Side side_from_string(const std::string& s) {
    if (s == "buy") return Side::buy;
    if (s == "sell") return Side::sell;
    throw ValidationError("unknown side '" + s + "'");
}

OrderKind order_kind_from_string(const std::string& s) {
    for (OrderKind k : {OrderKind::limit, OrderKind::take_profit, OrderKind::stop,
                        OrderKind::market}) {
        if (s == to_string(k)) return k;
    }
    throw ValidationError("unknown order kind '" + s + "'");
}

ActionKind action_kind_from_string(const std::string& s) {
    for (ActionKind k : {ActionKind::place_limit, ActionKind::place_take_profit,
                         ActionKind::place_stop, ActionKind::place_market,
                         ActionKind::cancel}) {
        if (s == to_string(k)) return k;
    }
    throw ValidationError("unknown action kind '" + s + "'");
}

void sort_batch(ActionBatch& batch) {
    auto key = [](const Action& a) {
        return std::make_tuple(a.kind == ActionKind::cancel ? 0 : 1, a.pair,
                               static_cast<int>(a.kind), a.level,
                               static_cast<int>(a.side), a.client_key);
    };
    std::stable_sort(batch.actions.begin(), batch.actions.end(),
                     [&](const Action& x, const Action& y) { return key(x) < key(y); });
}

nlohmann::ordered_json action_to_json(std::int64_t cycle_id, const Action& a) {
    nlohmann::ordered_json j;
    j["cycle_id"] = cycle_id;
    j["pair"] = a.pair;
    j["action_kind"] = to_string(a.kind);
    j["price"] = a.price.str();
    j["qty"] = a.qty.str();
    j["reason_code"] = a.reason_code;
    j["side"] = to_string(a.side);
    j["level"] = a.level;
    j["reduce_only"] = a.reduce_only;
    j["client_key"] = a.client_key;
    j["cancel_target"] = a.cancel_target;
    return j;
}

Action action_from_json(const nlohmann::json& j) {
    Action a;
    a.pair = j.at("pair").get<std::string>();
    a.kind = action_kind_from_string(j.at("action_kind").get<std::string>());
    a.price = Fixed::parse(j.at("price").get<std::string>());
    a.qty = Fixed::parse(j.at("qty").get<std::string>());
    a.reason_code = j.at("reason_code").get<std::string>();
    a.side = side_from_string(j.at("side").get<std::string>());
    a.level = j.at("level").get<int>();
    a.reduce_only = j.at("reduce_only").get<bool>();
    a.client_key = j.at("client_key").get<std::string>();
    a.cancel_target = j.at("cancel_target").get<std::string>();
    return a;
}

nlohmann::ordered_json fill_to_json(const FillRecord& f) {
    nlohmann::ordered_json j;
    j["fill_id"] = f.fill_id;
    j["order_id"] = f.order_id;
    j["pair"] = f.pair;
    j["side"] = to_string(f.side);
    j["price"] = f.price.str();
    j["qty"] = f.qty.str();
    j["fee"] = f.fee.str();
    j["liquidity_flag"] = f.maker ? "maker" : "taker";
    j["timestamp"] = f.timestamp;
    j["realized"] = f.realized.str();
    j["opened"] = f.opened;
    return j;
}

FillRecord fill_from_json(const nlohmann::json& j) {
    FillRecord f;
    f.fill_id = j.at("fill_id").get<std::string>();
    f.order_id = j.at("order_id").get<std::string>();
    f.pair = j.at("pair").get<std::string>();
    f.side = side_from_string(j.at("side").get<std::string>());
    f.price = Fixed::parse(j.at("price").get<std::string>());
    f.qty = Fixed::parse(j.at("qty").get<std::string>());
    f.fee = Fixed::parse(j.at("fee").get<std::string>());
    f.maker = j.at("liquidity_flag").get<std::string>() == "maker";
    f.timestamp = j.at("timestamp").get<std::int64_t>();
    f.realized = Fixed::parse(j.at("realized").get<std::string>());
    f.opened = j.at("opened").get<bool>();
    return f;
}

} // namespace voltgrid
