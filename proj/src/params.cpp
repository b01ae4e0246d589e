#include "voltgrid/params.hpp"

#include "voltgrid/errors.hpp"

#include <set>

namespace voltgrid {

void validate_params(const BotParams& p) {
    auto fail = [](const std::string& why) { throw ValidationError("params: " + why); };
    if (p.schedule.period_s <= 0 || p.schedule.width_s <= 0) {
        fail("schedule period and width must be positive");
    }
    if (p.tau_s < 0) fail("tau_s must be non-negative");
    if (p.v_req.is_negative() || p.phi_req.is_negative()) {
        fail("qualification thresholds must be non-negative");
    }
    if (!(p.capital_per_pair > Fixed())) fail("capital_per_pair must be positive");
    if (p.entry_exponents.empty()) fail("entry ladder needs at least one level");
    if (p.entry_exponents.size() != p.entry_fractions.size()) {
        fail("entry_exponents and entry_fractions must have equal length");
    }
    for (std::size_t i = 0; i < p.entry_exponents.size(); ++i) {
        if (!(p.entry_exponents[i] > Fixed())) fail("entry exponents must be positive");
        if (i > 0 && !(p.entry_exponents[i] > p.entry_exponents[i - 1])) {
            fail("entry exponents must be strictly increasing");
        }
        if (!(p.entry_fractions[i] > Fixed()) ||
            p.entry_fractions[i] > Fixed::from_int(1)) {
            fail("entry fractions must lie in (0, 1]");
        }
    }
    if (p.exit_exponents.empty()) fail("exit ladder needs at least one level");
    for (std::size_t i = 0; i < p.exit_exponents.size(); ++i) {
        if (!(p.exit_exponents[i] > Fixed())) fail("exit exponents must be positive");
        if (i > 0 && !(p.exit_exponents[i] > p.exit_exponents[i - 1])) {
            fail("exit exponents must be strictly increasing");
        }
    }
    if (!p.partial_close_fractions.empty()) {
        if (p.partial_close_fractions.size() != p.exit_exponents.size()) {
            fail("partial_close_fractions must match the exit ladder length");
        }
        Fixed sum;
        for (Fixed f : p.partial_close_fractions) {
            if (!(f > Fixed())) fail("partial close fractions must be positive");
            sum += f;
        }
        if (sum > Fixed::from_int(1)) fail("partial close fractions must sum to <= 1");
    }
    if (p.cap_weights.quartile_weights.empty()) fail("cap-rank weights missing");
    if (p.cap_weights.universe_size <= 0) fail("cap-rank universe must be positive");
    if (p.cap_weights.floor > p.cap_weights.cap) fail("cap-rank floor above cap");
    if (p.funding_decay.low_threshold.is_negative() ||
        !(p.funding_decay.high_threshold > p.funding_decay.low_threshold)) {
        fail("funding decay thresholds must satisfy 0 <= low < high");
    }
    if (p.entry_scaling_exponent.is_negative()) {
        fail("entry_scaling_exponent must be non-negative");
    }
    if (!(p.sweep_divisor > Fixed())) fail("sweep_divisor must be positive");
    if (p.deviation_tolerance.is_negative()) {
        fail("deviation_tolerance must be non-negative");
    }
}

namespace {

nlohmann::ordered_json fixed_list(const std::vector<Fixed>& v) {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (Fixed f : v) arr.push_back(f.str());
    return arr;
}

std::vector<Fixed> fixed_list_from(const nlohmann::json& arr, const char* key) {
    if (!arr.is_array()) throw ConfigError(std::string(key) + " must be an array");
    std::vector<Fixed> out;
    for (const auto& e : arr) {
        if (!e.is_string()) throw ConfigError(std::string(key) + " entries must be decimal strings");
        out.push_back(Fixed::parse(e.get<std::string>()));
    }
    return out;
}

Fixed fixed_from(const nlohmann::json& v, const char* key) {
    if (v.is_string()) return Fixed::parse(v.get<std::string>());
    if (v.is_number_integer()) return Fixed::from_int(v.get<std::int64_t>());
    throw ConfigError(std::string(key) + " must be a decimal string");
}

void reject_unknown(const nlohmann::json& obj, const std::set<std::string>& known,
                    const char* where) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        if (!known.count(it.key())) {
            throw ConfigError(std::string("unknown key '") + it.key() + "' in " + where);
        }
    }
}

} // namespace

nlohmann::ordered_json params_to_json(const BotParams& p) {
    nlohmann::ordered_json j;
    j["schedule"] = {{"anchor_ms", p.schedule.anchor_ms},
                     {"period_s", p.schedule.period_s},
                     {"width_s", p.schedule.width_s}};
    j["tau_s"] = p.tau_s;
    j["v_req"] = p.v_req.str();
    j["phi_req"] = p.phi_req.str();
    j["capital_per_pair"] = p.capital_per_pair.str();
    j["entry_exponents"] = fixed_list(p.entry_exponents);
    j["entry_fractions"] = fixed_list(p.entry_fractions);
    j["exit_exponents"] = fixed_list(p.exit_exponents);
    j["cap_weights"] = {{"quartile_weights", fixed_list(p.cap_weights.quartile_weights)},
                        {"universe_size", p.cap_weights.universe_size},
                        {"floor", p.cap_weights.floor.str()},
                        {"cap", p.cap_weights.cap.str()}};
    j["funding_decay"] = {{"low_threshold", p.funding_decay.low_threshold.str()},
                          {"high_threshold", p.funding_decay.high_threshold.str()}};
    j["entry_scaling_exponent"] = p.entry_scaling_exponent.str();
    j["sweep_divisor"] = p.sweep_divisor.str();
    j["deviation_tolerance"] = p.deviation_tolerance.str();
    j["partial_close_fractions"] = fixed_list(p.partial_close_fractions);
    j["volatility_indicator"] = p.volatility_indicator;
    j["strategy_template"] = p.strategy_template;
    return j;
}

BotParams params_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ConfigError("params must be a JSON object");
    reject_unknown(j,
                   {"schedule", "tau_s", "v_req", "phi_req", "capital_per_pair",
                    "entry_exponents", "entry_fractions", "exit_exponents",
                    "cap_weights", "funding_decay", "entry_scaling_exponent",
                    "sweep_divisor", "deviation_tolerance",
                    "partial_close_fractions", "volatility_indicator",
                    "strategy_template"},
                   "params");
    BotParams p;
    if (j.contains("schedule")) {
        const auto& s = j["schedule"];
        reject_unknown(s, {"anchor_ms", "period_s", "width_s"}, "params.schedule");
        if (s.contains("anchor_ms")) p.schedule.anchor_ms = s["anchor_ms"].get<std::int64_t>();
        if (s.contains("period_s")) p.schedule.period_s = s["period_s"].get<std::int64_t>();
        if (s.contains("width_s")) p.schedule.width_s = s["width_s"].get<std::int64_t>();
    }
    if (j.contains("tau_s")) p.tau_s = j["tau_s"].get<std::int64_t>();
    if (j.contains("v_req")) p.v_req = fixed_from(j["v_req"], "v_req");
    if (j.contains("phi_req")) p.phi_req = fixed_from(j["phi_req"], "phi_req");
    if (j.contains("capital_per_pair")) {
        p.capital_per_pair = fixed_from(j["capital_per_pair"], "capital_per_pair");
    }
    if (j.contains("entry_exponents")) {
        p.entry_exponents = fixed_list_from(j["entry_exponents"], "entry_exponents");
    }
    if (j.contains("entry_fractions")) {
        p.entry_fractions = fixed_list_from(j["entry_fractions"], "entry_fractions");
    }
    if (j.contains("exit_exponents")) {
        p.exit_exponents = fixed_list_from(j["exit_exponents"], "exit_exponents");
    }
    if (j.contains("cap_weights")) {
        const auto& c = j["cap_weights"];
        reject_unknown(c, {"quartile_weights", "universe_size", "floor", "cap"},
                       "params.cap_weights");
        if (c.contains("quartile_weights")) {
            p.cap_weights.quartile_weights =
                fixed_list_from(c["quartile_weights"], "quartile_weights");
        }
        if (c.contains("universe_size")) {
            p.cap_weights.universe_size = c["universe_size"].get<int>();
        }
        if (c.contains("floor")) p.cap_weights.floor = fixed_from(c["floor"], "floor");
        if (c.contains("cap")) p.cap_weights.cap = fixed_from(c["cap"], "cap");
    }
    if (j.contains("funding_decay")) {
        const auto& f = j["funding_decay"];
        reject_unknown(f, {"low_threshold", "high_threshold"}, "params.funding_decay");
        if (f.contains("low_threshold")) {
            p.funding_decay.low_threshold = fixed_from(f["low_threshold"], "low_threshold");
        }
        if (f.contains("high_threshold")) {
            p.funding_decay.high_threshold = fixed_from(f["high_threshold"], "high_threshold");
        }
    }
    if (j.contains("entry_scaling_exponent")) {
        p.entry_scaling_exponent =
            fixed_from(j["entry_scaling_exponent"], "entry_scaling_exponent");
    }
    if (j.contains("sweep_divisor")) {
        p.sweep_divisor = fixed_from(j["sweep_divisor"], "sweep_divisor");
    }
    if (j.contains("deviation_tolerance")) {
        p.deviation_tolerance = fixed_from(j["deviation_tolerance"], "deviation_tolerance");
    }
    if (j.contains("partial_close_fractions")) {
        p.partial_close_fractions =
            fixed_list_from(j["partial_close_fractions"], "partial_close_fractions");
    }
    if (j.contains("volatility_indicator")) {
        p.volatility_indicator = j["volatility_indicator"].get<std::string>();
    }
    if (j.contains("strategy_template")) {
        p.strategy_template = j["strategy_template"].get<std::string>();
    }
    validate_params(p);
    return p;
}

} // namespace voltgrid
