#include "voltgrid/config.hpp"

#include "voltgrid/errors.hpp"
#include "voltgrid/ingest.hpp"

#include <fstream>
#include <set>

namespace voltgrid {

namespace {

void reject_unknown(const nlohmann::json& obj,
                    const std::set<std::string>& known, const char* where) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        if (!known.count(it.key())) {
            throw ConfigError(std::string("unknown key '") + it.key() + "' in " +
                              where);
        }
    }
}

const nlohmann::json& object_at(const nlohmann::json& j, const char* key) {
    const nlohmann::json& v = j.at(key);
    if (!v.is_object()) {
        throw ConfigError(std::string(key) + " must be a JSON object");
    }
    return v;
}

Fixed fixed_from(const nlohmann::json& v, const char* key) {
    if (v.is_string()) return Fixed::parse(v.get<std::string>());
    if (v.is_number_integer()) return Fixed::from_int(v.get<std::int64_t>());
    throw ConfigError(std::string(key) + " must be a decimal string");
}

std::int64_t int64_from(const nlohmann::json& v, const char* key) {
    if (!v.is_number_integer()) {
        throw ConfigError(std::string(key) + " must be an integer");
    }
    return v.get<std::int64_t>();
}

double double_from(const nlohmann::json& v, const char* key) {
    if (!v.is_number()) {
        throw ConfigError(std::string(key) + " must be a number");
    }
    return v.get<double>();
}

std::string string_from(const nlohmann::json& v, const char* key) {
    if (!v.is_string()) {
        throw ConfigError(std::string(key) + " must be a string");
    }
    return v.get<std::string>();
}

void parse_sim(const nlohmann::json& j, SimConfig& sim) {
    reject_unknown(j,
                   {"fees", "slippage", "funding", "faults", "filters",
                    "initial_cash"},
                   "sim");
    if (j.contains("fees")) {
        const auto& f = object_at(j, "fees");
        reject_unknown(f, {"maker_bps", "taker_bps"}, "sim.fees");
        if (f.contains("maker_bps")) {
            sim.fees.maker_bps = static_cast<int>(int64_from(f["maker_bps"], "maker_bps"));
        }
        if (f.contains("taker_bps")) {
            sim.fees.taker_bps = static_cast<int>(int64_from(f["taker_bps"], "taker_bps"));
        }
    }
    if (j.contains("slippage")) {
        const auto& s = object_at(j, "slippage");
        reject_unknown(s, {"bps", "impact_k"}, "sim.slippage");
        if (s.contains("bps")) {
            sim.slippage.bps = static_cast<int>(int64_from(s["bps"], "bps"));
        }
        if (s.contains("impact_k")) {
            sim.slippage.impact_k = fixed_from(s["impact_k"], "impact_k");
        }
    }
    if (j.contains("funding")) {
        const auto& f = object_at(j, "funding");
        reject_unknown(f, {"interval_hours"}, "sim.funding");
        if (f.contains("interval_hours")) {
            sim.funding.interval_hours =
                static_cast<int>(int64_from(f["interval_hours"], "interval_hours"));
        }
    }
    if (j.contains("faults")) {
        const auto& f = object_at(j, "faults");
        reject_unknown(f,
                       {"rate_limit_max", "rate_limit_window_ms",
                        "timeout_probability", "disconnect_intervals", "seed"},
                       "sim.faults");
        if (f.contains("rate_limit_max")) {
            sim.faults.rate_limit_max =
                static_cast<int>(int64_from(f["rate_limit_max"], "rate_limit_max"));
        }
        if (f.contains("rate_limit_window_ms")) {
            sim.faults.rate_limit_window_ms =
                int64_from(f["rate_limit_window_ms"], "rate_limit_window_ms");
        }
        if (f.contains("timeout_probability")) {
            sim.faults.timeout_probability =
                double_from(f["timeout_probability"], "timeout_probability");
        }
        if (f.contains("disconnect_intervals")) {
            const auto& arr = f["disconnect_intervals"];
            if (!arr.is_array()) {
                throw ConfigError("disconnect_intervals must be an array");
            }
            for (const auto& e : arr) {
                if (!e.is_array() || e.size() != 2) {
                    throw ConfigError(
                        "disconnect_intervals entries must be [from_ms, to_ms]");
                }
                sim.faults.disconnect_intervals.emplace_back(
                    int64_from(e[0], "disconnect from_ms"),
                    int64_from(e[1], "disconnect to_ms"));
            }
        }
        if (f.contains("seed")) {
            sim.faults.seed =
                static_cast<std::uint64_t>(int64_from(f["seed"], "faults.seed"));
        }
    }
    if (j.contains("filters")) {
        const auto& filters = object_at(j, "filters");
        for (auto it = filters.begin(); it != filters.end(); ++it) {
            const auto& fj = it.value();
            if (!fj.is_object()) {
                throw ConfigError("filters entries must be objects");
            }
            reject_unknown(fj, {"tick", "lot", "min_notional"}, "sim.filters");
            PairFilters pf;
            if (fj.contains("tick")) pf.tick = fixed_from(fj["tick"], "tick");
            if (fj.contains("lot")) pf.lot = fixed_from(fj["lot"], "lot");
            if (fj.contains("min_notional")) {
                pf.min_notional = fixed_from(fj["min_notional"], "min_notional");
            }
            sim.filters[it.key()] = pf;
        }
    }
    if (j.contains("initial_cash")) {
        sim.initial_cash = fixed_from(j["initial_cash"], "initial_cash");
    }
}

void parse_detector(const nlohmann::json& j, DetectorConfig& d) {
    reject_unknown(
        j, {"dd_trigger", "dd_window_ms", "dd_min_entry_fills", "capture_ratio"},
        "detector");
    if (j.contains("dd_trigger")) {
        d.dd_trigger = double_from(j["dd_trigger"], "dd_trigger");
    }
    if (j.contains("dd_window_ms")) {
        d.dd_window_ms = int64_from(j["dd_window_ms"], "dd_window_ms");
    }
    if (j.contains("dd_min_entry_fills")) {
        d.dd_min_entry_fills = static_cast<int>(
            int64_from(j["dd_min_entry_fills"], "dd_min_entry_fills"));
    }
    if (j.contains("capture_ratio")) {
        d.capture_ratio = double_from(j["capture_ratio"], "capture_ratio");
    }
}

void parse_objective(const nlohmann::json& j, ObjectiveSpec& o) {
    reject_unknown(j, {"weights", "seeds"}, "objective");
    if (j.contains("weights")) {
        const auto& w = object_at(j, "weights");
        o.terms.clear();
        for (auto it = w.begin(); it != w.end(); ++it) {
            o.terms.push_back({it.key(), double_from(it.value(), "weight")});
        }
    }
    if (j.contains("seeds")) {
        const auto& s = j["seeds"];
        if (!s.is_array()) throw ConfigError("objective.seeds must be an array");
        o.seeds.clear();
        for (const auto& e : s) {
            o.seeds.push_back(
                static_cast<std::uint64_t>(int64_from(e, "objective seed")));
        }
    }
}

} // namespace

double RunConfig::annualization_days() const {
    if (market_profile == "crypto") return 365.0;
    if (market_profile == "index_futures") return 252.0;
    throw ConfigError("unknown market profile: " + market_profile);
}

RunConfig run_config_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ConfigError("run config must be a JSON object");
    reject_unknown(j,
                   {"market_profile", "start_ms", "end_ms", "cycle_ms",
                    "out_dir", "data", "pair_info", "params", "sim", "detector",
                    "objective", "budget", "optimizer", "retry"},
                   "run config");
    RunConfig cfg;
    cfg.objective.terms = {{"return", 0.7}, {"neg_mdd", 0.3}};

    if (j.contains("market_profile")) {
        cfg.market_profile = string_from(j["market_profile"], "market_profile");
        if (cfg.market_profile != "crypto" &&
            cfg.market_profile != "index_futures") {
            throw ConfigError("unknown market profile: " + cfg.market_profile);
        }
    }
    if (j.contains("start_ms")) cfg.start_ms = int64_from(j["start_ms"], "start_ms");
    if (j.contains("end_ms")) cfg.end_ms = int64_from(j["end_ms"], "end_ms");
    if (j.contains("cycle_ms")) cfg.cycle_ms = int64_from(j["cycle_ms"], "cycle_ms");
    if (j.contains("out_dir")) cfg.out_dir = string_from(j["out_dir"], "out_dir");

    if (j.contains("data")) {
        const auto& arr = j["data"];
        if (!arr.is_array()) throw ConfigError("data must be an array");
        for (const auto& e : arr) {
            if (!e.is_object()) throw ConfigError("data entries must be objects");
            reject_unknown(e, {"pair", "path", "interval_s"}, "data entry");
            DataSourceSpec d;
            d.pair = string_from(e.at("pair"), "data.pair");
            d.path = string_from(e.at("path"), "data.path");
            if (e.contains("interval_s")) {
                d.interval_s = int64_from(e["interval_s"], "data.interval_s");
            }
            if (d.pair.empty()) throw ConfigError("data.pair cannot be empty");
            if (d.path.empty()) throw ConfigError("data.path cannot be empty");
            cfg.data.push_back(std::move(d));
        }
        std::set<std::string> seen;
        for (const auto& d : cfg.data) {
            if (!seen.insert(d.pair).second) {
                throw ConfigError("duplicate data entry for pair " + d.pair);
            }
        }
    }

    if (j.contains("pair_info")) {
        const auto& info = object_at(j, "pair_info");
        for (auto it = info.begin(); it != info.end(); ++it) {
            const auto& pj = it.value();
            if (!pj.is_object()) {
                throw ConfigError("pair_info entries must be objects");
            }
            reject_unknown(pj, {"funding_rate", "cap_rank"}, "pair_info");
            PairRuntimeInfo inf;
            if (pj.contains("funding_rate")) {
                inf.funding_rate = fixed_from(pj["funding_rate"], "funding_rate");
            }
            if (pj.contains("cap_rank")) {
                inf.cap_rank =
                    static_cast<int>(int64_from(pj["cap_rank"], "cap_rank"));
            }
            cfg.pair_info[it.key()] = inf;
        }
    }

    if (j.contains("params")) cfg.params = params_from_json(j["params"]);
    if (j.contains("sim")) parse_sim(object_at(j, "sim"), cfg.sim);
    if (j.contains("detector")) {
        parse_detector(object_at(j, "detector"), cfg.detector);
    }
    if (j.contains("objective")) {
        parse_objective(object_at(j, "objective"), cfg.objective);
    }
    if (j.contains("budget")) {
        const auto& b = object_at(j, "budget");
        reject_unknown(b, {"global_capital", "n_parallel", "safety_factor"},
                       "budget");
        if (b.contains("global_capital")) {
            cfg.budget.global_capital =
                fixed_from(b["global_capital"], "global_capital");
        }
        if (b.contains("n_parallel")) {
            cfg.budget.n_parallel =
                static_cast<int>(int64_from(b["n_parallel"], "n_parallel"));
        }
        if (b.contains("safety_factor")) {
            cfg.budget.safety_factor =
                fixed_from(b["safety_factor"], "safety_factor");
        }
    }
    if (j.contains("optimizer")) {
        const auto& o = object_at(j, "optimizer");
        reject_unknown(o, {"seed", "budget", "max_cycles"}, "optimizer");
        if (o.contains("seed")) {
            cfg.optimizer.seed =
                static_cast<std::uint64_t>(int64_from(o["seed"], "optimizer.seed"));
        }
        if (o.contains("budget")) {
            cfg.optimizer.budget =
                static_cast<int>(int64_from(o["budget"], "optimizer.budget"));
        }
        if (o.contains("max_cycles")) {
            cfg.optimizer.max_cycles =
                static_cast<int>(int64_from(o["max_cycles"], "max_cycles"));
        }
    }
    if (j.contains("retry")) {
        const auto& r = object_at(j, "retry");
        reject_unknown(r, {"max_attempts", "backoff_ms", "breaker_threshold"},
                       "retry");
        if (r.contains("max_attempts")) {
            cfg.retry.max_attempts =
                static_cast<int>(int64_from(r["max_attempts"], "max_attempts"));
        }
        if (r.contains("backoff_ms")) {
            cfg.retry.backoff_ms = int64_from(r["backoff_ms"], "backoff_ms");
        }
        if (r.contains("breaker_threshold")) {
            cfg.retry.breaker_threshold = static_cast<int>(
                int64_from(r["breaker_threshold"], "breaker_threshold"));
        }
    }

    // Cross-field validation, delegated to each module's own validator.
    cfg.annualization_days();
    validate_params(cfg.params);
    validate_sim_config(cfg.sim);
    validate_detector_config(cfg.detector);
    normalize_objective(cfg.objective);
    validate_risk_budget(cfg.budget);
    validate_retry_policy(cfg.retry);
    if (cfg.cycle_ms < 1) throw ConfigError("cycle_ms must be positive");
    if (cfg.end_ms < cfg.start_ms) throw ConfigError("run window is inverted");
    if (cfg.optimizer.budget < 1) {
        throw ConfigError("optimizer.budget must be positive");
    }
    if (cfg.optimizer.max_cycles < 1) {
        throw ConfigError("optimizer.max_cycles must be positive");
    }
    if (cfg.out_dir.empty()) throw ConfigError("out_dir cannot be empty");
    return cfg;
}

nlohmann::ordered_json run_config_to_json(const RunConfig& cfg) {
    nlohmann::ordered_json j;
    j["market_profile"] = cfg.market_profile;
    j["start_ms"] = cfg.start_ms;
    j["end_ms"] = cfg.end_ms;
    j["cycle_ms"] = cfg.cycle_ms;
    j["out_dir"] = cfg.out_dir;
    j["data"] = nlohmann::ordered_json::array();
    for (const auto& d : cfg.data) {
        j["data"].push_back({{"pair", d.pair},
                             {"path", d.path},
                             {"interval_s", d.interval_s}});
    }
    j["pair_info"] = nlohmann::ordered_json::object();
    for (const auto& [pair, inf] : cfg.pair_info) {
        j["pair_info"][pair] = {{"funding_rate", inf.funding_rate.str()},
                                {"cap_rank", inf.cap_rank}};
    }
    j["params"] = params_to_json(cfg.params);
    j["sim"] = {
        {"fees",
         {{"maker_bps", cfg.sim.fees.maker_bps},
          {"taker_bps", cfg.sim.fees.taker_bps}}},
        {"slippage",
         {{"bps", cfg.sim.slippage.bps},
          {"impact_k", cfg.sim.slippage.impact_k.str()}}},
        {"funding", {{"interval_hours", cfg.sim.funding.interval_hours}}},
        {"faults",
         {{"rate_limit_max", cfg.sim.faults.rate_limit_max},
          {"rate_limit_window_ms", cfg.sim.faults.rate_limit_window_ms},
          {"timeout_probability", cfg.sim.faults.timeout_probability},
          {"disconnect_intervals", cfg.sim.faults.disconnect_intervals},
          {"seed", cfg.sim.faults.seed}}},
        {"initial_cash", cfg.sim.initial_cash.str()}};
    j["sim"]["filters"] = nlohmann::ordered_json::object();
    for (const auto& [pair, f] : cfg.sim.filters) {
        j["sim"]["filters"][pair] = {{"tick", f.tick.str()},
                                     {"lot", f.lot.str()},
                                     {"min_notional", f.min_notional.str()}};
    }
    j["detector"] = {{"dd_trigger", cfg.detector.dd_trigger},
                     {"dd_window_ms", cfg.detector.dd_window_ms},
                     {"dd_min_entry_fills", cfg.detector.dd_min_entry_fills},
                     {"capture_ratio", cfg.detector.capture_ratio}};
    j["objective"] = nlohmann::ordered_json::object();
    j["objective"]["weights"] = nlohmann::ordered_json::object();
    for (const auto& t : cfg.objective.terms) {
        j["objective"]["weights"][t.metric] = t.weight;
    }
    j["objective"]["seeds"] = cfg.objective.seeds;
    j["budget"] = {{"global_capital", cfg.budget.global_capital.str()},
                   {"n_parallel", cfg.budget.n_parallel},
                   {"safety_factor", cfg.budget.safety_factor.str()}};
    j["optimizer"] = {{"seed", cfg.optimizer.seed},
                      {"budget", cfg.optimizer.budget},
                      {"max_cycles", cfg.optimizer.max_cycles}};
    j["retry"] = {{"max_attempts", cfg.retry.max_attempts},
                  {"backoff_ms", cfg.retry.backoff_ms},
                  {"breaker_threshold", cfg.retry.breaker_threshold}};
    return j;
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("config file " + path + " is not valid JSON: " +
                          e.what());
    }
    return run_config_from_json(j);
}

BacktestConfig to_backtest_config(const RunConfig& cfg,
                                  const std::string& base_dir) {
    BacktestConfig bt;
    bt.params = cfg.params;
    bt.sim = cfg.sim;
    bt.pair_info = cfg.pair_info;
    bt.start_ms = cfg.start_ms;
    bt.end_ms = cfg.end_ms;
    bt.cycle_ms = cfg.cycle_ms;
    bt.detector = cfg.detector;
    bt.annualization_days = cfg.annualization_days();
    for (const auto& d : cfg.data) {
        std::string path = d.path;
        if (!base_dir.empty() && !path.empty() && path.front() != '/') {
            path = base_dir + "/" + path;
        }
        bt.series[d.pair] = load_series_file(path, d.pair, d.interval_s);
    }
    return bt;
}

} // namespace voltgrid
