#include "voltgrid/scenarios.hpp"

#include "voltgrid/errors.hpp"

namespace voltgrid {

namespace {

double pull(const RiskEvent& ev, const std::string& key) {
    auto it = ev.magnitudes.find(key);
    if (it == ev.magnitudes.end()) {
        throw IntegrityError("risk event '" + ev.kind + "' lacks quantity '" +
                             key + "'");
    }
    return it->second;
}

double pull_positive(const RiskEvent& ev, const std::string& key) {
    double v = pull(ev, key);
    if (!(v > 0.0)) {
        throw ValidationError("risk event '" + ev.kind + "' quantity '" + key +
                              "' must be positive, got " + std::to_string(v));
    }
    return v;
}

std::string source_ref(const RiskEvent& ev) {
    return ev.kind + "@" + std::to_string(ev.t0) + ".." +
           std::to_string(ev.t1) + (ev.pair.empty() ? "" : "/" + ev.pair);
}

} // namespace

Fixed RiskBudget::q_max() const {
    Fixed denom = Fixed::mul(Fixed::from_int(n_parallel), safety_factor);
    return Fixed::div(global_capital, denom);
}

void validate_risk_budget(const RiskBudget& b) {
    if (!(b.global_capital > Fixed())) {
        throw ValidationError("risk budget: global capital must be positive");
    }
    if (b.n_parallel < 1) {
        throw ValidationError("risk budget: parallel pair count must be >= 1");
    }
    if (!(b.safety_factor > Fixed())) {
        throw ValidationError("risk budget: safety factor must be positive");
    }
}

std::vector<RiskScenario> detect_scenarios(const Feedback& feedback) {
    std::vector<RiskScenario> out;
    for (const RiskEvent& ev : feedback.risk_events) {
        if (ev.kind == "drawdown_cascade") {
            RiskScenario s;
            s.kind = "position_cascade";
            s.pair = ev.pair;
            s.quantities["drawdown"] = pull_positive(ev, "drawdown");
            s.quantities["entry_fills"] = pull(ev, "entry_fills");
            s.source = source_ref(ev);
            out.push_back(std::move(s));
        } else if (ev.kind == "boundary_breach") {
            RiskScenario s;
            s.kind = "boundary_breach";
            s.pair = ev.pair;
            s.quantities["p_peak"] = pull_positive(ev, "p_peak");
            s.quantities["p_before"] = pull_positive(ev, "p_before");
            s.quantities["phi"] = pull(ev, "phi"); // zero caught at compile time
            s.source = source_ref(ev);
            out.push_back(std::move(s));
        } else if (ev.kind == "premature_exit") {
            RiskScenario s;
            s.kind = "premature_exit";
            s.pair = ev.pair;
            s.quantities["delta_p"] = pull_positive(ev, "delta_p");
            s.quantities["p_entry"] = pull_positive(ev, "p_entry");
            s.quantities["phi"] = pull(ev, "phi");
            s.source = source_ref(ev);
            out.push_back(std::move(s));
        }
        // deviation_block / funding_deactivation: operational guards, not
        // parameter-space scenarios.
    }
    return out;
}

} // namespace voltgrid
