#include "voltgrid/optimize.hpp"

#include "voltgrid/engine.hpp"
#include "voltgrid/errors.hpp"
#include "voltgrid/indicators.hpp"

#include <iomanip>
#include <set>
#include <sstream>
#include <variant>

namespace voltgrid {

Registries default_registries() {
    Registries r;
    for (const auto& [name, fn] : indicator_registry()) {
        (void)fn;
        // Turnover is a volume indicator; only range estimators can stand in
        // for the volatility source.
        if (name == "rolling_volume") continue;
        r.function_variants.push_back(name);
    }
    for (const auto& [name, fn] : strategy_registry()) {
        (void)fn;
        r.strategy_templates.push_back(name);
    }
    return r;
}

std::map<std::string, double> objective_metrics(const BacktestResult& result) {
    std::map<std::string, double> m;
    double ret = 0.0;
    if (result.equity.size() >= 2 && !result.equity.front().second.is_zero()) {
        ret = result.equity.back().second.to_double() /
                  result.equity.front().second.to_double() -
              1.0;
    }
    m["return"] = ret;
    m["neg_mdd"] = result.feedback.mdd.defined ? -result.feedback.mdd.value : 0.0;
    if (result.feedback.sharpe.defined) m["sharpe"] = result.feedback.sharpe.value;
    return m;
}

namespace {

std::string fmt_score(double v) {
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

std::string join_notes(std::initializer_list<std::string> parts) {
    std::string out;
    for (const auto& p : parts) {
        if (p.empty()) continue;
        if (!out.empty()) out += "; ";
        out += p;
    }
    return out;
}

} // namespace

OptimizeOutcome run_optimization(const OptimizeRequest& req) {
    validate_backtest_config(req.base);
    const ObjectiveSpec objective = normalize_objective(req.objective);
    if (req.optimizer.budget < 1) {
        throw ValidationError("search budget must be positive");
    }
    if (req.optimizer.max_cycles < 1) {
        throw ValidationError("refinement needs at least one cycle");
    }
    validate_risk_budget(req.budget);
    Registries regs = req.registries;
    if (regs.function_variants.empty() && regs.strategy_templates.empty()) {
        regs = default_registries();
    }

    const ThetaLayout layout = layout_for(req.base.params);
    std::vector<LinearConstraint> active = structural_constraints(layout);
    std::set<std::string> seen;
    for (const auto& c : active) seen.insert(c.provenance);

    OptimizeOutcome out;
    BotParams current = req.base.params;
    std::string pending_level = "parameter";
    std::string pending_component;
    std::string pending_note;

    auto replay = [&req](const BotParams& p) {
        BacktestConfig c = req.base;
        c.params = p;
        return run_backtest(c);
    };

    BacktestResult run = replay(current);
    std::vector<RiskScenario> scenarios = detect_scenarios(run.feedback);
    out.final_params = current;
    out.final_feedback = run.feedback;

    for (int k = 0; k < req.optimizer.max_cycles; ++k) {
        if (pending_level == "function") {
            current.volatility_indicator = pending_component;
        } else if (pending_level == "strategy") {
            current.strategy_template = pending_component;
        }

        OptimizationCycle cyc;
        cyc.index = static_cast<std::int64_t>(out.cycles.size());
        cyc.level = pending_level;
        cyc.component = pending_component;
        cyc.theta_in = theta_from_params(current);

        for (const auto& c : compile_constraints(scenarios, current, req.budget)) {
            if (seen.insert(c.provenance).second) active.push_back(c);
        }
        for (const auto& c : active) cyc.constraints.push_back(c.provenance);

        auto region_or =
            feasible_region(active, layout, default_search_box(layout));
        if (std::holds_alternative<InfeasibilityCertificate>(region_or)) {
            const auto& cert = std::get<InfeasibilityCertificate>(region_or);
            std::string conflicts;
            for (const auto& c : cert.conflicts) {
                if (!conflicts.empty()) conflicts += " | ";
                conflicts += c;
            }
            cyc.theta_out = cyc.theta_in;
            cyc.accepted = false;
            cyc.notes = join_notes(
                {pending_note, "infeasible: " + cert.reason, conflicts});
            out.cycles.push_back(cyc);
        } else {
            const FeasibleRegion& region = std::get<FeasibleRegion>(region_or);

            auto evaluator = [&req, &current](const std::vector<Fixed>& theta,
                                              std::uint64_t eval_seed) {
                BacktestConfig c = req.base;
                c.params = params_with_theta(current, theta);
                c.sim.faults.seed = eval_seed;
                BacktestResult r = run_backtest(c);
                return objective_metrics(r);
            };

            SearchResult sr = solve_parameters(
                region, objective, evaluator, req.optimizer.budget,
                req.optimizer.seed + static_cast<std::uint64_t>(k));

            std::vector<Fixed> theta_out = sr.theta_star;
            double best_score = sr.score;
            std::string incumbent_note;
            if (region.contains(cyc.theta_in)) {
                // The incumbent competes on equal footing: keep it unless the
                // search strictly improves on it.
                std::map<std::string, double> averaged;
                bool incumbent_ok = true;
                for (std::uint64_t s : objective.seeds) {
                    try {
                        auto m = evaluator(cyc.theta_in, s);
                        for (const auto& term : objective.terms) {
                            averaged[term.metric] += m.at(term.metric);
                        }
                    } catch (const std::exception&) {
                        incumbent_ok = false;
                        break;
                    }
                }
                if (incumbent_ok) {
                    double inc_score = 0.0;
                    for (const auto& term : objective.terms) {
                        inc_score += term.weight * averaged[term.metric] /
                                     static_cast<double>(objective.seeds.size());
                    }
                    if (!(sr.score > inc_score)) {
                        theta_out = cyc.theta_in;
                        best_score = inc_score;
                        incumbent_note = "kept incumbent parameters; search "
                                         "found no strict improvement";
                    }
                }
            }

            current = params_with_theta(current, theta_out);
            run = replay(current);
            scenarios = detect_scenarios(run.feedback);

            cyc.theta_out = theta_out;
            cyc.accepted = scenarios.empty();
            cyc.notes = join_notes({pending_note, incumbent_note,
                                    "score " + fmt_score(best_score)});
            out.cycles.push_back(cyc);
            out.final_params = current;
            out.final_feedback = run.feedback;

            if (cyc.accepted) {
                out.accepted = true;
                out.verdict = "accepted";
                break;
            }
        }

        Intervention next = escalate(out.cycles, regs, current);
        if (next.level == "terminal") {
            out.verdict = "terminal";
            break;
        }
        pending_level = next.level;
        pending_component = next.component;
        pending_note = next.note;
    }

    if (out.verdict.empty()) out.verdict = "budget_exhausted";
    out.active_constraints = active;
    validate_cycle_log(out.cycles); // the loop must obey its own audit law
    return out;
}

} // namespace voltgrid
