#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "voltgrid/backtest.hpp"
#include "voltgrid/constraints.hpp"
#include "voltgrid/scenarios.hpp"
#include "voltgrid/solver.hpp"

namespace voltgrid {

/// Knobs of the constrained parameter search and its surrounding
/// refinement loop.
struct OptimizerConfig {
    std::uint64_t seed = 7;
    int budget = 240;   ///< evaluations per search
    int max_cycles = 4; ///< refinement turns before giving up
};

struct OptimizeRequest {
    BacktestConfig base; ///< prototype parameters + data + venue
    ObjectiveSpec objective;
    RiskBudget budget;
    OptimizerConfig optimizer;
    /// Components available for escalation; defaults cover every registered
    /// volatility indicator and strategy template.
    Registries registries;
};

/// Components registered in the engine, in deterministic order.
Registries default_registries();

struct OptimizeOutcome {
    std::vector<OptimizationCycle> cycles;
    BotParams final_params;
    Feedback final_feedback;
    std::vector<LinearConstraint> active_constraints;
    bool accepted = false;
    /// accepted | terminal | budget_exhausted
    std::string verdict;
};

/// Closed refinement loop: replay, detect risk events, compile them into
/// linear parameter constraints, re-solve inside the feasible region, and
/// re-simulate until a replay is event-free. Component substitutions happen
/// only after a failed cycle (least intervention first), and the returned
/// cycle log always passes validate_cycle_log.
OptimizeOutcome run_optimization(const OptimizeRequest& req);

/// Always-defined objective metrics of one replay: "return" (end over start
/// equity minus one), "neg_mdd" (negated max drawdown, higher is better),
/// plus "sharpe" when the replay defines it.
std::map<std::string, double> objective_metrics(const BacktestResult& result);

} // namespace voltgrid
