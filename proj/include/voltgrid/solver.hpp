#pragma once

#include "voltgrid/constraints.hpp"

#include <json.hpp>

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

namespace voltgrid {

/// Weighted scalarization of the optimization goal. Weights are
/// non-negative and normalized to sum to one; metrics are scored
/// higher-is-better. The seed set pins the evaluation protocol: each
/// candidate is scored on every seed and the scores averaged, so a noisy
/// evaluator still yields a deterministic objective.
struct ObjectiveTerm {
    std::string metric;
    double weight = 0.0;
};
struct ObjectiveSpec {
    std::vector<ObjectiveTerm> terms;
    std::vector<std::uint64_t> seeds = {1, 2, 3};
};
/// Scales weights to sum to one. Throws ValidationError on a negative
/// weight, an empty term list, an all-zero weighting, or an empty seed set.
ObjectiveSpec normalize_objective(ObjectiveSpec spec);

/// Scores one parameter vector under one seed: returns a map holding at
/// least every metric named by the objective, higher is better. Throwing
/// marks the candidate failed without stopping the search.
using Evaluator = std::function<std::map<std::string, double>(
    const std::vector<Fixed>&, std::uint64_t)>;

struct EvaluatedCandidate {
    std::vector<Fixed> theta;
    std::map<std::string, double> metrics; ///< averaged over the seed set
    double score = 0.0;
    bool failed = false;
    std::string note;
};

struct SearchResult {
    std::vector<Fixed> theta_star;
    double score = 0.0;
    /// Every evaluation the search performed, in order. The reported score
    /// is always the maximum over this log's successful entries.
    std::vector<EvaluatedCandidate> audit;
    /// Indexes into the audit of candidates no other candidate dominates on
    /// all objective metrics at once.
    std::vector<std::size_t> pareto;
    std::uint64_t seed = 0;
    int budget = 0;
};

/// Maximizes the weighted objective inside the region: seeded rejection
/// sampling over the box (ladder blocks sorted ascending and nudged strictly
/// increasing), then coordinate refinement around the best candidate with
/// projection back into the region. The returned vector satisfies every
/// constraint with zero tolerance in fixed-point arithmetic. Throws
/// ValidationError on an empty budget and Error when every candidate failed.
SearchResult solve_parameters(const FeasibleRegion& region,
                              const ObjectiveSpec& objective,
                              const Evaluator& evaluator, int budget,
                              std::uint64_t seed);

/// One turn of the refinement loop, for the append-only cycle log.
struct OptimizationCycle {
    std::int64_t index = 0;
    std::string level;     ///< parameter | function | strategy
    std::string component; ///< registry entry swapped in (escalations only)
    std::vector<Fixed> theta_in;
    std::vector<Fixed> theta_out;
    std::vector<std::string> constraints; ///< provenance of active constraints
    bool accepted = false;
    std::string notes;
};

nlohmann::ordered_json cycle_to_json(const OptimizationCycle& c);
OptimizationCycle cycle_from_json(const nlohmann::json& j);

/// Enforces minimal intervention on the whole log: an escalated cycle
/// (function or strategy level) must directly follow a failed cycle of the
/// same or lower level. Throws ValidationError naming the offending index.
void validate_cycle_log(const std::vector<OptimizationCycle>& log);

/// What is available to swap at each escalation level.
struct Registries {
    std::vector<std::string> function_variants;  ///< volatility indicator ids
    std::vector<std::string> strategy_templates; ///< strategy template ids
};

/// The next intervention to try. Level "parameter" means no escalation is
/// warranted; "terminal" means every registry option is exhausted.
struct Intervention {
    std::string level;
    std::string component;
    std::string note;
};

/// Decides the next step after the latest cycle: keep tuning parameters
/// while cycles pass, otherwise swap the first untried function variant,
/// then the first untried strategy template, then report terminal failure.
Intervention escalate(const std::vector<OptimizationCycle>& history,
                      const Registries& registries, const BotParams& current);

/// Per-pair calibration inputs: recent volatility-coefficient history and
/// liquidity, as produced by the market-data pipeline.
struct PairProfile {
    std::string pair_id;
    std::vector<Fixed> phi_history;
    Fixed turnover_24h;
};

struct InitializedParams {
    BotParams params;
    bool defaults_used = false;
    std::vector<std::string> rationale;
};

/// Deterministic heuristic calibration: the qualification volatility is set
/// to the pair's median historical coefficient, the entry-ladder spread
/// widens proportionally to the history's dispersion, and capital is scaled
/// by liquidity tier. Falls back to the base record (flagged, with
/// rationale) when history is shorter than min_history.
InitializedParams initialize_pair_params(const PairProfile& profile,
                                         std::size_t min_history,
                                         const BotParams& base);

} // namespace voltgrid
