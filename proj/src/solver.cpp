#include "voltgrid/solver.hpp"

#include "voltgrid/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

namespace voltgrid {

namespace {

int level_rank(const std::string& level) {
    if (level == "parameter") return 0;
    if (level == "function") return 1;
    if (level == "strategy") return 2;
    throw ValidationError("unknown cycle level '" + level + "'");
}

/// Sorts a ladder block ascending and nudges flat spots one grid unit so
/// the exponents strictly increase, as the parameter record requires.
void order_block(std::vector<Fixed>& theta, std::size_t begin, std::size_t count) {
    if (count < 2) return;
    std::sort(theta.begin() + static_cast<std::ptrdiff_t>(begin),
              theta.begin() + static_cast<std::ptrdiff_t>(begin + count));
    for (std::size_t i = 1; i < count; ++i) {
        if (theta[begin + i] <= theta[begin + i - 1]) {
            theta[begin + i] = Fixed::from_raw(theta[begin + i - 1].raw() + 1);
        }
    }
}

void order_ladders(std::vector<Fixed>& theta, const ThetaLayout& layout) {
    order_block(theta, layout.p_index(0), layout.entry_levels);
    order_block(theta, layout.h_index(0), layout.exit_levels);
}

/// Uniform grid point in [lo, hi] from raw engine output; spans here are
/// far below 2^64 so modulo bias is immaterial.
Fixed sample_interval(std::mt19937_64& rng, const ComponentInterval& iv) {
    std::uint64_t span =
        static_cast<std::uint64_t>(iv.hi.raw() - iv.lo.raw());
    return Fixed::from_raw(iv.lo.raw() +
                           static_cast<std::int64_t>(rng() % (span + 1)));
}

} // namespace

ObjectiveSpec normalize_objective(ObjectiveSpec spec) {
    if (spec.terms.empty()) {
        throw ValidationError("objective needs at least one term");
    }
    if (spec.seeds.empty()) {
        throw ValidationError("objective needs at least one evaluation seed");
    }
    double total = 0.0;
    for (const ObjectiveTerm& t : spec.terms) {
        if (t.weight < 0.0) {
            throw ValidationError("objective weight for '" + t.metric +
                                  "' is negative");
        }
        total += t.weight;
    }
    if (total <= 0.0) {
        throw ValidationError("objective weights sum to zero");
    }
    for (ObjectiveTerm& t : spec.terms) t.weight /= total;
    return spec;
}

SearchResult solve_parameters(const FeasibleRegion& region,
                              const ObjectiveSpec& objective_in,
                              const Evaluator& evaluator, int budget,
                              std::uint64_t seed) {
    if (budget < 1) throw ValidationError("search budget must be >= 1");
    ObjectiveSpec objective = normalize_objective(objective_in);
    const ThetaLayout& layout = region.layout;

    SearchResult result;
    result.seed = seed;
    result.budget = budget;

    auto evaluate = [&](std::vector<Fixed> theta) -> const EvaluatedCandidate& {
        EvaluatedCandidate cand;
        cand.theta = std::move(theta);
        std::map<std::string, double> sums;
        try {
            for (std::uint64_t s : objective.seeds) {
                std::map<std::string, double> m = evaluator(cand.theta, s);
                for (const ObjectiveTerm& t : objective.terms) {
                    auto it = m.find(t.metric);
                    if (it == m.end()) {
                        throw LookupError("evaluator omitted metric '" +
                                          t.metric + "'");
                    }
                    sums[t.metric] += it->second;
                }
            }
            double n = static_cast<double>(objective.seeds.size());
            for (auto& [k, v] : sums) v /= n;
            cand.metrics = std::move(sums);
            for (const ObjectiveTerm& t : objective.terms) {
                cand.score += t.weight * cand.metrics.at(t.metric);
            }
        } catch (const std::exception& e) {
            cand.failed = true;
            cand.score = -std::numeric_limits<double>::infinity();
            cand.note = e.what();
        }
        result.audit.push_back(std::move(cand));
        return result.audit.back();
    };

    // A guaranteed member of the region anchors the search even when
    // rejection sampling finds nothing else.
    std::vector<Fixed> anchor = region.canonical_point();
    if (!region.contains(anchor)) {
        // Strictifying the ladders pushed past a degenerate (single-point)
        // interval; fall back to the raw lower-bound corner.
        anchor.clear();
        anchor.reserve(layout.dim());
        for (const ComponentInterval& iv : region.intervals) {
            anchor.push_back(iv.lo);
        }
    }
    if (!region.contains(anchor)) {
        throw IntegrityError("feasible region has no constructible member");
    }

    int sample_budget = std::max(1, (budget * 3) / 5);
    int refine_budget = std::max(0, budget - sample_budget - 1);

    std::mt19937_64 rng(seed);
    constexpr std::size_t no_best = std::numeric_limits<std::size_t>::max();
    std::size_t best = no_best;
    evaluate(anchor);
    if (!result.audit.back().failed) best = result.audit.size() - 1;

    // Space-filling pass: rejection sampling from the box.
    int accepted = 0;
    long attempts = 0;
    const long max_attempts = 256L * sample_budget;
    while (accepted < sample_budget && attempts < max_attempts) {
        ++attempts;
        std::vector<Fixed> theta(layout.dim());
        for (std::size_t i = 0; i < layout.dim(); ++i) {
            theta[i] = sample_interval(rng, region.intervals[i]);
        }
        order_ladders(theta, layout);
        if (!region.contains(theta)) continue;
        ++accepted;
        evaluate(std::move(theta));
        const EvaluatedCandidate& cand = result.audit.back();
        if (!cand.failed &&
            (best == no_best || cand.score > result.audit[best].score)) {
            best = result.audit.size() - 1;
        }
    }

    if (best == no_best) {
        throw Error("every candidate evaluation failed; search has no result");
    }

    // Local pass: coordinate steps around the best candidate, projected
    // back into the region.
    int refined = 0;
    bool improved = true;
    while (improved && refined < refine_budget) {
        improved = false;
        for (std::size_t i = 0; i < layout.dim() && refined < refine_budget; ++i) {
            const ComponentInterval& iv = region.intervals[i];
            std::int64_t span = iv.hi.raw() - iv.lo.raw();
            if (span == 0) continue;
            for (std::int64_t step : {span / 8, span / 64, std::int64_t{1}}) {
                if (step == 0 || refined >= refine_budget) continue;
                for (int dir : {+1, -1}) {
                    if (refined >= refine_budget) break;
                    std::vector<Fixed> theta = result.audit[best].theta;
                    std::int64_t moved = theta[i].raw() + dir * step;
                    moved = std::clamp(moved, iv.lo.raw(), iv.hi.raw());
                    if (moved == theta[i].raw()) continue;
                    theta[i] = Fixed::from_raw(moved);
                    order_ladders(theta, layout);
                    if (!region.contains(theta)) continue;
                    ++refined;
                    evaluate(std::move(theta));
                    const EvaluatedCandidate& cand = result.audit.back();
                    if (!cand.failed && cand.score > result.audit[best].score) {
                        best = result.audit.size() - 1;
                        improved = true;
                    }
                }
            }
        }
    }

    result.theta_star = result.audit[best].theta;
    result.score = result.audit[best].score;
    if (!region.contains(result.theta_star)) {
        throw IntegrityError("search result left the feasible region");
    }

    // Non-dominated front over the successful evaluations.
    for (std::size_t a = 0; a < result.audit.size(); ++a) {
        if (result.audit[a].failed) continue;
        bool dominated = false;
        for (std::size_t b = 0; b < result.audit.size() && !dominated; ++b) {
            if (a == b || result.audit[b].failed) continue;
            bool all_ge = true, any_gt = false;
            for (const ObjectiveTerm& t : objective.terms) {
                double va = result.audit[a].metrics.at(t.metric);
                double vb = result.audit[b].metrics.at(t.metric);
                if (vb < va) all_ge = false;
                if (vb > va) any_gt = true;
            }
            dominated = all_ge && any_gt;
        }
        if (!dominated) result.pareto.push_back(a);
    }
    return result;
}

nlohmann::ordered_json cycle_to_json(const OptimizationCycle& c) {
    nlohmann::ordered_json j;
    j["index"] = c.index;
    j["level"] = c.level;
    j["component"] = c.component;
    auto fixed_array = [](const std::vector<Fixed>& v) {
        nlohmann::ordered_json arr = nlohmann::ordered_json::array();
        for (Fixed f : v) arr.push_back(f.str());
        return arr;
    };
    j["theta_in"] = fixed_array(c.theta_in);
    j["theta_out"] = fixed_array(c.theta_out);
    j["constraints"] = c.constraints;
    j["accepted"] = c.accepted;
    j["notes"] = c.notes;
    return j;
}

OptimizationCycle cycle_from_json(const nlohmann::json& j) {
    OptimizationCycle c;
    c.index = j.at("index").get<std::int64_t>();
    c.level = j.at("level").get<std::string>();
    level_rank(c.level); // validates
    c.component = j.at("component").get<std::string>();
    for (const auto& s : j.at("theta_in")) {
        c.theta_in.push_back(Fixed::parse(s.get<std::string>()));
    }
    for (const auto& s : j.at("theta_out")) {
        c.theta_out.push_back(Fixed::parse(s.get<std::string>()));
    }
    for (const auto& s : j.at("constraints")) {
        c.constraints.push_back(s.get<std::string>());
    }
    c.accepted = j.at("accepted").get<bool>();
    c.notes = j.at("notes").get<std::string>();
    return c;
}

void validate_cycle_log(const std::vector<OptimizationCycle>& log) {
    for (std::size_t i = 0; i < log.size(); ++i) {
        int rank = level_rank(log[i].level);
        if (rank == 0) continue;
        if (i == 0) {
            throw ValidationError(
                "cycle 0 escalates to level '" + log[i].level +
                "' with no preceding failed cycle");
        }
        const OptimizationCycle& prev = log[i - 1];
        if (prev.accepted) {
            throw ValidationError(
                "cycle " + std::to_string(i) + " escalates to level '" +
                log[i].level + "' after an accepted cycle");
        }
        if (level_rank(prev.level) > rank) {
            throw ValidationError(
                "cycle " + std::to_string(i) + " de-escalates from level '" +
                prev.level + "' to '" + log[i].level +
                "' without passing through parameter level");
        }
    }
}

Intervention escalate(const std::vector<OptimizationCycle>& history,
                      const Registries& registries, const BotParams& current) {
    if (history.empty() || history.back().accepted) {
        return {"parameter", "", "latest cycle passed; keep tuning parameters"};
    }
    auto used = [&](const std::string& level, const std::string& component) {
        for (const OptimizationCycle& c : history) {
            if (c.level == level && c.component == component) return true;
        }
        return false;
    };
    for (const std::string& variant : registries.function_variants) {
        if (variant == current.volatility_indicator) continue;
        if (used("function", variant)) continue;
        return {"function", variant,
                "parameter tuning failed; swapping volatility indicator to '" +
                    variant + "' and re-solving"};
    }
    for (const std::string& tmpl : registries.strategy_templates) {
        if (tmpl == current.strategy_template) continue;
        if (used("strategy", tmpl)) continue;
        return {"strategy", tmpl,
                "function variants exhausted; swapping strategy template to '" +
                    tmpl + "' and reinitializing"};
    }
    return {"terminal", "",
            "all registry options exhausted; manual intervention required"};
}

InitializedParams initialize_pair_params(const PairProfile& profile,
                                         std::size_t min_history,
                                         const BotParams& base) {
    InitializedParams out;
    out.params = base;
    if (profile.phi_history.size() < min_history) {
        out.defaults_used = true;
        out.rationale.push_back(
            profile.pair_id + ": only " +
            std::to_string(profile.phi_history.size()) + " of " +
            std::to_string(min_history) +
            " required history points; using base defaults");
        return out;
    }

    std::vector<Fixed> sorted = profile.phi_history;
    std::sort(sorted.begin(), sorted.end());
    std::size_t n = sorted.size();
    Fixed median =
        n % 2 == 1 ? sorted[n / 2]
                   : Fixed::div(sorted[n / 2 - 1] + sorted[n / 2],
                                Fixed::from_int(2));
    if (!(median > Fixed())) {
        out.defaults_used = true;
        out.rationale.push_back(profile.pair_id +
                                ": degenerate (non-positive median) "
                                "volatility history; using base defaults");
        return out;
    }

    out.params.phi_req = median;
    out.rationale.push_back(profile.pair_id +
                            ": qualification volatility set to median " +
                            median.str());

    Fixed dispersion = sorted.back() - sorted.front();
    Fixed multiplier = Fixed::from_int(1) + Fixed::div(dispersion, median);
    for (Fixed& p : out.params.entry_exponents) p = Fixed::mul(p, multiplier);
    for (std::size_t i = 1; i < out.params.entry_exponents.size(); ++i) {
        if (out.params.entry_exponents[i] <= out.params.entry_exponents[i - 1]) {
            out.params.entry_exponents[i] =
                Fixed::from_raw(out.params.entry_exponents[i - 1].raw() + 1);
        }
    }
    out.rationale.push_back(profile.pair_id +
                            ": ladder spread widened by dispersion factor " +
                            multiplier.str());

    Fixed tier_high = Fixed::from_int(10'000'000);
    Fixed tier_mid = Fixed::from_int(1'000'000);
    if (profile.turnover_24h >= tier_high) {
        out.rationale.push_back(profile.pair_id +
                                ": deep liquidity; full capital allocation");
    } else if (profile.turnover_24h >= tier_mid) {
        out.params.capital_per_pair =
            Fixed::div(base.capital_per_pair, Fixed::from_int(2));
        out.rationale.push_back(profile.pair_id +
                                ": mid liquidity; capital halved");
    } else {
        out.params.capital_per_pair =
            Fixed::div(base.capital_per_pair, Fixed::from_int(4));
        out.rationale.push_back(profile.pair_id +
                                ": thin liquidity; capital quartered");
    }
    return out;
}

} // namespace voltgrid
