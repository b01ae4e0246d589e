#pragma once

#include "voltgrid/params.hpp"
#include "voltgrid/scenarios.hpp"

#include <cstddef>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace voltgrid {

/// Declared ordering of the optimizable parameter vector:
///   [q_1..q_m, p_1..p_m, h_1..h_k]
/// where q are entry-ladder capital fractions, p entry-ladder price
/// exponents, and h exit-ladder exponents.
struct ThetaLayout {
    std::size_t entry_levels = 0; ///< m
    std::size_t exit_levels = 0;  ///< k

    std::size_t dim() const { return 2 * entry_levels + exit_levels; }
    std::size_t q_index(std::size_t i) const { return i; }
    std::size_t p_index(std::size_t i) const { return entry_levels + i; }
    std::size_t h_index(std::size_t i) const { return 2 * entry_levels + i; }
    std::string component_name(std::size_t idx) const;
};

ThetaLayout layout_for(const BotParams& params);
/// Packs the optimizable components of a parameter record into a vector.
std::vector<Fixed> theta_from_params(const BotParams& params);
/// Writes a vector back over a base record, leaving everything else intact.
BotParams params_with_theta(const BotParams& base, const std::vector<Fixed>& theta);

enum class Relation { le, ge };

/// One half-space over the declared ordering. The double bound is the exact
/// closed form (for fidelity checks); the fixed bound is its conservative
/// rounding onto the parameter grid — satisfying the fixed bound implies
/// satisfying the real one. Every constraint in this class has only 0/1
/// coefficients and touches either the whole q block, one p component, or
/// one h component.
struct LinearConstraint {
    std::vector<double> coeffs;
    Relation relation = Relation::le;
    double bound = 0.0;
    Fixed fixed_bound;
    std::string provenance;

    /// Zero-tolerance membership test in fixed-point arithmetic.
    bool satisfied(const std::vector<Fixed>& theta) const;
};

/// Slack used to realize a strict inequality: one unit in the last place of
/// the parameter grid.
inline constexpr double kStrictSlack = 1e-8;

/// Compiles each scenario into its constraint:
///   position_cascade: sum(q_i) <= Q_max / (A * c_m_worst * c_f_worst)
///   boundary_breach:  p_m >= log(P_peak / P_before) / log(1 + phi) + slack
///   premature_exit:   h_1 >= log(1 + delta_p / P_entry) / log(1 + phi)
/// Worst-case sizing coefficients are their configured caps, so the bound
/// holds whatever the live coefficients do. Throws DegenerateScenarioError
/// when a log-based formula meets phi <= 0, ValidationError when quantities
/// leave a formula's domain.
std::vector<LinearConstraint> compile_constraints(
    const std::vector<RiskScenario>& scenarios, const BotParams& params,
    const RiskBudget& budget);

/// Human-readable derivation of each constraint, one block per scenario.
std::string describe_constraints(const std::vector<LinearConstraint>& constraints,
                                 const ThetaLayout& layout);

struct ComponentInterval {
    Fixed lo;
    Fixed hi;
};

/// Box intersected with all half-spaces, reduced to per-component intervals
/// plus at most one binding cap on the q-block sum.
struct FeasibleRegion {
    ThetaLayout layout;
    std::vector<ComponentInterval> intervals;
    std::optional<Fixed> q_sum_cap;
    std::vector<LinearConstraint> constraints;

    /// Exact membership: interval bounds and every constraint, zero
    /// tolerance in fixed-point arithmetic.
    bool contains(const std::vector<Fixed>& theta) const;
    /// A canonical member: every component at its lower bound, nudged where
    /// ladder exponents must strictly increase.
    std::vector<Fixed> canonical_point() const;
};

struct InfeasibilityCertificate {
    std::string reason;
    std::vector<std::string> conflicts; ///< provenance of the clashing facts
};

/// Decides emptiness exactly for this constraint class: interval arithmetic
/// per component plus one check that the q lower bounds fit under the
/// tightest sum cap.
std::variant<FeasibleRegion, InfeasibilityCertificate> feasible_region(
    const std::vector<LinearConstraint>& constraints, const ThetaLayout& layout,
    const std::vector<ComponentInterval>& box);

/// Default search box: fractions in [0.01, 1], exponents in [0.25, 10].
std::vector<ComponentInterval> default_search_box(const ThetaLayout& layout);

/// Structural facts every valid parameter record obeys, expressed in the
/// same constraint language (entry fractions sum to at most 1).
std::vector<LinearConstraint> structural_constraints(const ThetaLayout& layout);

} // namespace voltgrid
