#pragma once

#include "voltgrid/feedback.hpp"

#include <map>
#include <string>
#include <vector>

namespace voltgrid {

/// A risk pattern distilled from one feedback record, carrying exactly the
/// quantities its constraint formula consumes.
///
/// Kinds and their quantities:
///   position_cascade — drawdown, entry_fills (context only; the bound comes
///                      from the risk budget)
///   boundary_breach  — p_peak, p_before, phi
///   premature_exit   — delta_p, p_entry, phi
struct RiskScenario {
    std::string kind;
    std::string pair;
    std::map<std::string, double> quantities;
    std::string source; ///< human-readable reference to the originating event
};

/// Account-level risk tolerance: caps the simultaneous exposure a single
/// pair's ladder may take.
struct RiskBudget {
    Fixed global_capital = Fixed::from_int(10'000);
    int n_parallel = 1;
    Fixed safety_factor = Fixed::from_int(2);

    /// Worst-case per-pair exposure cap: global capital split across the
    /// parallel pairs, then halved (by default) so simultaneous full
    /// deployment cannot exhaust the account.
    Fixed q_max() const;
};
void validate_risk_budget(const RiskBudget& b);

/// Maps the feedback's risk events onto the scenario kinds the constraint
/// compiler understands. Operational guard events (deviation blocks, funding
/// deactivations) inform sizing elsewhere and are not scenarios. Quantities
/// that a formula divides by or takes a logarithm of are checked positive.
std::vector<RiskScenario> detect_scenarios(const Feedback& feedback);

} // namespace voltgrid
