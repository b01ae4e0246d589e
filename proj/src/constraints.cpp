#include "voltgrid/constraints.hpp"

#include "voltgrid/errors.hpp"

#include <cmath>
#include <sstream>

namespace voltgrid {

namespace {

// Directional conversion of a double bound onto the parameter grid. The
// snap tolerance (1e-6 of one grid unit, i.e. 1e-14 in value space) absorbs
// binary floating-point representation error so that bounds which are exact
// grid points land on them instead of one unit beyond.
Fixed grid_ceil(double v) {
    double scaled = v * static_cast<double>(Fixed::scale);
    return Fixed::from_raw(static_cast<std::int64_t>(std::ceil(scaled - 1e-6)));
}

Fixed grid_floor(double v) {
    double scaled = v * static_cast<double>(Fixed::scale);
    return Fixed::from_raw(static_cast<std::int64_t>(std::floor(scaled + 1e-6)));
}

double quantity(const RiskScenario& s, const std::string& key) {
    auto it = s.quantities.find(key);
    if (it == s.quantities.end()) {
        throw ValidationError("scenario '" + s.kind + "' lacks quantity '" +
                              key + "'");
    }
    return it->second;
}

} // namespace

std::string ThetaLayout::component_name(std::size_t idx) const {
    if (idx < entry_levels) return "q_" + std::to_string(idx + 1);
    if (idx < 2 * entry_levels) {
        return "p_" + std::to_string(idx - entry_levels + 1);
    }
    return "h_" + std::to_string(idx - 2 * entry_levels + 1);
}

ThetaLayout layout_for(const BotParams& params) {
    return ThetaLayout{params.entry_levels(), params.exit_levels()};
}

std::vector<Fixed> theta_from_params(const BotParams& params) {
    std::vector<Fixed> theta;
    theta.reserve(layout_for(params).dim());
    for (Fixed q : params.entry_fractions) theta.push_back(q);
    for (Fixed p : params.entry_exponents) theta.push_back(p);
    for (Fixed h : params.exit_exponents) theta.push_back(h);
    return theta;
}

BotParams params_with_theta(const BotParams& base, const std::vector<Fixed>& theta) {
    ThetaLayout layout = layout_for(base);
    if (theta.size() != layout.dim()) {
        throw ValidationError("parameter vector has " +
                              std::to_string(theta.size()) +
                              " components, layout needs " +
                              std::to_string(layout.dim()));
    }
    BotParams out = base;
    for (std::size_t i = 0; i < layout.entry_levels; ++i) {
        out.entry_fractions[i] = theta[layout.q_index(i)];
        out.entry_exponents[i] = theta[layout.p_index(i)];
    }
    for (std::size_t i = 0; i < layout.exit_levels; ++i) {
        out.exit_exponents[i] = theta[layout.h_index(i)];
    }
    return out;
}

bool LinearConstraint::satisfied(const std::vector<Fixed>& theta) const {
    Fixed lhs;
    for (std::size_t i = 0; i < coeffs.size() && i < theta.size(); ++i) {
        if (coeffs[i] == 0.0) continue;
        if (coeffs[i] != 1.0) {
            throw ValidationError(
                "constraint class supports only unit coefficients");
        }
        lhs += theta[i];
    }
    return relation == Relation::le ? lhs <= fixed_bound : lhs >= fixed_bound;
}

std::vector<LinearConstraint> compile_constraints(
    const std::vector<RiskScenario>& scenarios, const BotParams& params,
    const RiskBudget& budget) {
    validate_risk_budget(budget);
    ThetaLayout layout = layout_for(params);
    std::vector<LinearConstraint> out;

    for (const RiskScenario& s : scenarios) {
        LinearConstraint c;
        c.coeffs.assign(layout.dim(), 0.0);
        std::ostringstream why;
        why << s.kind << " (" << s.source << "): ";

        if (s.kind == "position_cascade") {
            // Total ladder exposure must fit the budget even when every
            // sizing coefficient is at its cap.
            double q_max = budget.q_max().to_double();
            double a = params.capital_per_pair.to_double();
            double c_m = params.cap_weights.cap.to_double();
            double c_f = 1.0; // funding decay never exceeds one
            if (!(a > 0.0) || !(c_m > 0.0)) {
                throw ValidationError(
                    "position_cascade constraint needs positive capital and "
                    "sizing cap");
            }
            for (std::size_t i = 0; i < layout.entry_levels; ++i) {
                c.coeffs[layout.q_index(i)] = 1.0;
            }
            c.relation = Relation::le;
            c.bound = q_max / (a * c_m * c_f);
            c.fixed_bound = grid_floor(c.bound);
            why << "sum(q_i) <= Q_max / (A * c_m * c_f) = " << q_max << " / ("
                << a << " * " << c_m << " * " << c_f << ") = " << c.bound;
        } else if (s.kind == "boundary_breach") {
            double p_peak = quantity(s, "p_peak");
            double p_before = quantity(s, "p_before");
            double phi = quantity(s, "phi");
            if (!(phi > 0.0)) {
                throw DegenerateScenarioError(
                    "boundary_breach (" + s.source +
                    "): volatility coefficient must be positive for the "
                    "log-based bound, got " + std::to_string(phi));
            }
            if (!(p_peak > 0.0) || !(p_before > 0.0)) {
                throw ValidationError("boundary_breach prices must be positive");
            }
            c.coeffs[layout.p_index(layout.entry_levels - 1)] = 1.0;
            c.relation = Relation::ge;
            // The escape must lie strictly inside the ladder, so the strict
            // inequality is realized with one grid unit of slack.
            c.bound = std::log(p_peak / p_before) / std::log1p(phi) + kStrictSlack;
            c.fixed_bound = grid_ceil(c.bound);
            why << "p_m > log(P_peak/P_before)/log(1+phi) = log(" << p_peak
                << "/" << p_before << ")/log(1+" << phi
                << "), realized as >= bound + " << kStrictSlack << " = "
                << c.bound;
        } else if (s.kind == "premature_exit") {
            double delta_p = quantity(s, "delta_p");
            double p_entry = quantity(s, "p_entry");
            double phi = quantity(s, "phi");
            if (!(phi > 0.0)) {
                throw DegenerateScenarioError(
                    "premature_exit (" + s.source +
                    "): volatility coefficient must be positive for the "
                    "log-based bound, got " + std::to_string(phi));
            }
            if (!(p_entry > 0.0) || !(1.0 + delta_p / p_entry > 0.0)) {
                throw ValidationError(
                    "premature_exit quantities leave the logarithm's domain");
            }
            c.coeffs[layout.h_index(0)] = 1.0;
            c.relation = Relation::ge;
            c.bound = std::log1p(delta_p / p_entry) / std::log1p(phi);
            c.fixed_bound = grid_ceil(c.bound);
            why << "h_1 >= log(1 + dP/P_entry)/log(1+phi) = log(1 + " << delta_p
                << "/" << p_entry << ")/log(1+" << phi << ") = " << c.bound;
        } else {
            throw ValidationError("unknown scenario kind '" + s.kind + "'");
        }

        c.provenance = why.str();
        out.push_back(std::move(c));
    }
    return out;
}

std::string describe_constraints(const std::vector<LinearConstraint>& constraints,
                                 const ThetaLayout& layout) {
    std::ostringstream out;
    for (const LinearConstraint& c : constraints) {
        out << "[";
        bool first = true;
        for (std::size_t i = 0; i < c.coeffs.size(); ++i) {
            if (c.coeffs[i] == 0.0) continue;
            if (!first) out << " + ";
            out << layout.component_name(i);
            first = false;
        }
        out << (c.relation == Relation::le ? " <= " : " >= ")
            << c.fixed_bound.str() << "]  " << c.provenance << "\n";
    }
    return out.str();
}

bool FeasibleRegion::contains(const std::vector<Fixed>& theta) const {
    if (theta.size() != layout.dim()) return false;
    for (std::size_t i = 0; i < theta.size(); ++i) {
        if (theta[i] < intervals[i].lo || theta[i] > intervals[i].hi) {
            return false;
        }
    }
    for (const LinearConstraint& c : constraints) {
        if (!c.satisfied(theta)) return false;
    }
    return true;
}

std::vector<Fixed> FeasibleRegion::canonical_point() const {
    std::vector<Fixed> theta(layout.dim());
    for (std::size_t i = 0; i < theta.size(); ++i) theta[i] = intervals[i].lo;
    // Ladder exponents must strictly increase; nudge flat spots upward one
    // grid unit at a time (stays inside the interval whenever the region is
    // wide enough for a strict ladder at all).
    auto strictify = [&](std::size_t begin, std::size_t count) {
        for (std::size_t i = 1; i < count; ++i) {
            std::size_t idx = begin + i;
            if (theta[idx] <= theta[idx - 1]) {
                theta[idx] = Fixed::from_raw(theta[idx - 1].raw() + 1);
            }
        }
    };
    strictify(layout.p_index(0), layout.entry_levels);
    strictify(layout.h_index(0), layout.exit_levels);
    return theta;
}

std::variant<FeasibleRegion, InfeasibilityCertificate> feasible_region(
    const std::vector<LinearConstraint>& constraints, const ThetaLayout& layout,
    const std::vector<ComponentInterval>& box) {
    if (box.size() != layout.dim()) {
        throw ValidationError("search box has " + std::to_string(box.size()) +
                              " components, layout needs " +
                              std::to_string(layout.dim()));
    }
    FeasibleRegion region;
    region.layout = layout;
    region.intervals = box;
    region.constraints = constraints;

    // Classify each constraint: whole-q-block sum, or a single component.
    std::optional<Fixed> sum_cap;
    std::string sum_cap_source;
    for (const LinearConstraint& c : constraints) {
        if (c.coeffs.size() != layout.dim()) {
            throw ValidationError("constraint dimension mismatch");
        }
        std::vector<std::size_t> touched;
        for (std::size_t i = 0; i < c.coeffs.size(); ++i) {
            if (c.coeffs[i] == 0.0) continue;
            if (c.coeffs[i] != 1.0) {
                throw ValidationError(
                    "constraint class supports only unit coefficients");
            }
            touched.push_back(i);
        }
        if (touched.empty()) {
            throw ValidationError("constraint with no nonzero coefficient");
        }
        bool q_block_sum =
            touched.size() == layout.entry_levels && layout.entry_levels > 0 &&
            touched.front() == layout.q_index(0) &&
            touched.back() == layout.q_index(layout.entry_levels - 1);
        if (q_block_sum && c.relation == Relation::le) {
            if (!sum_cap || c.fixed_bound < *sum_cap) {
                sum_cap = c.fixed_bound;
                sum_cap_source = c.provenance;
            }
        } else if (touched.size() == 1) {
            ComponentInterval& iv = region.intervals[touched.front()];
            if (c.relation == Relation::ge) {
                if (c.fixed_bound > iv.lo) iv.lo = c.fixed_bound;
            } else {
                if (c.fixed_bound < iv.hi) iv.hi = c.fixed_bound;
            }
            if (iv.lo > iv.hi) {
                InfeasibilityCertificate cert;
                cert.reason = "component " +
                              layout.component_name(touched.front()) +
                              " has empty interval [" + iv.lo.str() + ", " +
                              iv.hi.str() + "]";
                cert.conflicts = {c.provenance,
                                  "search box for " +
                                      layout.component_name(touched.front())};
                return cert;
            }
        } else {
            throw ValidationError(
                "constraint touches neither the q-block sum nor a single "
                "component");
        }
    }

    if (sum_cap) {
        Fixed lo_sum;
        for (std::size_t i = 0; i < layout.entry_levels; ++i) {
            lo_sum += region.intervals[layout.q_index(i)].lo;
        }
        if (lo_sum > *sum_cap) {
            InfeasibilityCertificate cert;
            cert.reason = "q-block lower bounds sum to " + lo_sum.str() +
                          ", above the tightest sum cap " + sum_cap->str();
            cert.conflicts.push_back(sum_cap_source);
            for (std::size_t i = 0; i < layout.entry_levels; ++i) {
                cert.conflicts.push_back(
                    layout.component_name(layout.q_index(i)) + " >= " +
                    region.intervals[layout.q_index(i)].lo.str());
            }
            return cert;
        }
        region.q_sum_cap = sum_cap;
    }
    return region;
}

std::vector<ComponentInterval> default_search_box(const ThetaLayout& layout) {
    std::vector<ComponentInterval> box(layout.dim());
    for (std::size_t i = 0; i < layout.entry_levels; ++i) {
        box[layout.q_index(i)] = {Fixed::parse("0.01"), Fixed::from_int(1)};
    }
    for (std::size_t i = 0; i < layout.entry_levels; ++i) {
        box[layout.p_index(i)] = {Fixed::parse("0.25"), Fixed::from_int(10)};
    }
    for (std::size_t i = 0; i < layout.exit_levels; ++i) {
        box[layout.h_index(i)] = {Fixed::parse("0.25"), Fixed::from_int(10)};
    }
    return box;
}

std::vector<LinearConstraint> structural_constraints(const ThetaLayout& layout) {
    LinearConstraint c;
    c.coeffs.assign(layout.dim(), 0.0);
    for (std::size_t i = 0; i < layout.entry_levels; ++i) {
        c.coeffs[layout.q_index(i)] = 1.0;
    }
    c.relation = Relation::le;
    c.bound = 1.0;
    c.fixed_bound = Fixed::from_int(1);
    c.provenance = "structural: entry fractions sum to at most 1";
    return {c};
}

} // namespace voltgrid
