#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "voltgrid/solver.hpp"

#include <cmath>
#include <random>

using namespace voltgrid;

namespace {

Fixed fx(const char* s) { return Fixed::parse(s); }

BotParams base_params() {
    BotParams p; // defaults: 3 entry levels, 2 exit levels
    return p;
}

RiskScenario cascade_scenario() {
    return {"position_cascade", "AAA/USD", {{"drawdown", 0.57}, {"entry_fills", 6}}, "ev1"};
}

RiskScenario breach_scenario(double peak, double before, double phi) {
    return {"boundary_breach", "AAA/USD",
            {{"p_peak", peak}, {"p_before", before}, {"phi", phi}}, "ev2"};
}

RiskScenario exit_scenario(double dp, double entry, double phi) {
    return {"premature_exit", "AAA/USD",
            {{"delta_p", dp}, {"p_entry", entry}, {"phi", phi}}, "ev3"};
}

} // namespace

TEST_CASE("parameter vector packing round-trips") {
    BotParams p = base_params();
    ThetaLayout layout = layout_for(p);
    CHECK(layout.dim() == 8);
    CHECK(layout.component_name(0) == "q_1");
    CHECK(layout.component_name(3) == "p_1");
    CHECK(layout.component_name(6) == "h_1");

    std::vector<Fixed> theta = theta_from_params(p);
    REQUIRE(theta.size() == 8);
    CHECK(theta[0] == fx("0.2"));
    CHECK(theta[3] == Fixed::from_int(1));
    CHECK(theta[6] == Fixed::from_int(1));

    theta[0] = fx("0.15");
    theta[5] = fx("4.5");
    theta[6] = fx("1.25");
    BotParams q = params_with_theta(p, theta);
    CHECK(q.entry_fractions[0] == fx("0.15"));
    CHECK(q.entry_exponents[2] == fx("4.5"));
    CHECK(q.exit_exponents[0] == fx("1.25"));
    CHECK(theta_from_params(q) == theta);
    CHECK(q.capital_per_pair == p.capital_per_pair); // untouched fields remain

    CHECK_THROWS_AS(params_with_theta(p, std::vector<Fixed>(3)), ValidationError);
}

TEST_CASE("feedback risk events become scenarios with their quantities") {
    Feedback fb;
    fb.risk_events.push_back(
        {"drawdown_cascade", "", 0, 1000, {{"drawdown", 0.57}, {"entry_fills", 6.0}}});
    fb.risk_events.push_back(
        {"boundary_breach", "AAA/USD", 10, 20,
         {{"p_peak", 126.0}, {"p_before", 100.0}, {"phi", 0.1}}});
    fb.risk_events.push_back(
        {"premature_exit", "AAA/USD", 10, 20,
         {{"delta_p", 50.0}, {"p_entry", 100.0}, {"phi", 0.05}, {"captured", 0.2}}});
    fb.risk_events.push_back({"deviation_block", "AAA/USD", 5, 5, {{"magnitude", 0.02}}});

    std::vector<RiskScenario> s = detect_scenarios(fb);
    REQUIRE(s.size() == 3); // the operational guard event is not a scenario
    CHECK(s[0].kind == "position_cascade");
    CHECK(s[0].quantities.at("drawdown") == 0.57);
    CHECK(s[1].kind == "boundary_breach");
    CHECK(s[1].quantities.at("p_peak") == 126.0);
    CHECK(s[1].source == "boundary_breach@10..20/AAA/USD");
    CHECK(s[2].kind == "premature_exit");
    CHECK(s[2].quantities.at("delta_p") == 50.0);

    CHECK(detect_scenarios(Feedback{}).empty());

    Feedback bad;
    bad.risk_events.push_back(
        {"boundary_breach", "A", 0, 1, {{"p_peak", -5.0}, {"p_before", 100.0}, {"phi", 0.1}}});
    CHECK_THROWS_AS(detect_scenarios(bad), ValidationError);
}

TEST_CASE("risk budget splits capital across parallel pairs with margin") {
    RiskBudget b;
    b.global_capital = Fixed::from_int(800);
    b.n_parallel = 1;
    CHECK(b.q_max() == Fixed::from_int(400));
    b.n_parallel = 4;
    CHECK(b.q_max() == Fixed::from_int(100));
    b.n_parallel = 0;
    CHECK_THROWS_AS(validate_risk_budget(b), ValidationError);
}

TEST_CASE("exposure cap compiles to a unit-coefficient sum bound") {
    BotParams p = base_params(); // A = 1000, c_m cap = 1
    RiskBudget budget;
    budget.global_capital = Fixed::from_int(800); // Q_max = 400
    auto cs = compile_constraints({cascade_scenario()}, p, budget);
    REQUIRE(cs.size() == 1);
    const LinearConstraint& c = cs[0];
    CHECK(c.relation == Relation::le);
    CHECK(c.bound == 0.4);
    CHECK(c.fixed_bound == fx("0.4"));
    CHECK(c.coeffs == std::vector<double>{1, 1, 1, 0, 0, 0, 0, 0});
    CHECK(c.satisfied({fx("0.1"), fx("0.1"), fx("0.2"), Fixed(), Fixed(),
                       Fixed(), Fixed(), Fixed()}));
    CHECK_FALSE(c.satisfied({fx("0.1"), fx("0.1"), fx("0.20000001"), Fixed(),
                             Fixed(), Fixed(), Fixed(), Fixed()}));
}

TEST_CASE("surge escape compiles to a strict lower bound on the top exponent") {
    auto cs = compile_constraints({breach_scenario(121, 100, 0.1)}, base_params(),
                                  RiskBudget{});
    REQUIRE(cs.size() == 1);
    const LinearConstraint& c = cs[0];
    CHECK(c.relation == Relation::ge);
    CHECK(c.bound == 2.00000001); // closed form 2 plus one grid unit of slack
    CHECK(c.fixed_bound.raw() == 200000001);
    CHECK(c.coeffs == std::vector<double>{0, 0, 0, 0, 0, 1, 0, 0}); // p_3 only
    CHECK_FALSE(c.satisfied({Fixed(), Fixed(), Fixed(), Fixed(), Fixed(),
                             Fixed::from_int(2), Fixed(), Fixed()}));
    CHECK(c.satisfied({Fixed(), Fixed(), Fixed(), Fixed(), Fixed(),
                       fx("2.00000001"), Fixed(), Fixed()}));
}

TEST_CASE("missed trend compiles to a lower bound on the first exit level") {
    auto cs = compile_constraints({exit_scenario(10, 100, 0.05)}, base_params(),
                                  RiskBudget{});
    REQUIRE(cs.size() == 1);
    const LinearConstraint& c = cs[0];
    CHECK(c.relation == Relation::ge);
    CHECK(c.bound == 1.9534711847524087); // log(1.1)/log(1.05)
    CHECK(c.fixed_bound.raw() == 195347119);
    CHECK(c.coeffs == std::vector<double>{0, 0, 0, 0, 0, 0, 1, 0}); // h_1 only
}

TEST_CASE("flat volatility makes log-based constraints degenerate") {
    CHECK_THROWS_AS(
        compile_constraints({breach_scenario(121, 100, 0.0)}, base_params(), RiskBudget{}),
        DegenerateScenarioError);
    CHECK_THROWS_AS(
        compile_constraints({exit_scenario(10, 100, 0.0)}, base_params(), RiskBudget{}),
        DegenerateScenarioError);
    // The exposure cap involves no logarithm, so zero volatility is fine there.
    CHECK_NOTHROW(
        compile_constraints({cascade_scenario()}, base_params(), RiskBudget{}));
}

TEST_CASE("compiled bounds match independent closed forms") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u01(0.001, 1.0);
    std::uniform_real_distribution<double> price(1.0, 1000.0);
    std::uniform_real_distribution<double> ratio(1.001, 10.0);
    BotParams p = base_params();

    for (int trial = 0; trial < 1000; ++trial) {
        // Exposure cap.
        RiskBudget budget;
        budget.global_capital =
            Fixed::from_double(price(rng) * 1000.0);
        budget.n_parallel = 1 + static_cast<int>(rng() % 8);
        auto c1 = compile_constraints({cascade_scenario()}, p, budget);
        double expect1 = budget.q_max().to_double() /
                         (p.capital_per_pair.to_double() *
                          p.cap_weights.cap.to_double() * 1.0);
        CHECK(std::abs(c1[0].bound - expect1) <= 1e-12 * std::abs(expect1));

        // Surge bound.
        double before = price(rng), r = ratio(rng), phi = u01(rng);
        auto c2 = compile_constraints({breach_scenario(before * r, before, phi)},
                                      p, RiskBudget{});
        double expect2 =
            std::log((before * r) / before) / std::log1p(phi) + 1e-8;
        CHECK(std::abs(c2[0].bound - expect2) <= 1e-12 * std::abs(expect2));

        // Trend-capture bound.
        double entry = price(rng), dp = price(rng), phi3 = u01(rng);
        auto c3 = compile_constraints({exit_scenario(dp, entry, phi3)}, p,
                                      RiskBudget{});
        double expect3 = std::log1p(dp / entry) / std::log1p(phi3);
        CHECK(std::abs(c3[0].bound - expect3) <= 1e-12 * std::abs(expect3));

        // The grid roundings are conservative: a vector meeting the fixed
        // bound meets the real bound.
        CHECK(c2[0].fixed_bound.to_double() >= c2[0].bound - 1e-14);
        CHECK(c3[0].fixed_bound.to_double() >= c3[0].bound - 1e-14);
        CHECK(c1[0].fixed_bound.to_double() <= c1[0].bound + 1e-14);
    }
}

// -------------------------------------------------------------- region algebra

namespace {

std::vector<ComponentInterval> q_box(std::size_t m, const char* lo, const char* hi,
                                     const ThetaLayout& layout) {
    std::vector<ComponentInterval> box = default_search_box(layout);
    for (std::size_t i = 0; i < m; ++i) box[layout.q_index(i)] = {fx(lo), fx(hi)};
    return box;
}

LinearConstraint q_sum_le(const ThetaLayout& layout, const char* bound) {
    LinearConstraint c;
    c.coeffs.assign(layout.dim(), 0.0);
    for (std::size_t i = 0; i < layout.entry_levels; ++i) {
        c.coeffs[layout.q_index(i)] = 1.0;
    }
    c.relation = Relation::le;
    c.bound = fx(bound).to_double();
    c.fixed_bound = fx(bound);
    c.provenance = std::string("test: sum(q) <= ") + bound;
    return c;
}

} // namespace

TEST_CASE("no constraints leave the region equal to the box") {
    ThetaLayout layout{2, 1};
    auto box = default_search_box(layout);
    auto r = feasible_region({}, layout, box);
    REQUIRE(std::holds_alternative<FeasibleRegion>(r));
    const FeasibleRegion& region = std::get<FeasibleRegion>(r);
    for (std::size_t i = 0; i < layout.dim(); ++i) {
        CHECK(region.intervals[i].lo == box[i].lo);
        CHECK(region.intervals[i].hi == box[i].hi);
    }
    CHECK_FALSE(region.q_sum_cap.has_value());
    CHECK(region.contains(region.canonical_point()));
}

TEST_CASE("a workable sum cap keeps the region feasible") {
    ThetaLayout layout{2, 1};
    auto box = q_box(2, "0.05", "0.5", layout);
    auto r = feasible_region({q_sum_le(layout, "0.4")}, layout, box);
    REQUIRE(std::holds_alternative<FeasibleRegion>(r));
    const FeasibleRegion& region = std::get<FeasibleRegion>(r);
    REQUIRE(region.q_sum_cap.has_value());
    CHECK(*region.q_sum_cap == fx("0.4"));
    std::vector<Fixed> inside = {fx("0.2"), fx("0.2"), fx("1"), fx("2"), fx("1")};
    CHECK(region.contains(inside));
    std::vector<Fixed> outside = {fx("0.3"), fx("0.2"), fx("1"), fx("2"), fx("1")};
    CHECK_FALSE(region.contains(outside));
}

TEST_CASE("an impossible sum cap yields a certificate naming the clash") {
    ThetaLayout layout{2, 1};
    auto box = q_box(2, "0.05", "0.5", layout);
    auto r = feasible_region({q_sum_le(layout, "0.05")}, layout, box);
    REQUIRE(std::holds_alternative<InfeasibilityCertificate>(r));
    const InfeasibilityCertificate& cert = std::get<InfeasibilityCertificate>(r);
    CHECK(cert.reason.find("0.05") != std::string::npos);
    REQUIRE(cert.conflicts.size() == 3); // the cap plus both lower bounds
    CHECK(cert.conflicts[0].find("sum(q)") != std::string::npos);
    CHECK(cert.conflicts[1].find("q_1") != std::string::npos);
}

TEST_CASE("a lower bound above the box is infeasible for one component") {
    BotParams p = base_params();
    ThetaLayout layout = layout_for(p);
    auto cs = compile_constraints({breach_scenario(10000, 1, 0.001)}, p, RiskBudget{});
    // bound = ln(10000)/ln(1.001) ~ 9215 — far above the default box top of 10
    auto r = feasible_region(cs, layout, default_search_box(layout));
    REQUIRE(std::holds_alternative<InfeasibilityCertificate>(r));
    const auto& cert = std::get<InfeasibilityCertificate>(r);
    CHECK(cert.reason.find("p_3") != std::string::npos);
    REQUIRE(cert.conflicts.size() == 2);
}

TEST_CASE("tightening bounds narrow intervals without reordering them") {
    BotParams p = base_params();
    ThetaLayout layout = layout_for(p);
    auto cs = compile_constraints(
        {breach_scenario(121, 100, 0.1), exit_scenario(10, 100, 0.05)}, p,
        RiskBudget{});
    auto all = structural_constraints(layout);
    all.insert(all.end(), cs.begin(), cs.end());
    auto r = feasible_region(all, layout, default_search_box(layout));
    REQUIRE(std::holds_alternative<FeasibleRegion>(r));
    const FeasibleRegion& region = std::get<FeasibleRegion>(r);
    CHECK(region.intervals[layout.p_index(2)].lo.raw() == 200000001);
    CHECK(region.intervals[layout.h_index(0)].lo.raw() == 195347119);
    CHECK(region.q_sum_cap == Fixed::from_int(1));
    std::vector<Fixed> pt = region.canonical_point();
    CHECK(region.contains(pt));
    BotParams refit = params_with_theta(p, pt);
    CHECK_NOTHROW(validate_params(refit));
}

// ------------------------------------------------------------------ the search

namespace {

/// Deterministic concave score peaking at a chosen target: no simulation,
/// so search behavior is testable in isolation.
Evaluator quadratic_peak(std::vector<double> target) {
    return [target](const std::vector<Fixed>& theta,
                    std::uint64_t) -> std::map<std::string, double> {
        double d2 = 0.0;
        for (std::size_t i = 0; i < theta.size(); ++i) {
            double d = theta[i].to_double() - target[i];
            d2 += d * d;
        }
        return {{"score", -d2}};
    };
}

ObjectiveSpec score_objective() {
    ObjectiveSpec o;
    o.terms = {{"score", 1.0}};
    o.seeds = {7};
    return o;
}

} // namespace

TEST_CASE("objective weights normalize and reject nonsense") {
    ObjectiveSpec o;
    o.terms = {{"a", 3.0}, {"b", 1.0}};
    ObjectiveSpec n = normalize_objective(o);
    CHECK(n.terms[0].weight == 0.75);
    CHECK(n.terms[1].weight == 0.25);

    o.terms = {{"a", -1.0}};
    CHECK_THROWS_AS(normalize_objective(o), ValidationError);
    o.terms = {{"a", 0.0}};
    CHECK_THROWS_AS(normalize_objective(o), ValidationError);
    o.terms = {};
    CHECK_THROWS_AS(normalize_objective(o), ValidationError);
    o.terms = {{"a", 1.0}};
    o.seeds = {};
    CHECK_THROWS_AS(normalize_objective(o), ValidationError);
}

TEST_CASE("a single-point region returns that point regardless of objective") {
    ThetaLayout layout{2, 1};
    std::vector<ComponentInterval> box = {
        {fx("0.2"), fx("0.2")}, {fx("0.3"), fx("0.3")}, {fx("1"), fx("1")},
        {fx("2"), fx("2")},     {fx("1.5"), fx("1.5")},
    };
    auto r = feasible_region({}, layout, box);
    REQUIRE(std::holds_alternative<FeasibleRegion>(r));
    SearchResult res = solve_parameters(std::get<FeasibleRegion>(r),
                                        score_objective(),
                                        quadratic_peak({9, 9, 9, 9, 9}), 20, 1);
    CHECK(res.theta_star ==
          std::vector<Fixed>{fx("0.2"), fx("0.3"), fx("1"), fx("2"), fx("1.5")});
}

TEST_CASE("the reported optimum is the maximum of the audit log") {
    BotParams p = base_params();
    ThetaLayout layout = layout_for(p);
    auto r = feasible_region(structural_constraints(layout), layout,
                             default_search_box(layout));
    REQUIRE(std::holds_alternative<FeasibleRegion>(r));
    const FeasibleRegion& region = std::get<FeasibleRegion>(r);
    SearchResult res = solve_parameters(
        region, score_objective(),
        quadratic_peak({0.1, 0.2, 0.3, 1, 2, 3, 1, 2}), 200, 42);

    CHECK(region.contains(res.theta_star));
    double max_seen = -1e300;
    for (const EvaluatedCandidate& c : res.audit) {
        if (c.failed) continue;
        CHECK(region.contains(c.theta));
        max_seen = std::max(max_seen, c.score);
    }
    CHECK(res.score == max_seen);
    CHECK(res.audit.size() > 50); // the budget was actually spent

    // Determinism: same seed, same search, byte for byte.
    SearchResult res2 = solve_parameters(
        region, score_objective(),
        quadratic_peak({0.1, 0.2, 0.3, 1, 2, 3, 1, 2}), 200, 42);
    CHECK(res2.theta_star == res.theta_star);
    CHECK(res2.score == res.score);
    CHECK(res2.audit.size() == res.audit.size());
}

TEST_CASE("adding an exposure cap never improves the best objective") {
    BotParams p = base_params();
    ThetaLayout layout = layout_for(p);
    // Peak wants the q block at 0.5 each (sum 1.5): outside any tight cap.
    Evaluator eval = quadratic_peak({0.5, 0.5, 0.5, 1, 2, 3, 1, 2});

    auto free_r = feasible_region({}, layout, default_search_box(layout));
    REQUIRE(std::holds_alternative<FeasibleRegion>(free_r));
    SearchResult free_res = solve_parameters(std::get<FeasibleRegion>(free_r),
                                             score_objective(), eval, 300, 9);

    auto capped = feasible_region({q_sum_le(layout, "0.4")}, layout,
                                  default_search_box(layout));
    REQUIRE(std::holds_alternative<FeasibleRegion>(capped));
    const FeasibleRegion& capped_region = std::get<FeasibleRegion>(capped);
    SearchResult capped_res = solve_parameters(capped_region, score_objective(),
                                               eval, 300, 9);

    Fixed q_sum;
    for (std::size_t i = 0; i < layout.entry_levels; ++i) {
        q_sum += capped_res.theta_star[layout.q_index(i)];
    }
    CHECK(q_sum <= fx("0.4"));
    CHECK(capped_res.score <= free_res.score);
}

TEST_CASE("evaluator failures are logged and skipped, never fatal") {
    ThetaLayout layout{2, 1};
    auto r = feasible_region({}, layout, default_search_box(layout));
    REQUIRE(std::holds_alternative<FeasibleRegion>(r));
    int calls = 0;
    Evaluator flaky = [&calls](const std::vector<Fixed>& theta,
                               std::uint64_t) -> std::map<std::string, double> {
        ++calls;
        if (theta[0] > fx("0.5")) throw std::runtime_error("synthetic failure");
        return {{"score", theta[0].to_double()}};
    };
    SearchResult res = solve_parameters(std::get<FeasibleRegion>(r),
                                        score_objective(), flaky, 120, 3);
    bool saw_failure = false;
    for (const EvaluatedCandidate& c : res.audit) {
        if (c.failed) {
            saw_failure = true;
            CHECK(c.note.find("synthetic failure") != std::string::npos);
        }
    }
    CHECK(saw_failure);
    CHECK(res.theta_star[0] <= fx("0.5"));
    CHECK(calls > 0);

    Evaluator always = [](const std::vector<Fixed>&,
                          std::uint64_t) -> std::map<std::string, double> {
        throw std::runtime_error("down");
    };
    CHECK_THROWS_AS(solve_parameters(std::get<FeasibleRegion>(r),
                                     score_objective(), always, 20, 3),
                    Error);
}

TEST_CASE("multi-seed scores average and the front is non-dominated") {
    ThetaLayout layout{1, 1};
    auto r = feasible_region({}, layout, default_search_box(layout));
    REQUIRE(std::holds_alternative<FeasibleRegion>(r));
    ObjectiveSpec o;
    o.terms = {{"a", 0.5}, {"b", 0.5}};
    o.seeds = {1, 2, 3};
    // Two opposed goals: a rises with q_1, b falls with it; the seed adds a
    // deterministic offset that must average out identically everywhere.
    Evaluator eval = [](const std::vector<Fixed>& theta,
                        std::uint64_t seed) -> std::map<std::string, double> {
        double q = theta[0].to_double();
        double bump = static_cast<double>(seed); // mean over {1,2,3} = 2
        return {{"a", q + bump}, {"b", 1.0 - q + bump}};
    };
    SearchResult res = solve_parameters(std::get<FeasibleRegion>(r), o, eval, 60, 4);
    for (const EvaluatedCandidate& c : res.audit) {
        REQUIRE_FALSE(c.failed);
        CHECK(c.metrics.at("a") == doctest::Approx(c.theta[0].to_double() + 2.0));
        CHECK(c.score == doctest::Approx(0.5 * (c.metrics.at("a")) +
                                         0.5 * (c.metrics.at("b"))));
    }
    // With a+b constant, no candidate dominates another: all are on the front.
    CHECK(res.pareto.size() == res.audit.size());

    // A strictly dominating evaluator collapses the front to the maximum.
    Evaluator mono = [](const std::vector<Fixed>& theta,
                        std::uint64_t) -> std::map<std::string, double> {
        double q = theta[0].to_double();
        return {{"a", q}, {"b", q}};
    };
    SearchResult res2 = solve_parameters(std::get<FeasibleRegion>(r), o, mono, 60, 4);
    double best_q = -1.0;
    for (const EvaluatedCandidate& c : res2.audit) {
        best_q = std::max(best_q, c.theta[0].to_double());
    }
    for (std::size_t idx : res2.pareto) {
        CHECK(res2.audit[idx].theta[0].to_double() == best_q);
    }
}

// ------------------------------------------------------------- cycle discipline

namespace {

OptimizationCycle cycle(std::int64_t idx, const std::string& level, bool accepted,
                        const std::string& component = "") {
    OptimizationCycle c;
    c.index = idx;
    c.level = level;
    c.component = component;
    c.theta_in = {fx("0.2")};
    c.theta_out = {fx("0.25")};
    c.constraints = {"test"};
    c.accepted = accepted;
    c.notes = "n";
    return c;
}

} // namespace

TEST_CASE("cycle records round-trip through their serialized form") {
    OptimizationCycle c = cycle(3, "function", false, "log_return_volatility");
    nlohmann::ordered_json j = cycle_to_json(c);
    OptimizationCycle back = cycle_from_json(nlohmann::json::parse(j.dump()));
    CHECK(back.index == 3);
    CHECK(back.level == "function");
    CHECK(back.component == "log_return_volatility");
    CHECK(back.theta_in == c.theta_in);
    CHECK(back.theta_out == c.theta_out);
    CHECK(back.accepted == false);
    CHECK(back.notes == "n");
}

TEST_CASE("escalated cycles must follow a failure at or below their level") {
    CHECK_NOTHROW(validate_cycle_log({cycle(0, "parameter", true)}));
    CHECK_NOTHROW(validate_cycle_log({cycle(0, "parameter", false),
                                      cycle(1, "function", false, "v2"),
                                      cycle(2, "function", false, "v3"),
                                      cycle(3, "strategy", true, "t2")}));
    // Escalation with no failure before it.
    CHECK_THROWS_AS(validate_cycle_log({cycle(0, "function", false, "v2")}),
                    ValidationError);
    CHECK_THROWS_AS(validate_cycle_log({cycle(0, "parameter", true),
                                        cycle(1, "function", false, "v2")}),
                    ValidationError);
    // Jumping below a strategy cycle without a fresh parameter cycle.
    CHECK_THROWS_AS(validate_cycle_log({cycle(0, "parameter", false),
                                        cycle(1, "strategy", false, "t2"),
                                        cycle(2, "function", false, "v2")}),
                    ValidationError);
    CHECK_THROWS_AS(validate_cycle_log({cycle(0, "warp", false)}), ValidationError);
}

TEST_CASE("escalation walks the registries and then reports terminal") {
    Registries regs;
    regs.function_variants = {"oc_range_volatility", "v2", "v3"};
    regs.strategy_templates = {"grid_long", "t2"};
    BotParams current = base_params(); // uses oc_range_volatility, grid_long

    // Passing latest cycle: stay at parameter level.
    Intervention i0 = escalate({cycle(0, "parameter", true)}, regs, current);
    CHECK(i0.level == "parameter");
    CHECK(escalate({}, regs, current).level == "parameter");

    // First failure: first unused function variant (not the one in use).
    Intervention i1 = escalate({cycle(0, "parameter", false)}, regs, current);
    CHECK(i1.level == "function");
    CHECK(i1.component == "v2");

    // v2 already tried and failed: next variant.
    Intervention i2 = escalate(
        {cycle(0, "parameter", false), cycle(1, "function", false, "v2")}, regs,
        current);
    CHECK(i2.level == "function");
    CHECK(i2.component == "v3");

    // All function variants exhausted: swap strategy template.
    std::vector<OptimizationCycle> hist = {cycle(0, "parameter", false),
                                           cycle(1, "function", false, "v2"),
                                           cycle(2, "function", false, "v3")};
    Intervention i3 = escalate(hist, regs, current);
    CHECK(i3.level == "strategy");
    CHECK(i3.component == "t2");

    // Everything exhausted: terminal.
    hist.push_back(cycle(3, "strategy", false, "t2"));
    Intervention i4 = escalate(hist, regs, current);
    CHECK(i4.level == "terminal");
    CHECK(i4.component.empty());
}

// ------------------------------------------------------------ pair calibration

TEST_CASE("pair calibration is a deterministic function of the profile") {
    BotParams base = base_params();
    PairProfile a{"AAA/USD",
                  {fx("0.02"), fx("0.05"), fx("0.03"), fx("0.04"), fx("0.06")},
                  Fixed::from_int(20'000'000)};
    InitializedParams ia = initialize_pair_params(a, 3, base);
    InitializedParams ib = initialize_pair_params(a, 3, base);
    CHECK_FALSE(ia.defaults_used);
    CHECK(params_to_json(ia.params).dump() == params_to_json(ib.params).dump());
    CHECK(ia.params.phi_req == fx("0.04")); // median of the five
    CHECK(ia.params.capital_per_pair == base.capital_per_pair); // deep liquidity
    CHECK_FALSE(ia.rationale.empty());
    CHECK_NOTHROW(validate_params(ia.params));

    // Even-length history: median is the mean of the middle two.
    PairProfile even{"BBB/USD", {fx("0.02"), fx("0.04"), fx("0.06"), fx("0.08")},
                     Fixed::from_int(500'000)};
    InitializedParams ie = initialize_pair_params(even, 3, base);
    CHECK(ie.params.phi_req == fx("0.05"));
    CHECK(ie.params.capital_per_pair ==
          Fixed::div(base.capital_per_pair, Fixed::from_int(4))); // thin tier

    PairProfile mid = even;
    mid.turnover_24h = Fixed::from_int(5'000'000);
    CHECK(initialize_pair_params(mid, 3, base).params.capital_per_pair ==
          Fixed::div(base.capital_per_pair, Fixed::from_int(2)));
}

TEST_CASE("wider volatility dispersion widens the ladder component-wise") {
    BotParams base = base_params();
    PairProfile narrow{"N", {fx("0.03"), fx("0.04"), fx("0.05")},
                       Fixed::from_int(20'000'000)};
    PairProfile wide{"W", {fx("0.02"), fx("0.04"), fx("0.06")},
                     Fixed::from_int(20'000'000)};
    BotParams pn = initialize_pair_params(narrow, 3, base).params;
    BotParams pw = initialize_pair_params(wide, 3, base).params;
    REQUIRE(pn.entry_exponents.size() == pw.entry_exponents.size());
    for (std::size_t i = 0; i < pn.entry_exponents.size(); ++i) {
        CHECK(pw.entry_exponents[i] >= pn.entry_exponents[i]);
    }
    CHECK(pw.entry_exponents.back() > pn.entry_exponents.back());
    CHECK_NOTHROW(validate_params(pn));
    CHECK_NOTHROW(validate_params(pw));
}

TEST_CASE("insufficient history falls back to flagged defaults") {
    BotParams base = base_params();
    PairProfile empty{"E", {}, Fixed::from_int(1000)};
    InitializedParams ie = initialize_pair_params(empty, 3, base);
    CHECK(ie.defaults_used);
    CHECK(params_to_json(ie.params).dump() == params_to_json(base).dump());
    REQUIRE_FALSE(ie.rationale.empty());
    CHECK(ie.rationale[0].find("0 of 3") != std::string::npos);

    PairProfile zeros{"Z", {Fixed(), Fixed(), Fixed()}, Fixed::from_int(1000)};
    CHECK(initialize_pair_params(zeros, 3, base).defaults_used);
}

TEST_CASE("constraint descriptions name components and derivations") {
    BotParams p = base_params();
    auto cs = compile_constraints(
        {cascade_scenario(), breach_scenario(121, 100, 0.1)}, p,
        RiskBudget{Fixed::from_int(800), 1, Fixed::from_int(2)});
    std::string text = describe_constraints(cs, layout_for(p));
    CHECK(text.find("q_1 + q_2 + q_3 <= 0.40000000") != std::string::npos);
    CHECK(text.find("p_3 >= 2.00000001") != std::string::npos);
    CHECK(text.find("position_cascade") != std::string::npos);
    CHECK(text.find("log(P_peak/P_before)") != std::string::npos);
}
