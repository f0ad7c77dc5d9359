#include "doctest.h"
#include "fixtures.hpp"

using namespace mfgc;

namespace {

/// hand solution of the space-homogeneous system with Psi(z) = z + 1
MfgState homogeneous_exact(const Grids& g) {
    MfgState s;
    s.u = ScalarField::filled(g, 0.0);
    for (int j = 0; j <= g.time.steps(); ++j) s.u.slices[j].assign(g.space.size(), -(1.0 - g.time.t(j)) * 0.125);
    s.m = ScalarField::filled(g, 1.0);
    s.v = VectorField::filled(g, -0.5);
    PriceVec p(1);
    p << 0.5;
    s.P.assign(g.time.steps() + 1, p);
    s.tau = 1.0;
    return s;
}

double max_diff(const ScalarField& a, const ScalarField& b) {
    double d = 0.0;
    for (std::size_t j = 0; j < a.slices.size(); ++j) d = std::max(d, sup_distance(a.slices[j], b.slices[j]));
    return d;
}

double max_price_diff(const std::vector<PriceVec>& a, const std::vector<PriceVec>& b) {
    double d = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) d = std::max(d, (a[j] - b[j]).cwiseAbs().maxCoeff());
    return d;
}

}  // namespace

TEST_CASE("residuals examples") {
    const Grids g = make_grids(1, 8, 1.0, 4);
    const MfgState s = initial_state(fixtures::homogeneous(8), g);
    CHECK(residuals(s, s) == 0.0);
    MfgState t = s;
    for (auto& sl : t.u.slices) for (double& x : sl) x += 1e-3;
    CHECK(residuals(s, t) == doctest::Approx(1e-3).epsilon(1e-12));
    t = s;
    t.m.slices[2][5] += 2e-4;
    CHECK(residuals(s, t) == doctest::Approx(2e-4).epsilon(1e-12));
}

TEST_CASE("tau = 0 map ignores its input") {
    const Grids g = make_grids(1, 16, 1.0, 32);
    const ModelSpec m = fixtures::congestion(16);
    Rng rng(51);
    MfgState a = initial_state(m, g);
    MfgState b = a;
    for (auto& sl : b.u.slices) sl = fixtures::random_slice(16, rng, -0.1, 0.1);
    for (auto& sl : b.m.slices) sl = fixtures::random_density(m.grid, rng);
    const SolveOptions o;
    const MapImage ia = apply_map(m, g, a, 0.0, o), ib = apply_map(m, g, b, 0.0, o);
    CHECK(max_diff(ia.image.u, ScalarField::filled(g, 0.0)) == 0.0);
    CHECK(max_diff(ia.image.m, ib.image.m) == 0.0);
    const FpSolution heat = fp_forward(m, g, VectorField::filled(g, 0.0), 0.0);
    CHECK(max_diff(ia.image.m, heat.m) <= 1e-15);
}

TEST_CASE("homogeneous fixed points") {
    const Grids g = make_grids(1, 32, 1.0, 64);
    SolveOptions o;

    const ModelSpec zero_b = fixtures::homogeneous(32, 0.05, 1.0, 0.0);
    MfgState s = initial_state(zero_b, g);
    for (auto& sl : s.m.slices) sl.assign(32, 1.0);
    s.tau = 1.0;
    PicardResult r = picard_step(zero_b, g, s, 1.0, o);
    CHECK(r.residual <= 1e-12);
    CHECK(residuals(s, r.state) <= 1e-12);

    const ModelSpec unit_b = fixtures::homogeneous(32, 0.05, 1.0, 1.0);
    const MfgState exact = homogeneous_exact(g);
    r = picard_step(unit_b, g, exact, 1.0, o);
    CHECK(r.residual <= 1e-9);
    CHECK(max_price_diff(r.state.P, exact.P) <= 1e-9);
    const EquationDefects d = equation_defects(unit_b, g, exact);
    CHECK(d.hjb <= 1e-12);
    CHECK(d.fp <= 1e-12);
    CHECK(d.equilibrium <= 1e-12);
}

TEST_CASE("homogeneous solve reaches the hand solution") {
    const Grids g = make_grids(1, 64, 1.0, 128);
    const ModelSpec m = fixtures::homogeneous(64);
    const SolveResult r = solve_mfgc(m, g);
    CHECK(r.report.converged);
    const MfgState exact = homogeneous_exact(g);
    CHECK(max_price_diff(r.state.P, exact.P) <= 1e-6);
    CHECK(max_diff(r.state.m, exact.m) <= 1e-8);
    for (double x : r.state.u.slices[0]) CHECK(std::abs(x + 0.125) <= 1e-6);
    CHECK(r.report.monitors.ok());
    CHECK(r.report.equilibrium_residuals.size() == 129);
    REQUIRE(r.report.stages.size() == 5);
    for (const auto& st : r.report.stages) {
        CHECK(st.converged);
        CHECK(!st.residuals.empty());
        for (double x : st.residuals) CHECK(std::isfinite(x));
    }
}

TEST_CASE("congestion solve: defects, monitors, determinism") {
    const Grids g = make_grids(1, 16, 1.0, 16);
    const ModelSpec m = fixtures::congestion(16);
    SolveOptions o;
    const SolveResult r = solve_mfgc(m, g, o);
    CHECK(r.report.converged);
    const EquationDefects d = equation_defects(m, g, r.state, o.pde);
    CHECK(d.hjb <= 10 * o.outer_tol);
    CHECK(d.fp <= 10 * o.outer_tol);
    CHECK(d.equilibrium <= 10 * o.outer_tol);
    CHECK(d.mass <= 1e-12);
    CHECK(d.min_m >= 0.0);
    const Monitors& mon = r.report.monitors;
    CHECK(mon.ok());
    CHECK(mon.u_sup <= mon.u_bound);
    CHECK(mon.P_sup <= mon.P_bound);
    CHECK(mon.v_sup <= mon.v_bound);
    CHECK(mon.grad_u_sup <= mon.grad_u_bound);
    // the first stage starts from the exact tau = 0 solution, later stages jump from a converged one
    CHECK(r.report.stages[1].tripwire);
    CHECK(!r.report.warnings.empty());

    const SolveResult again = solve_mfgc(m, g, o);
    CHECK(max_diff(r.state.u, again.state.u) == 0.0);
    CHECK(max_diff(r.state.m, again.state.m) == 0.0);
    CHECK(r.report.total_iterations == again.report.total_iterations);
}

TEST_CASE("tau schedules reach the same state") {
    const Grids g = make_grids(1, 16, 1.0, 16);
    const ModelSpec m = fixtures::congestion(16);
    SolveOptions a, b;
    a.tau_schedule = {0.0, 1.0};
    b.tau_schedule = {0.0, 0.5, 1.0};
    const SolveResult ra = solve_mfgc(m, g, a), rb = solve_mfgc(m, g, b);
    CHECK(max_diff(ra.state.u, rb.state.u) <= 10 * a.outer_tol);
    CHECK(max_diff(ra.state.m, rb.state.m) <= 10 * a.outer_tol);
    CHECK(max_price_diff(ra.state.P, rb.state.P) <= 10 * a.outer_tol);
}

TEST_CASE("options validation") {
    SolveOptions o;
    CHECK_NOTHROW(o.validate(false));
    o.tau_schedule = {0.5, 1.0};
    CHECK_THROWS_AS(o.validate(false), MfgcError);
    CHECK_NOTHROW(o.validate(true));
    o.tau_schedule = {0.0, 0.7, 0.5, 1.0};
    CHECK_THROWS_AS(o.validate(true), MfgcError);
    o.tau_schedule = {0.0, 0.5};
    CHECK_THROWS_AS(o.validate(false), MfgcError);
    o = {};
    o.damping_m = 1.5;
    CHECK_THROWS_AS(o.validate(false), MfgcError);
    o = {};
    o.outer_tol = -1.0;
    CHECK_THROWS_AS(o.validate(false), MfgcError);
}

TEST_CASE("non-convergence carries the partial state") {
    const Grids g = make_grids(1, 16, 1.0, 16);
    const ModelSpec m = fixtures::congestion(16);
    SolveOptions o;
    o.max_outer = 3;
    try {
        solve_mfgc(m, g, o);
        FAIL("expected NonConvergenceError");
    } catch (const NonConvergenceError& e) {
        CHECK(e.code() == ErrorCode::NonConvergence);
        const SolveResult& p = e.partial();
        CHECK(!p.report.converged);
        REQUIRE(!p.report.stages.empty());
        CHECK(p.report.stages.back().residuals.size() == 3);
        CHECK(p.state.m.slices.size() == 17);
        CHECK(std::string(e.what()).find("tau") != std::string::npos);
    }
}

TEST_CASE("initial state with wrong shape is rejected") {
    const Grids g = make_grids(1, 16, 1.0, 16);
    const ModelSpec m = fixtures::congestion(16);
    MfgState s = initial_state(m, g);
    s.u.slices.pop_back();
    SolveOptions o;
    o.tau_schedule = {1.0};
    CHECK_THROWS_AS(solve_mfgc(m, g, o, s), MfgcError);
}
