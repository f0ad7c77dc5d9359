#include "doctest.h"
#include "fixtures.hpp"

using namespace mfgc;

namespace {

PriceVec price(double a) {
    PriceVec p(1);
    p << a;
    return p;
}

/// scalar root of G(P) = P - Psi(-(wbar + P)) for L = v^2/2, phi = 1, by bisection
double bisect_price(const ModelSpec& model, double wbar) {
    auto G = [&](double P) { return P - price_psi(model, 0.0, price(-(wbar + P)))(0); };
    double lo = -100.0, hi = 100.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (G(mid) > 0 ? hi : lo) = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace

TEST_CASE("demand examples") {
    const ModelSpec m = fixtures::homogeneous(8);
    Rng rng(31);
    const Slice dens = fixtures::random_density(m.grid, rng);
    CHECK(demand(m, 0.0, Slice(8, 0.0), dens)(0) == 0.0);
    CHECK(demand(m, 0.0, Slice(8, 0.7), dens)(0) == doctest::Approx(0.7).epsilon(1e-14));

    ModelSpec two = m;
    WeightMat w(1, 1);
    w << 2.0;
    two.phi = PhiWeight::constant(two.grid, w);
    const Slice s = fixtures::sampled(m.grid, [](double x) { return std::sin(fixtures::kTwoPi * x); });
    CHECK(std::abs(demand(two, 0.0, s, Slice(8, 1.0))(0)) < 1e-15);

    // Cauchy-Schwarz bound
    for (int trial = 0; trial < 100; ++trial) {
        const Slice v = fixtures::random_slice(8, rng, -3, 3);
        const Slice mm = fixtures::random_density(m.grid, rng);
        double e2 = 0.0;
        for (int i = 0; i < 8; ++i) e2 += v[i] * v[i] * mm[i] * m.grid.h();
        CHECK(std::abs(demand(two, 0.0, v, mm)(0)) <= 2.0 * std::sqrt(e2) + 1e-14);
    }
}

TEST_CASE("J functional examples") {
    const ModelSpec m = fixtures::homogeneous(8, 0.05, 1.0, 0.0);
    const Slice uniform(8, 1.0);
    CHECK(J_functional(m, 0.0, Slice(8, 0.0), uniform, Slice(8, 0.0)) == 0.0);
    CHECK(J_functional(m, 0.0, Slice(8, 1.0), uniform, Slice(8, 0.0)) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("closed-form equilibrium") {
    const ModelSpec zero = fixtures::homogeneous(16, 0.05, 3.0, 0.0);
    EquilibriumResult r = solve_equilibrium(zero, 0.0, Slice(16, 1.0), Slice(16, 0.0));
    CHECK(std::abs(r.P(0)) < 1e-12);
    CHECK(sup_norm(r.v) < 1e-12);

    const ModelSpec m = fixtures::homogeneous(16, 0.05, 1.0, 0.0);
    Rng rng(32);
    const Slice dens = fixtures::random_density(m.grid, rng, 0.2);
    // w with int w m = 0.5
    Slice w = fixtures::random_slice(16, rng, -1, 1);
    double wbar = 0.0;
    for (int i = 0; i < 16; ++i) wbar += w[i] * dens[i] * m.grid.h();
    for (double& x : w) x += 0.5 - wbar;
    r = solve_equilibrium(m, 0.0, dens, w);
    CHECK(r.P(0) == doctest::Approx(-0.25).epsilon(1e-10));
    for (int i = 0; i < 16; ++i) CHECK(r.v[i] == doctest::Approx(-w[i] + 0.25).epsilon(1e-10));
    CHECK(equilibrium_residual(m, 0.0, r.v, r.P, dens, w) <= 1e-12);
    CHECK(r.bound_ok);

    const ModelSpec m1 = fixtures::homogeneous(16, 0.05, 1.0, 1.0);
    r = solve_equilibrium(m1, 0.0, dens, Slice(16, 0.0));
    CHECK(r.P(0) == doctest::Approx(0.5).epsilon(1e-10));
    for (double x : r.v) CHECK(x == doctest::Approx(-0.5).epsilon(1e-10));
    CHECK(equilibrium_residual(m1, 0.0, Slice(16, 0.0), price(0.0), dens, Slice(16, 0.0)) ==
          doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("random affine family against the closed form and bisection") {
    Rng rng(33);
    for (int trial = 0; trial < 100; ++trial) {
        const double a = rng.uniform(0, 5), b = rng.uniform(-2, 2), wbar = rng.uniform(-2, 2);
        const ModelSpec m = fixtures::homogeneous(8, 0.05, a, b);
        const Slice dens = fixtures::random_density(m.grid, rng, 0.1);
        Slice w = fixtures::random_slice(8, rng, -1, 1);
        double shift = 0.0;
        for (int i = 0; i < 8; ++i) shift += w[i] * dens[i] * m.grid.h();
        for (double& x : w) x += wbar - shift;
        const EquilibriumResult r = solve_equilibrium(m, 0.0, dens, w);
        const double closed = (b - a * wbar) / (1 + a);
        CHECK(std::abs(r.P(0) - closed) <= 1e-9);
        CHECK(std::abs(bisect_price(m, wbar) - closed) <= 1e-9);
    }
}

TEST_CASE("first-order condition and minimizer property") {
    // k = 2, d = 2, non-constant phi
    ModelSpec m;
    m.grid = TorusGrid::make(2, 6);
    m.k = 2;
    m.lagrangian = quadratic_lagrangian(m.grid, 1.5);
    PriceMat a(2, 2);
    a << 2.0, 0.5, 0.5, 1.0;
    PriceVec b(2);
    b << 0.3, -0.2;
    m.price = affine_price(a, b);
    m.phi.k = 2;
    m.phi.d = 2;
    Rng rng(34);
    for (std::size_t i = 0; i < m.grid.size() * 4; ++i) m.phi.values.push_back(rng.uniform(-1, 1));
    m = finalize_model(m);

    const Slice dens = fixtures::random_density(m.grid, rng);
    const VectorSlice w = fixtures::random_slice(m.grid.size() * 2, rng, -1, 1);
    const EquilibriumResult r = solve_equilibrium(m, 0.0, dens, w);
    CHECK(r.residual <= 1e-10);
    const PriceVec psi = price_psi(m, 0.0, demand(m, 0.0, r.v, dens));
    for (std::size_t x = 0; x < m.grid.size(); ++x) {
        SpaceVec v(2);
        v << r.v[2 * x], r.v[2 * x + 1];
        const SpaceVec foc = m.phi.at(x).transpose() * psi + lagrangian_grad(m, x, 0.0, v) +
                             SpaceVec(Eigen::Map<const Eigen::Vector2d>(&w[2 * x]));
        CHECK(foc.norm() <= 1e-9);
    }
    const double J0 = J_functional(m, 0.0, r.v, dens, w);
    for (int trial = 0; trial < 100; ++trial) {
        VectorSlice v = r.v;
        const double scale = trial < 50 ? 1e-3 : 0.5;
        for (double& x : v) x += rng.uniform(-scale, scale);
        CHECK(J0 <= J_functional(m, 0.0, v, dens, w) + 1e-12);
    }
    // a perturbed v costs at least its perturbation in the residual
    VectorSlice v = r.v;
    v[5] += 1e-4;
    CHECK(equilibrium_residual(m, 0.0, v, r.P, dens, w) >= 1e-4 * 1.5 / 2);
}

TEST_CASE("uniqueness from different initial prices") {
    const ModelSpec m = fixtures::homogeneous(16, 0.05, 4.0, 0.5);
    Rng rng(35);
    for (int trial = 0; trial < 20; ++trial) {
        const Slice dens = fixtures::random_density(m.grid, rng);
        const Slice w = fixtures::random_slice(16, rng, -2, 2);
        const EquilibriumResult r0 = solve_equilibrium(m, 0.0, dens, w);
        const EquilibriumResult r1 = solve_equilibrium(m, 0.0, dens, w, {}, price(rng.uniform(-10, 10)));
        CHECK(std::abs(r0.P(0) - r1.P(0)) <= 1e-9);
        double l2 = 0.0;
        for (int i = 0; i < 16; ++i) l2 += std::pow(r0.v[i] - r1.v[i], 2) * dens[i] * m.grid.h();
        CHECK(std::sqrt(l2) <= 1e-9);
    }
}

TEST_CASE("stiff price map needs the Newton fallback") {
    const ModelSpec m = fixtures::homogeneous(16, 0.05, 40.0, 1.0);
    const EquilibriumResult r = solve_equilibrium(m, 0.0, Slice(16, 1.0), Slice(16, 0.3));
    CHECK(r.newton_used);
    CHECK(r.P(0) == doctest::Approx((1.0 - 40.0 * 0.3) / 41.0).epsilon(1e-10));
}

TEST_CASE("monitor bound holds on the ball") {
    const ModelSpec m = fixtures::homogeneous(16, 0.05, 2.0, 1.0);
    Rng rng(36);
    const double R = 3.0;
    const EquilibriumBounds bound = equilibrium_bounds_for_radius(m, 0.0, R);
    for (int trial = 0; trial < 50; ++trial) {
        const Slice dens = fixtures::random_density(m.grid, rng);
        const Slice w = fixtures::random_slice(16, rng, -R, R);
        const EquilibriumResult r = solve_equilibrium(m, 0.0, dens, w);
        CHECK(r.bound_ok);
        CHECK(std::abs(r.P(0)) <= bound.P);
        CHECK(sup_norm(r.v) <= bound.v_sup);
    }
}

TEST_CASE("price depends continuously on w") {
    const ModelSpec m = fixtures::homogeneous(16, 0.05, 1.0, 0.2);
    Rng rng(37);
    const Slice dens = fixtures::random_density(m.grid, rng);
    const Slice w = fixtures::random_slice(16, rng, -1, 1);
    const Slice dir = fixtures::random_slice(16, rng, -1, 1);
    const double P0 = solve_equilibrium(m, 0.0, dens, w).P(0);
    double last = 1e300;
    for (int k = 0; k < 20; ++k) {
        Slice w2 = w;
        for (int i = 0; i < 16; ++i) w2[i] += std::ldexp(dir[i], -k);
        const double delta = std::abs(solve_equilibrium(m, 0.0, dens, w2).P(0) - P0);
        if (k > 10) CHECK(delta <= last * 0.5 + 1e-11);
        last = delta;
    }
    CHECK(last < 1e-6);
}

TEST_CASE("options validation and non-convergence") {
    EquilibriumOptions o;
    o.damping = 0.0;
    CHECK_THROWS_AS(o.validate(), MfgcError);
    o = {};
    o.tol_P = 0.0;
    CHECK_THROWS_AS(o.validate(), MfgcError);

    // Psi(z) = 1 - z makes G(P) = -1 - w constant, so there is no root
    const ModelSpec bad = fixtures::homogeneous(8, 0.05, -1.0, 1.0);
    try {
        solve_equilibrium(bad, 0.0, Slice(8, 1.0), Slice(8, 0.1));
        FAIL("expected NonConvergence");
    } catch (const MfgcError& e) {
        CHECK(e.code() == ErrorCode::NonConvergence);
    }
}
