#include "doctest.h"
#include "fixtures.hpp"

using namespace mfgc;
using fixtures::kTwoPi;

namespace {

std::vector<PriceVec> constant_prices(const Grids& g, double value) {
    PriceVec p(1);
    p << value;
    return std::vector<PriceVec>(g.time.steps() + 1, p);
}

double sine_amplitude(const TorusGrid& g, const Slice& m) {
    double a = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) a += 2.0 * g.h() * m[i] * std::sin(kTwoPi * g.coord(i, 0));
    return a;
}

}  // namespace

TEST_CASE("cyclic tridiagonal solve against a dense oracle") {
    Rng rng(41);
    for (int n : {3, 4, 7, 32}) {
        const double sub = rng.uniform(-1, 0), sup = rng.uniform(-1, 0);
        const double diag = 1.0 + std::abs(sub) + std::abs(sup) + rng.uniform(0, 1);
        const CyclicTridiagonal A(n, sub, diag, sup);
        Eigen::MatrixXd dense = Eigen::MatrixXd::Zero(n, n);
        for (int i = 0; i < n; ++i) {
            dense(i, i) += diag;
            dense(i, (i + n - 1) % n) += sub;
            dense(i, (i + 1) % n) += sup;
        }
        const Slice b = fixtures::random_slice(n, rng, -1, 1);
        const Eigen::VectorXd oracle = dense.partialPivLu().solve(Eigen::Map<const Eigen::VectorXd>(b.data(), n));
        Slice x = b;
        A.solve(x);
        for (int i = 0; i < n; ++i) CHECK(x[i] == doctest::Approx(oracle(i)).epsilon(1e-12));
        CHECK(A.residual(x, b) < 1e-13);
    }
}

TEST_CASE("diffusion operator acts on Fourier modes by the scheme multiplier") {
    for (double theta : {1.0, 0.5, 0.75}) {
        for (int d = 1; d <= 2; ++d) {
            const TorusGrid g = TorusGrid::make(d, 16);
            const double sigma = 0.3, dt = 0.01, h = g.h();
            PdeOptions o;
            o.theta = theta;
            const DiffusionOperator S(g, sigma, dt, o);
            Slice mode(g.size());
            for (std::size_t i = 0; i < g.size(); ++i) {
                mode[i] = std::cos(kTwoPi * g.coord(i, 0));
                if (d == 2) mode[i] *= std::cos(2 * kTwoPi * g.coord(i, 1));
            }
            auto factor = [&](int k) {
                const double lam = (2.0 / (h * h)) * (1.0 - std::cos(kTwoPi * k * h));
                return (1.0 - (1.0 - theta) * dt * sigma * lam) / (1.0 + theta * dt * sigma * lam);
            };
            const double mult = factor(1) * (d == 2 ? factor(2) : 1.0);
            const Slice out = S.apply(mode);
            for (std::size_t i = 0; i < g.size(); ++i) CHECK(out[i] == doctest::Approx(mult * mode[i]).scale(1.0).epsilon(1e-13));
            const Slice ones = S.apply(Slice(g.size(), 2.0));
            for (double x : ones) CHECK(x == doctest::Approx(2.0).epsilon(1e-14));
        }
    }
    PdeOptions bad;
    bad.theta = 0.3;
    CHECK_THROWS_AS(bad.validate(), MfgcError);
}

TEST_CASE("hjb_backward exact cases") {
    const Grids g = make_grids(1, 16, 1.0, 32);
    ModelSpec m = fixtures::homogeneous(16, 0.05, 1.0, 0.0);
    m.terminal_g = fixtures::sampled(m.grid, [](double x) { return std::cos(kTwoPi * x); });

    HjbSolution s = hjb_backward(m, g, constant_prices(g, 0.3), ScalarField::filled(g, 0.7), 0.0);
    for (const auto& slice : s.u.slices) CHECK(sup_norm(slice) == 0.0);

    m.terminal_g = Slice(16, 2.5);
    s = hjb_backward(m, g, constant_prices(g, 0.0), ScalarField::filled(g, 0.0), 1.0);
    for (const auto& slice : s.u.slices) {
        for (double x : slice) CHECK(x == doctest::Approx(2.5).epsilon(1e-14));
    }

    m.terminal_g = Slice(16, 0.0);
    s = hjb_backward(m, g, constant_prices(g, 0.0), ScalarField::filled(g, 1.0), 1.0);
    for (int j = 0; j <= 32; ++j) {
        for (double x : s.u.slices[j]) CHECK(std::abs(x - (1.0 - g.time.t(j))) <= 1e-10);
    }
    CHECK(s.bound_ok);
    CHECK(s.u_sup <= s.u_bound * (1.0 + 1e-12));
    const HjbDefect defect = hjb_defect(m, g, s.u, constant_prices(g, 0.0), ScalarField::filled(g, 1.0), 1.0);
    CHECK(defect.abs <= 1e-14);
}

TEST_CASE("hjb_backward on a varying problem has zero step defect and a consistent w") {
    const Grids g = make_grids(2, 8, 1.0, 16);
    ModelSpec m = fixtures::homogeneous(8, 0.1, 1.0, 0.5, 2);
    Rng rng(42);
    m.terminal_g = fixtures::random_slice(m.grid.size(), rng, -0.2, 0.2);
    ScalarField f = ScalarField::filled(g, 0.0);
    for (auto& s : f.slices) s = fixtures::random_slice(m.grid.size(), rng, -1, 1);
    const auto P = constant_prices(g, 0.2);
    const HjbSolution s = hjb_backward(m, g, P, f, 0.8);
    const HjbDefect defect = hjb_defect(m, g, s.u, P, f, 0.8);
    CHECK(defect.abs <= 1e-13);
    const VectorField w = hjb_control_gradients(m, g, s.u);
    for (int j = 0; j <= 16; ++j) CHECK(sup_distance(w.slices[j], s.w.slices[j]) == 0.0);
    // lowering the source by 0.1 makes the constraint violated by dt * 0.1 at every step
    ScalarField lower = f;
    for (auto& sl : lower.slices) for (double& x : sl) x -= 0.1;
    CHECK(hjb_defect(m, g, s.u, P, lower, 0.8).positive == doctest::Approx(g.time.dt() * 0.8 * 0.1).epsilon(1e-9));
}

TEST_CASE("CFL violation suggests a step count") {
    const Grids g = make_grids(1, 64, 1.0, 4);
    const ModelSpec m = fixtures::homogeneous(64);
    try {
        hjb_backward(m, g, constant_prices(g, 100.0), ScalarField::filled(g, 0.0), 1.0);
        FAIL("expected CflViolation");
    } catch (const MfgcError& e) {
        CHECK(e.code() == ErrorCode::CflViolation);
        CHECK(std::string(e.what()).find("nt >=") != std::string::npos);
    }
    CHECK_THROWS_AS(fp_forward(m, g, VectorField::filled(g, 100.0), 1.0), MfgcError);
}

TEST_CASE("fp_forward stationary cases") {
    const Grids g = make_grids(1, 32, 1.0, 64);
    const ModelSpec m = fixtures::homogeneous(32);
    FpSolution s = fp_forward(m, g, VectorField::filled(g, 0.0), 1.0);
    for (const auto& sl : s.m.slices) CHECK(sup_distance(sl, Slice(32, 1.0)) <= 1e-14);
    s = fp_forward(m, g, VectorField::filled(g, 0.4), 1.0);
    for (const auto& sl : s.m.slices) CHECK(sup_distance(sl, Slice(32, 1.0)) <= 1e-14);
    CHECK(s.max_projection == 0.0);
}

TEST_CASE("fp_forward heat decay matches the eigenvalue formula") {
    const int n = 64, nt = 256;
    const double sigma = 0.05, h = 1.0 / n;
    const Grids g = make_grids(1, n, 1.0, nt);
    ModelSpec m = fixtures::homogeneous(n, sigma);
    m.initial_m0 = fixtures::sampled(m.grid, [](double x) { return 1.0 + 0.5 * std::sin(kTwoPi * x); });
    m = finalize_model(m);
    const FpSolution s = fp_forward(m, g, VectorField::filled(g, 0.0), 1.0);
    const double lambda = (2.0 / (h * h)) * (1.0 - std::cos(kTwoPi * h));
    const double expected = 0.5 * std::exp(-sigma * lambda * 1.0);
    const double measured = sine_amplitude(m.grid, s.m.slices[nt]);
    CHECK(std::abs(measured / expected - 1.0) <= 0.02);
    // the implicit Euler multiplier is exact for the discrete scheme
    CHECK(measured == doctest::Approx(0.5 * std::pow(1.0 + g.time.dt() * sigma * lambda, -nt)).epsilon(1e-12));
}

TEST_CASE("fp_forward conserves mass and stays nonnegative under random drifts") {
    const Grids g = make_grids(1, 32, 1.0, 128);
    const ModelSpec m = fixtures::congestion(32, 0.05);
    Rng rng(43);
    double projection = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        const VectorField v = fixtures::smooth_drift(g, rng, 1.0);
        const FpSolution s = fp_forward(m, g, v, rng.uniform());
        for (const auto& sl : s.m.slices) {
            CHECK(std::abs(integrate(m.grid, sl) - 1.0) <= 1e-12);
            CHECK(*std::min_element(sl.begin(), sl.end()) >= 0.0);
        }
        CHECK(sup_distance(s.m.slices[0], m.initial_m0) == 0.0);
        projection = std::max(projection, s.max_projection);
        CHECK(fp_defect(m, g, s.m, v, 1.0) >= 0.0);
    }
    // rough drift on a sharp density: the centered scheme undershoots and rho repairs it
    ModelSpec sharp = m;
    sharp.initial_m0.assign(32, 0.0);
    sharp.initial_m0[10] = 32.0;
    VectorField rough = VectorField::filled(g, 0.0);
    for (auto& sl : rough.slices) for (std::size_t i = 0; i < sl.size(); ++i) sl[i] = (i % 2 ? 1.5 : -1.5);
    const FpSolution s = fp_forward(sharp, g, rough, 1.0);
    CHECK(s.max_projection > 0.0);
    for (const auto& sl : s.m.slices) CHECK(*std::min_element(sl.begin(), sl.end()) >= 0.0);
    CHECK(fp_defect(sharp, g, s.m, rough, 1.0) <= 1e-13);
}

TEST_CASE("rho projection values") {
    const TorusGrid g = TorusGrid::make(1, 8);
    Rng rng(44);
    const Slice d = fixtures::random_density(g, rng);
    CHECK(sup_distance(rho_project(g, d), d) <= 1e-15);
    for (double x : rho_project(g, Slice(8, 0.0))) CHECK(x == 1.0);
    const Slice half{2, 2, 2, 2, 0, 0, 0, 0};
    CHECK(rho_project(g, half) == half);
    for (double x : rho_project(g, Slice(8, 3.0))) CHECK(x == doctest::Approx(1.0).epsilon(1e-15));
    for (double x : rho_project(g, Slice(8, 0.5))) CHECK(x == doctest::Approx(1.0).epsilon(1e-15));
    const Slice mixed = rho_project(g, Slice{-1, 1, -1, 1, -1, 1, -1, 1});
    for (std::size_t i = 0; i < 8; ++i) CHECK(mixed[i] == doctest::Approx(i % 2 ? 1.5 : 0.5));
}
