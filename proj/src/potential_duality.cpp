#include "mfgc/potential_duality.hpp"

#include "mfgc/numerics.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

namespace mfgc {

namespace {

double running_cost(const ModelSpec& model, double t, std::span<const double> v, std::span<const double> m) {
    const int d = model.dim();
    double s = 0.0;
    for (std::size_t node = 0; node < model.grid.size(); ++node) {
        SpaceVec vn(d);
        for (int c = 0; c < d; ++c) vn(c) = v[node * d + c];
        s += lagrangian(model, node, t, vn) * m[node];
    }
    return s * model.grid.cell_volume();
}

double weighted_dot(const TorusGrid& grid, std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s * grid.cell_volume();
}

void check_primal(const Grids& grids, const ScalarField& m, const VectorField& v) {
    const int nt = grids.time.steps();
    require(m.times() == static_cast<std::size_t>(nt + 1), ErrorCode::InvalidArgument, "potential: m needs nt+1 slices");
    require(v.times() >= static_cast<std::size_t>(nt), ErrorCode::InvalidArgument, "potential: v needs nt slices");
}

PotentialValue potential_common(const ModelSpec& model, const Grids& grids, const ScalarField& m,
                                const VectorField& v, const std::function<double(int)>& coupling) {
    check_primal(grids, m, v);
    const int nt = grids.time.steps();
    const double dt = grids.time.dt();
    PotentialValue out;
    for (int j = 0; j < nt; ++j) {
        const double t = grids.time.t(j);
        out.running += dt * running_cost(model, t, v.slices[j], m.slices[j]);
        out.coupling += dt * coupling(j);
        out.price += dt * price_phi(model, t, demand(model, t, v.slices[j], m.slices[j]));
    }
    out.terminal = weighted_dot(grids.space, model.terminal_g, m.slices[nt]);
    out.total = out.running + out.coupling + out.price + out.terminal;
    return out;
}

/// Euclidean projection onto {x >= 0, sum x = total}.
Slice project_simplex(std::span<const double> y, double total) {
    Slice sorted(y.begin(), y.end());
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    double cumulative = 0.0;
    double lambda = 0.0;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        cumulative += sorted[i];
        const double candidate = (cumulative - total) / static_cast<double>(i + 1);
        if (i + 1 == sorted.size() || sorted[i + 1] <= candidate) {
            lambda = candidate;
            break;
        }
    }
    Slice out(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) out[i] = std::max(y[i] - lambda, 0.0);
    return out;
}

struct AscentResult {
    double value = 0.0;
    double gap = 0.0;
    Slice m;
};

/// Accelerated projected gradient (FISTA with gradient restart). The
/// Frank-Wolfe gap is evaluated at the feasible iterate, so it certifies the
/// returned value.
AscentResult ascend(const ModelSpec& model, double t, std::span<const double> gamma, Slice m, double step,
                    const FStarOptions& options) {
    const TorusGrid& grid = model.grid;
    const double total = 1.0 / grid.cell_volume();
    auto ascent_direction = [&](std::span<const double> x) {
        const Slice f = coupling_f(model, t, x);
        Slice g(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) g[i] = gamma[i] - f[i];
        return g;
    };
    AscentResult out;
    Slice y = m;
    Slice g_m = ascent_direction(m);
    double momentum = 1.0;
    for (int it = 0;; ++it) {
        out.gap = *std::max_element(g_m.begin(), g_m.end()) - weighted_dot(grid, g_m, m);
        if (out.gap <= options.tol || it >= options.max_iter) break;
        const Slice g_y = it == 0 ? g_m : ascent_direction(y);
        Slice trial(m.size());
        for (std::size_t i = 0; i < m.size(); ++i) trial[i] = y[i] + step * g_y[i];
        Slice next = project_simplex(trial, total);
        double progress = 0.0;
        for (std::size_t i = 0; i < m.size(); ++i) progress += g_y[i] * (next[i] - m[i]);
        if (progress < 0.0) {
            // restart: plain projected step from m
            momentum = 1.0;
            for (std::size_t i = 0; i < m.size(); ++i) trial[i] = m[i] + step * g_m[i];
            next = project_simplex(trial, total);
            y = next;
        } else {
            const double next_momentum = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * momentum * momentum));
            const double beta = (momentum - 1.0) / next_momentum;
            for (std::size_t i = 0; i < m.size(); ++i) y[i] = next[i] + beta * (next[i] - m[i]);
            momentum = next_momentum;
        }
        m = std::move(next);
        g_m = ascent_direction(m);
    }
    out.value = weighted_dot(grid, gamma, m) - coupling_F(model, t, m);
    out.m = std::move(m);
    return out;
}

}  // namespace

PotentialValue potential_B_incomplete(const ModelSpec& model, const Grids& grids, const ScalarField& m,
                                      const VectorField& v, const ScalarField& f_tilde) {
    require(f_tilde.times() >= static_cast<std::size_t>(grids.time.steps()), ErrorCode::InvalidArgument,
            "potential: f~ needs nt slices");
    return potential_common(model, grids, m, v, [&](int j) {
        return weighted_dot(grids.space, f_tilde.slices[j], m.slices[j]);
    });
}

PotentialValue potential_B_full(const ModelSpec& model, const Grids& grids, const ScalarField& m,
                                const VectorField& v) {
    return potential_common(model, grids, m, v,
                            [&](int j) { return coupling_F(model, grids.time.t(j), m.slices[j]); });
}

ConjugateValue conjugate_phi_star(const ModelSpec& model, double, const PriceVec& P) {
    require(P.allFinite(), ErrorCode::NonFinite, "conjugate_phi_star: non-finite P");
    ConjugateValue out;
    if (const auto* aff = std::get_if<AffinePrice>(&model.price)) {
        const PriceVec q = P - aff->b;
        Eigen::SelfAdjointEigenSolver<PriceMat> eig(aff->a);
        const PriceVec lambda = eig.eigenvalues();
        const PriceVec coeff = eig.eigenvectors().transpose() * q;
        const double scale = std::max(1.0, lambda.cwiseAbs().maxCoeff());
        for (int i = 0; i < lambda.size(); ++i) {
            if (lambda(i) > 1e-12 * scale) {
                out.value += 0.5 * coeff(i) * coeff(i) / lambda(i);
            } else if (std::abs(coeff(i)) > 1e-12 * (1.0 + q.norm())) {
                out.infinite = true;
            }
        }
        if (out.infinite) out.value = std::numeric_limits<double>::infinity();
        return out;
    }
    const auto& tab = std::get<TabulatedPrice>(model.price).potential;
    const double p = P(0);
    const Maximum1d best = maximize_concave([&](double z) { return p * z - tab.value(z); },
                                            [&](double z) { return p - tab.derivative(z); }, tab.lo(), tab.hi(), 128);
    out.value = best.value;
    out.on_boundary = best.on_boundary;
    return out;
}

FStarValue conjugate_F_star(const ModelSpec& model, double t, std::span<const double> gamma,
                            const FStarOptions& options) {
    const TorusGrid& grid = model.grid;
    require(gamma.size() == grid.size(), ErrorCode::InvalidArgument, "conjugate_F_star: gamma size mismatch");
    require_finite(gamma, "conjugate_F_star gamma");
    FStarValue out;
    const auto* conv = std::get_if<ConvolutionCoupling>(&model.coupling);
    if (conv == nullptr) {
        const auto it = std::max_element(gamma.begin(), gamma.end());
        out.value = *it;
        out.argmax.assign(grid.size(), 0.0);
        out.argmax[static_cast<std::size_t>(it - gamma.begin())] = 1.0 / grid.cell_volume();
        return out;
    }

    double kernel_l1 = 0.0;
    for (double k : conv->kernel) kernel_l1 += std::abs(k);
    kernel_l1 *= grid.cell_volume();
    const double lipschitz = response_slope_bound(conv->response) * kernel_l1 * kernel_l1;
    const double step = 1.0 / std::max(lipschitz, 1e-12);

    std::vector<Slice> starts;
    starts.emplace_back(grid.size(), 1.0);
    Rng rng(options.seed);
    for (int s = 0; s < options.random_starts; ++s) {
        Slice vertex(grid.size(), 0.0);
        vertex[rng.index(grid.size())] = 1.0 / grid.cell_volume();
        starts.push_back(std::move(vertex));
    }

    // the objective is concave, so once a start is certified the other starts cannot beat it by more than tol
    bool first = true;
    for (Slice& start : starts) {
        AscentResult r = ascend(model, t, gamma, std::move(start), step, options);
        if (first || r.value > out.value) {
            out.value = r.value;
            out.gap_bound = r.gap;
            out.argmax = std::move(r.m);
            first = false;
        }
        if (out.gap_bound <= options.tol) break;
    }
    out.certified = out.gap_bound <= options.tol;
    return out;
}

DualValue dual_D(const ModelSpec& model, const Grids& grids, const ScalarField& u, const std::vector<PriceVec>& P,
                 const ScalarField& gamma, const FStarOptions& options) {
    const int nt = grids.time.steps();
    require(u.times() == static_cast<std::size_t>(nt + 1), ErrorCode::InvalidArgument, "dual_D: u needs nt+1 slices");
    require(P.size() >= static_cast<std::size_t>(nt) && gamma.times() >= static_cast<std::size_t>(nt),
            ErrorCode::InvalidArgument, "dual_D: P and gamma need nt slices");
    const double dt = grids.time.dt();
    DualValue out;
    out.initial = weighted_dot(grids.space, u.slices[0], model.initial_m0);
    for (int j = 0; j < nt; ++j) {
        const double t = grids.time.t(j);
        const ConjugateValue phi = conjugate_phi_star(model, t, P[j]);
        out.infinite = out.infinite || phi.infinite;
        out.price_conj -= dt * phi.value;
        const FStarValue fs = conjugate_F_star(model, t, gamma.slices[j], options);
        out.F_star_certified = out.F_star_certified && fs.certified;
        out.coupling_conj -= dt * fs.value;
    }
    out.total = out.initial + out.price_conj + out.coupling_conj;
    return out;
}

DualityGap duality_gap(const ModelSpec& model, const Grids& grids, const MfgState& state, const PdeOptions& pde,
                       const FStarOptions& options) {
    DualityGap out;
    const ScalarField gamma = coupling_field(model, grids, state.m);
    out.primal = potential_B_full(model, grids, state.m, state.v);
    out.dual = dual_D(model, grids, state.u, state.P, gamma, options);
    out.gap = out.primal.total - out.dual.total;
    const HjbDefect hjb = hjb_defect(model, grids, state.u, state.P, gamma, state.tau, pde);
    out.hjb_defect = hjb.abs;
    out.dual_infeasibility = std::max(hjb.positive, 0.0);
    out.fp_defect = fp_defect(model, grids, state.m, state.v, state.tau, pde);
    out.eps_quad = 1e-9 * (1.0 + std::abs(out.primal.total));
    return out;
}

GapSummary summarize(const DualityGap& gap) {
    GapSummary s;
    s.computed = true;
    s.gap = gap.gap;
    s.primal = gap.primal.total;
    s.dual = gap.dual.total;
    s.hjb_defect = gap.hjb_defect;
    s.dual_infeasibility = gap.dual_infeasibility;
    s.fp_defect = gap.fp_defect;
    s.F_star_certified = gap.dual.F_star_certified;
    return s;
}

}  // namespace mfgc
