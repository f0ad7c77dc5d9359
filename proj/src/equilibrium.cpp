#include "mfgc/equilibrium.hpp"

#include "mfgc/error.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace mfgc {

void EquilibriumOptions::validate() const {
    require(std::isfinite(tol_P) && tol_P > 0.0, ErrorCode::InvalidArgument, "equilibrium tol_P must be positive");
    require(max_iter >= 1, ErrorCode::InvalidArgument, "equilibrium max_iter must be >= 1");
    require(damping > 0.0 && damping <= 1.0, ErrorCode::InvalidArgument, "equilibrium damping must lie in (0,1]");
    require(std::isfinite(jacobian_fd_step) && jacobian_fd_step > 0.0, ErrorCode::InvalidArgument,
            "equilibrium jacobian_fd_step must be positive");
}

namespace {

SpaceVec node_vector(std::span<const double> field, std::size_t node, int d) {
    SpaceVec out(d);
    for (int c = 0; c < d; ++c) out(c) = field[node * d + c];
    return out;
}

double inf_norm(const PriceVec& x) { return x.size() == 0 ? 0.0 : x.cwiseAbs().maxCoeff(); }

struct ReducedMap {
    const ModelSpec& model;
    double t;
    std::span<const double> m;
    std::span<const double> w;

    PriceVec operator()(const PriceVec& P, VectorSlice& v) const {
        v = control_from_price(model, t, w, P);
        return P - price_psi(model, t, demand(model, t, v, m));
    }
};

}  // namespace

PriceVec demand(const ModelSpec& model, double, std::span<const double> v, std::span<const double> m) {
    const TorusGrid& grid = model.grid;
    const int d = grid.dim();
    PriceVec z = PriceVec::Zero(model.k);
    for (std::size_t node = 0; node < grid.size(); ++node) {
        if (m[node] == 0.0) continue;
        z.noalias() += m[node] * (model.phi.at(node) * node_vector(v, node, d));
    }
    return z * grid.cell_volume();
}

VectorSlice control_from_price(const ModelSpec& model, double t, std::span<const double> w, const PriceVec& P) {
    const TorusGrid& grid = model.grid;
    const int d = grid.dim();
    VectorSlice v(grid.size() * d);
    for (std::size_t node = 0; node < grid.size(); ++node) {
        const SpaceVec p = node_vector(w, node, d) + model.phi.at(node).transpose() * P;
        const SpaceVec hp = hamiltonian_grad(model, node, t, p);
        for (int c = 0; c < d; ++c) v[node * d + c] = -hp(c);
    }
    return v;
}

double J_functional(const ModelSpec& model, double t, std::span<const double> v, std::span<const double> m,
                    std::span<const double> w) {
    const TorusGrid& grid = model.grid;
    const int d = grid.dim();
    double running = 0.0;
    for (std::size_t node = 0; node < grid.size(); ++node) {
        const SpaceVec vn = node_vector(v, node, d);
        running += (lagrangian(model, node, t, vn) + node_vector(w, node, d).dot(vn)) * m[node];
    }
    return price_phi(model, t, demand(model, t, v, m)) + running * grid.cell_volume();
}

EquilibriumBounds equilibrium_bounds(const ModelSpec& model, double t, std::span<const double>,
                                     std::span<const double> w) {
    const int d = model.dim();
    double R = 0.0;
    for (std::size_t node = 0; node < model.grid.size(); ++node) R = std::max(R, node_vector(w, node, d).norm());
    return equilibrium_bounds_for_radius(model, t, R);
}

EquilibriumBounds equilibrium_bounds_for_radius(const ModelSpec& model, double t, double R) {
    const double c_L = strong_convexity(model);
    const double G0 = lagrangian_grad_at_zero(model);
    const double phi = model.phi.sup_norm();
    const double psi0 = price_psi(model, t, PriceVec::Zero(model.k)).norm();

    EquilibriumBounds b;
    b.v_mean = 2.0 * (G0 + R + psi0 * phi) / c_L;
    b.P = price_sup_on_ball(model, phi * b.v_mean);
    b.v_sup = (R + phi * b.P + G0) / c_L;
    return b;
}

EquilibriumResult solve_equilibrium(const ModelSpec& model, double t, std::span<const double> m,
                                    std::span<const double> w, const EquilibriumOptions& options,
                                    const std::optional<PriceVec>& initial_P) {
    options.validate();
    const std::size_t N = model.grid.size();
    const int d = model.dim();
    require(m.size() == N && w.size() == N * d, ErrorCode::InvalidArgument, "solve_equilibrium: slice size mismatch");
    const int k = model.k;
    const ReducedMap G{model, t, m, w};

    EquilibriumResult out;
    out.P = initial_P ? *initial_P : PriceVec::Zero(k);
    require(out.P.size() == k, ErrorCode::InvalidArgument, "solve_equilibrium: initial P has wrong size");
    PriceVec g = G(out.P, out.v);
    double r = inf_norm(g);

    double theta = options.damping;
    int halvings = 0;
    bool newton = false;
    VectorSlice trial_v;

    while (r > options.tol_P && out.iterations < options.max_iter) {
        ++out.iterations;
        if (!newton) {
            const PriceVec trial = out.P - theta * g;
            const PriceVec gt = G(trial, trial_v);
            const double rt = inf_norm(gt);
            if (!(rt < r)) {
                if (halvings < 2) {
                    theta *= 0.5;
                    ++halvings;
                } else {
                    newton = true;
                }
                continue;
            }
            const double ratio = rt / r;
            out.P = trial;
            out.v.swap(trial_v);
            g = gt;
            r = rt;
            if (ratio > 0.5 || halvings >= 2) newton = true;
            continue;
        }

        out.newton_used = true;
        PriceMat jac(k, k);
        VectorSlice scratch;
        for (int c = 0; c < k; ++c) {
            PriceVec shifted = out.P;
            const double step = options.jacobian_fd_step * (1.0 + std::abs(out.P(c)));
            shifted(c) += step;
            jac.col(c) = (G(shifted, scratch) - g) / step;
        }
        const PriceVec delta = -Eigen::PartialPivLU<PriceMat>(jac).solve(g);
        if (!delta.allFinite()) break;
        double s = 1.0;
        bool accepted = false;
        for (int ls = 0; ls < 30; ++ls, s *= 0.5) {
            const PriceVec trial = out.P + s * delta;
            const PriceVec gt = G(trial, trial_v);
            const double rt = inf_norm(gt);
            if (rt < r) {
                out.P = trial;
                out.v.swap(trial_v);
                g = gt;
                r = rt;
                accepted = true;
                break;
            }
        }
        if (!accepted) break;  // at roundoff level
    }

    out.residual = r;
    if (!(r <= options.tol_P)) {
        std::ostringstream msg;
        msg << "equilibrium did not converge at t = " << t << " after " << out.iterations
            << " iterations (damping halved " << halvings << " times); last residual " << r;
        fail(ErrorCode::NonConvergence, msg.str());
    }

    out.bounds = equilibrium_bounds(model, t, m, w);
    constexpr double slack = 1.0 + 1e-9;
    double v_sup = 0.0;
    for (std::size_t node = 0; node < N; ++node) v_sup = std::max(v_sup, node_vector(out.v, node, d).norm());
    out.bound_ok = out.P.norm() <= out.bounds.P * slack + 1e-12 && v_sup <= out.bounds.v_sup * slack + 1e-12;
    return out;
}

double equilibrium_residual(const ModelSpec& model, double t, std::span<const double> v, const PriceVec& P,
                            std::span<const double> m, std::span<const double> w) {
    const VectorSlice exact = control_from_price(model, t, w, P);
    const int d = model.dim();
    double control_defect = 0.0;
    for (std::size_t node = 0; node < model.grid.size(); ++node) {
        double s = 0.0;
        for (int c = 0; c < d; ++c) {
            const double e = v[node * d + c] - exact[node * d + c];
            s += e * e;
        }
        control_defect = std::max(control_defect, std::sqrt(s));
    }
    const double price_defect = (P - price_psi(model, t, demand(model, t, v, m))).cwiseAbs().maxCoeff();
    return std::max(control_defect, price_defect);
}

}  // namespace mfgc
