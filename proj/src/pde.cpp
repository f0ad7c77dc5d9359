#include "mfgc/pde.hpp"

#include "mfgc/error.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace mfgc {

void PdeOptions::validate() const {
    require(theta >= 0.5 && theta <= 1.0, ErrorCode::InvalidArgument, "pde theta must lie in [0.5, 1]");
    require(cfl_safety > 0.0 && cfl_safety <= 1.0, ErrorCode::InvalidArgument, "pde cfl_safety must lie in (0,1]");
    require(std::isfinite(linear_solver_tol) && linear_solver_tol > 0.0, ErrorCode::InvalidArgument,
            "pde linear_solver_tol must be positive");
}

// --- cyclic tridiagonal ---

CyclicTridiagonal::CyclicTridiagonal(int n, double sub, double diag, double super)
    : n_(n), sub_(sub), diag_(diag), super_(super), gamma_(-diag) {
    require(n >= 3, ErrorCode::InvalidArgument, "cyclic tridiagonal system needs n >= 3");
    // corners: A[0][n-1] = sub, A[n-1][0] = super
    std::vector<double> bb(n, diag);
    bb[0] = diag - gamma_;
    bb[n - 1] = diag - super_ * sub_ / gamma_;
    c_prime_.resize(n);
    denom_.resize(n);
    denom_[0] = bb[0];
    c_prime_[0] = super_ / denom_[0];
    for (int i = 1; i < n; ++i) {
        denom_[i] = bb[i] - sub_ * c_prime_[i - 1];
        if (!(std::abs(denom_[i]) > 0.0)) fail(ErrorCode::LinearSolverBreakdown, "cyclic solve: zero pivot");
        c_prime_[i] = super_ / denom_[i];
    }
    z_.assign(n, 0.0);
    z_[0] = gamma_;
    z_[n - 1] = super_;
    thomas(z_);
    z_denominator_ = 1.0 + z_[0] + sub_ * z_[n - 1] / gamma_;
    if (!(std::abs(z_denominator_) > 0.0)) fail(ErrorCode::LinearSolverBreakdown, "cyclic solve: singular correction");
}

void CyclicTridiagonal::thomas(std::span<double> x) const {
    x[0] /= denom_[0];
    for (int i = 1; i < n_; ++i) x[i] = (x[i] - sub_ * x[i - 1]) / denom_[i];
    for (int i = n_ - 2; i >= 0; --i) x[i] -= c_prime_[i] * x[i + 1];
}

void CyclicTridiagonal::solve(std::span<double> x) const {
    thomas(x);
    const double factor = (x[0] + sub_ * x[n_ - 1] / gamma_) / z_denominator_;
    for (int i = 0; i < n_; ++i) x[i] -= factor * z_[i];
}

double CyclicTridiagonal::residual(std::span<const double> x, std::span<const double> b) const {
    double r = 0.0;
    for (int i = 0; i < n_; ++i) {
        const double left = x[(i + n_ - 1) % n_];
        const double right = x[(i + 1) % n_];
        r = std::max(r, std::abs(sub_ * left + diag_ * x[i] + super_ * right - b[i]));
    }
    return r;
}

// --- diffusion ---

DiffusionOperator::DiffusionOperator(const TorusGrid& grid, double sigma, double dt, const PdeOptions& options)
    : grid_(grid),
      theta_(options.theta),
      r_(dt * sigma / (grid.h() * grid.h())),
      tol_(options.linear_solver_tol),
      system_(grid.n(), -options.theta * r_, 1.0 + 2.0 * options.theta * r_, -options.theta * r_) {}

Slice DiffusionOperator::apply(std::span<const double> x) const {
    const int n = grid_.n();
    const double explicit_r = (1.0 - theta_) * r_;
    const double implicit_r = theta_ * r_;
    Slice out(x.begin(), x.end());
    std::vector<double> line(n), rhs(n);
    const std::size_t lines = grid_.size() / n;
    for (int axis = 0; axis < grid_.dim(); ++axis) {
        const std::size_t stride = axis == 0 ? 1 : static_cast<std::size_t>(n);
        for (std::size_t l = 0; l < lines; ++l) {
            const std::size_t base = axis == 0 ? l * n : l;
            for (int i = 0; i < n; ++i) line[i] = out[base + i * stride];
            for (int i = 0; i < n; ++i) {
                rhs[i] = line[i];
                if (explicit_r != 0.0) {
                    rhs[i] += explicit_r * (line[(i + 1) % n] - 2.0 * line[i] + line[(i + n - 1) % n]);
                }
            }
            line = rhs;
            system_.solve(line);
            double scale = 0.0;
            for (int i = 0; i < n; ++i) scale = std::max({scale, std::abs(line[i]), std::abs(rhs[i])});
            const double res = system_.residual(line, rhs);
            if (!(res <= tol_ * (1.0 + 4.0 * implicit_r) * std::max(1.0, scale))) {
                std::ostringstream msg;
                msg << "linear solver breakdown: diffusion residual " << res << " exceeds tolerance " << tol_;
                fail(ErrorCode::LinearSolverBreakdown, msg.str());
            }
            for (int i = 0; i < n; ++i) out[base + i * stride] = line[i];
        }
    }
    return out;
}

// --- projection ---

Slice rho_project(const TorusGrid& grid, std::span<const double> m) {
    Slice plus(m.size());
    for (std::size_t i = 0; i < m.size(); ++i) plus[i] = std::max(m[i], 0.0);
    const double mass = integrate(grid, plus);
    const double scale = std::max(1.0, mass);
    const double shift = 1.0 - mass / scale;
    for (double& v : plus) v = v / scale + shift;
    return plus;
}

double rho_lipschitz(double R) { return 2.0 + R; }

// --- sweeps ---

namespace {

void check_time_data(const Grids& grids, std::size_t have, const char* what) {
    require(have >= static_cast<std::size_t>(grids.time.steps()), ErrorCode::InvalidArgument,
            std::string(what) + ": fewer slices than time steps");
}

[[noreturn]] void cfl_failure(const char* sweep, const Grids& grids, double speed, double tau,
                              const PdeOptions& options) {
    const double needed = grids.time.horizon() * tau * speed / (options.cfl_safety * grids.space.h());
    std::ostringstream msg;
    msg << sweep << ": CFL violation, dt = " << grids.time.dt() << " with transport speed " << speed
        << " and h = " << grids.space.h() << "; use nt >= " << static_cast<long long>(std::ceil(needed));
    fail(ErrorCode::CflViolation, msg.str());
}

struct HjbStep {
    Slice u;
    VectorSlice w;
    double max_abs_H = 0.0;
    double max_speed = 0.0;
    Slice residual_source;  // f - H, for defect evaluation
};

HjbStep hjb_step(const ModelSpec& model, const DiffusionOperator& S, std::span<const double> next,
                 const PriceVec& P, std::span<const double> f, double t, double dt, double tau) {
    const TorusGrid& grid = model.grid;
    const int d = grid.dim();
    HjbStep step;
    step.u = S.apply(next);
    step.w = gradient(grid, step.u);
    step.residual_source.resize(grid.size());
    for (std::size_t node = 0; node < grid.size(); ++node) {
        SpaceVec p(d);
        for (int c = 0; c < d; ++c) p(c) = step.w[node * d + c];
        p += model.phi.at(node).transpose() * P;
        const HamiltonianEval H = hamiltonian_eval(model, node, t, p);
        step.max_abs_H = std::max(step.max_abs_H, std::abs(H.value));
        step.max_speed = std::max(step.max_speed, H.grad.norm());
        step.residual_source[node] = f[node] - H.value;
    }
    for (std::size_t node = 0; node < grid.size(); ++node) step.u[node] += dt * tau * step.residual_source[node];
    return step;
}

Slice fp_step(const TorusGrid& grid, const DiffusionOperator& S, std::span<const double> m,
              std::span<const double> v, double dt, double tau) {
    const int d = grid.dim();
    VectorSlice flux(v.size());
    for (std::size_t node = 0; node < grid.size(); ++node) {
        for (int c = 0; c < d; ++c) flux[node * d + c] = v[node * d + c] * m[node];
    }
    const Slice div = divergence(grid, flux);
    Slice advected(m.begin(), m.end());
    for (std::size_t node = 0; node < grid.size(); ++node) advected[node] -= dt * tau * div[node];
    return S.apply(advected);
}

double max_node_norm(std::span<const double> v, int d) {
    double best = 0.0;
    for (std::size_t node = 0; node * d < v.size(); ++node) {
        double s = 0.0;
        for (int c = 0; c < d; ++c) s += v[node * d + c] * v[node * d + c];
        best = std::max(best, std::sqrt(s));
    }
    return best;
}

void check_tau(double tau) {
    require(tau >= 0.0 && tau <= 1.0, ErrorCode::InvalidArgument, "tau must lie in [0,1]");
}

}  // namespace

HjbSolution hjb_backward(const ModelSpec& model, const Grids& grids, const std::vector<PriceVec>& P_traj,
                         const ScalarField& f_traj, double tau, const PdeOptions& options) {
    options.validate();
    check_tau(tau);
    check_time_data(grids, P_traj.size(), "hjb_backward P trajectory");
    check_time_data(grids, f_traj.times(), "hjb_backward source");
    const int nt = grids.time.steps();
    const double dt = grids.time.dt();
    const DiffusionOperator S(grids.space, model.sigma, dt, options);

    HjbSolution out;
    out.u.slices.resize(nt + 1);
    out.w.slices.resize(nt + 1);
    out.u.slices[nt] = model.terminal_g;
    for (double& v : out.u.slices[nt]) v *= tau;
    out.w.slices[nt] = gradient(grids.space, out.u.slices[nt]);

    double C_f = 0.0;
    for (int j = nt - 1; j >= 0; --j) {
        require(P_traj[j].allFinite(), ErrorCode::NonFinite, "hjb_backward: non-finite P");
        HjbStep step = hjb_step(model, S, out.u.slices[j + 1], P_traj[j], f_traj.slices[j], grids.time.t(j), dt, tau);
        if (dt * tau * step.max_speed > options.cfl_safety * grids.space.h()) {
            cfl_failure("hjb_backward", grids, step.max_speed, tau, options);
        }
        require_finite(step.u, "hjb_backward u");
        out.max_abs_H = std::max(out.max_abs_H, step.max_abs_H);
        out.max_speed = std::max(out.max_speed, step.max_speed);
        C_f = std::max(C_f, sup_norm(f_traj.slices[j]));
        out.u.slices[j] = std::move(step.u);
        out.w.slices[j] = std::move(step.w);
    }
    for (const Slice& s : out.u.slices) out.u_sup = std::max(out.u_sup, sup_norm(s));
    out.u_bound = tau * (sup_norm(model.terminal_g) + grids.time.horizon() * (C_f + out.max_abs_H));
    out.bound_ok = out.u_sup <= out.u_bound * (1.0 + 1e-9) + 1e-12;
    return out;
}

VectorField hjb_control_gradients(const ModelSpec& model, const Grids& grids, const ScalarField& u,
                                  const PdeOptions& options) {
    const int nt = grids.time.steps();
    require(u.times() == static_cast<std::size_t>(nt + 1), ErrorCode::InvalidArgument,
            "hjb_control_gradients: u must have nt+1 slices");
    const DiffusionOperator S(grids.space, model.sigma, grids.time.dt(), options);
    VectorField w;
    w.slices.resize(nt + 1);
    for (int j = 0; j < nt; ++j) w.slices[j] = gradient(grids.space, S.apply(u.slices[j + 1]));
    w.slices[nt] = gradient(grids.space, u.slices[nt]);
    return w;
}

FpSolution fp_forward(const ModelSpec& model, const Grids& grids, const VectorField& v, double tau,
                      const PdeOptions& options) {
    return fp_forward(model, grids, v, tau, model.initial_m0, options);
}

FpSolution fp_forward(const ModelSpec& model, const Grids& grids, const VectorField& v, double tau,
                      std::span<const double> m_init, const PdeOptions& options) {
    options.validate();
    check_tau(tau);
    check_time_data(grids, v.times(), "fp_forward drift");
    require(m_init.size() == grids.space.size(), ErrorCode::InvalidArgument, "fp_forward: m0 size mismatch");
    const int nt = grids.time.steps();
    const double dt = grids.time.dt();
    const int d = grids.space.dim();
    const DiffusionOperator S(grids.space, model.sigma, dt, options);

    FpSolution out;
    out.m.slices.resize(nt + 1);
    out.m.slices[0].assign(m_init.begin(), m_init.end());
    for (int j = 0; j < nt; ++j) {
        require_finite(v.slices[j], "fp_forward drift");
        const double speed = max_node_norm(v.slices[j], d);
        if (dt * tau * speed > options.cfl_safety * grids.space.h()) cfl_failure("fp_forward", grids, speed, tau, options);
        const Slice raw = fp_step(grids.space, S, out.m.slices[j], v.slices[j], dt, tau);
        require_finite(raw, "fp_forward m");
        Slice projected = rho_project(grids.space, raw);
        out.max_projection = std::max(out.max_projection, sup_distance(raw, projected));
        out.m.slices[j + 1] = std::move(projected);
    }
    return out;
}

HjbDefect hjb_defect(const ModelSpec& model, const Grids& grids, const ScalarField& u,
                     const std::vector<PriceVec>& P_traj, const ScalarField& f_traj, double tau,
                     const PdeOptions& options) {
    const int nt = grids.time.steps();
    require(u.times() == static_cast<std::size_t>(nt + 1), ErrorCode::InvalidArgument,
            "hjb_defect: u must have nt+1 slices");
    check_time_data(grids, P_traj.size(), "hjb_defect P trajectory");
    check_time_data(grids, f_traj.times(), "hjb_defect source");
    const DiffusionOperator S(grids.space, model.sigma, grids.time.dt(), options);
    HjbDefect out;
    for (std::size_t node = 0; node < grids.space.size(); ++node) {
        const double r = u.slices[nt][node] - tau * model.terminal_g[node];
        out.abs = std::max(out.abs, std::abs(r));
        out.positive = std::max(out.positive, r);
    }
    for (int j = 0; j < nt; ++j) {
        const HjbStep step =
            hjb_step(model, S, u.slices[j + 1], P_traj[j], f_traj.slices[j], grids.time.t(j), grids.time.dt(), tau);
        for (std::size_t node = 0; node < grids.space.size(); ++node) {
            const double r = u.slices[j][node] - step.u[node];
            out.abs = std::max(out.abs, std::abs(r));
            out.positive = std::max(out.positive, r);
        }
    }
    return out;
}

double fp_defect(const ModelSpec& model, const Grids& grids, const ScalarField& m, const VectorField& v,
                 double tau, const PdeOptions& options) {
    const int nt = grids.time.steps();
    require(m.times() == static_cast<std::size_t>(nt + 1), ErrorCode::InvalidArgument,
            "fp_defect: m must have nt+1 slices");
    check_time_data(grids, v.times(), "fp_defect drift");
    const DiffusionOperator S(grids.space, model.sigma, grids.time.dt(), options);
    double out = sup_distance(m.slices[0], model.initial_m0);
    for (int j = 0; j < nt; ++j) {
        const Slice next = rho_project(grids.space, fp_step(grids.space, S, m.slices[j], v.slices[j], grids.time.dt(), tau));
        out = std::max(out, sup_distance(m.slices[j + 1], next));
    }
    return out;
}

}  // namespace mfgc
