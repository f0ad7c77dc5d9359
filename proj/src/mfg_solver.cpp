#include "mfgc/mfg_solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>

namespace mfgc {

void SolveOptions::validate(bool has_initial_state) const {
    require(std::isfinite(outer_tol) && outer_tol > 0.0, ErrorCode::InvalidArgument, "outer_tol must be positive");
    require(max_outer >= 1, ErrorCode::InvalidArgument, "max_outer must be >= 1");
    require(damping_u > 0.0 && damping_u <= 1.0, ErrorCode::InvalidArgument, "damping_u must lie in (0,1]");
    require(damping_m > 0.0 && damping_m <= 1.0, ErrorCode::InvalidArgument, "damping_m must lie in (0,1]");
    require(!tau_schedule.empty(), ErrorCode::InvalidArgument, "tau_schedule is empty");
    for (std::size_t i = 0; i < tau_schedule.size(); ++i) {
        const double tau = tau_schedule[i];
        require(tau >= 0.0 && tau <= 1.0, ErrorCode::InvalidArgument, "tau_schedule entries must lie in [0,1]");
        if (i > 0) {
            require(tau >= tau_schedule[i - 1], ErrorCode::InvalidArgument, "tau_schedule must be nondecreasing");
        }
    }
    require(tau_schedule.back() == 1.0, ErrorCode::InvalidArgument, "tau_schedule must end at 1");
    require(has_initial_state || tau_schedule.front() == 0.0, ErrorCode::InvalidArgument,
            "tau_schedule must start at 0 unless an initial state is given");
    require(tripwire_factor > 0.0, ErrorCode::InvalidArgument, "tripwire_factor must be positive");
    equilibrium.validate();
    pde.validate();
}

MfgState initial_state(const ModelSpec& model, const Grids& grids) {
    const int nt = grids.time.steps();
    MfgState s;
    s.u = ScalarField::filled(grids, 0.0);
    s.m.slices.assign(nt + 1, model.initial_m0);
    s.v = VectorField::filled(grids, 0.0);
    s.P.assign(nt + 1, PriceVec::Zero(model.k));
    return s;
}

ScalarField coupling_field(const ModelSpec& model, const Grids& grids, const ScalarField& m) {
    ScalarField f;
    f.slices.reserve(m.times());
    for (std::size_t j = 0; j < m.times(); ++j) f.slices.push_back(coupling_f(model, grids.time.t(static_cast<int>(j)), m.slices[j]));
    return f;
}

namespace {

void check_state(const ModelSpec& model, const Grids& grids, const MfgState& s) {
    const std::size_t slices = static_cast<std::size_t>(grids.time.steps()) + 1;
    const std::size_t N = grids.space.size();
    require(s.u.times() == slices && s.m.times() == slices, ErrorCode::InvalidArgument,
            "state u/m must have nt+1 slices");
    for (std::size_t j = 0; j < slices; ++j) {
        require(s.u.slices[j].size() == N && s.m.slices[j].size() == N, ErrorCode::InvalidArgument,
                "state slice size does not match the grid");
    }
    require(s.P.empty() || s.P.size() == slices, ErrorCode::InvalidArgument, "state P must have nt+1 entries");
    for (const PriceVec& p : s.P) require(p.size() == model.k, ErrorCode::InvalidArgument, "state P has wrong dimension");
}

struct SliceSolve {
    VectorField v;
    std::vector<PriceVec> P;
};

/// Equilibria at every step j < nt for (m^j, w^j), warm started from `warm`.
SliceSolve solve_slices(const ModelSpec& model, const Grids& grids, const ScalarField& m, const VectorField& w,
                        const std::vector<PriceVec>& warm, const EquilibriumOptions& options) {
    const int nt = grids.time.steps();
    SliceSolve out;
    out.v.slices.resize(nt + 1);
    out.P.resize(nt + 1, PriceVec::Zero(model.k));
    for (int j = 0; j < nt; ++j) {
        std::optional<PriceVec> start;
        if (!warm.empty()) start = warm[j];
        else if (j > 0) start = out.P[j - 1];
        EquilibriumResult eq = solve_equilibrium(model, grids.time.t(j), m.slices[j], w.slices[j], options, start);
        out.v.slices[j] = std::move(eq.v);
        out.P[j] = eq.P;
    }
    out.v.slices[nt] = out.v.slices[nt - 1];
    out.P[nt] = out.P[nt - 1];
    return out;
}

double sup_diff(const ScalarField& a, const ScalarField& b) {
    double r = 0.0;
    for (std::size_t j = 0; j < a.times(); ++j) r = std::max(r, sup_distance(a.slices[j], b.slices[j]));
    return r;
}

double vector_sup(const VectorSlice& v, int d) {
    double best = 0.0;
    for (std::size_t node = 0; node * d < v.size(); ++node) {
        double s = 0.0;
        for (int c = 0; c < d; ++c) s += v[node * d + c] * v[node * d + c];
        best = std::max(best, std::sqrt(s));
    }
    return best;
}

/// Terminal-slice equilibrium (m^nt, grad u^nt), stored for output only.
void fill_terminal(const ModelSpec& model, const Grids& grids, MfgState& s, const EquilibriumOptions& options) {
    const int nt = grids.time.steps();
    const VectorSlice w = gradient(grids.space, s.u.slices[nt]);
    EquilibriumResult eq = solve_equilibrium(model, grids.time.t(nt), s.m.slices[nt], w, options, s.P[nt - 1]);
    s.v.slices[nt] = std::move(eq.v);
    s.P[nt] = eq.P;
}

void update_monitors(const ModelSpec& model, const Grids& grids, const MapImage& map, Monitors& mon) {
    const int d = grids.space.dim();
    const MfgState& s = map.image;
    double u_sup = 0.0;
    for (const Slice& sl : s.u.slices) u_sup = std::max(u_sup, sup_norm(sl));
    double grad_sup = 0.0;
    for (const VectorSlice& w : map.hjb.w.slices) grad_sup = std::max(grad_sup, vector_sup(w, d));
    double P_sup = 0.0;
    for (std::size_t j = 0; j + 1 < s.P.size(); ++j) {
        P_sup = std::max(P_sup, s.P[j].norm());
        P_sup = std::max(P_sup, map.hjb_P[j].norm());
    }
    double v_sup = 0.0;
    for (std::size_t j = 0; j + 1 < s.v.times(); ++j) v_sup = std::max(v_sup, vector_sup(s.v.slices[j], d));

    // equilibria so far saw gradients at most max(running sup, this sweep)
    const EquilibriumBounds b = equilibrium_bounds_for_radius(model, 0.0, std::max(mon.grad_u_sup, grad_sup));
    const double P_bound = b.P;
    const double v_bound = b.v_sup;

    mon.u_sup = std::max(mon.u_sup, u_sup);
    mon.grad_u_sup = std::max(mon.grad_u_sup, grad_sup);
    mon.P_sup = std::max(mon.P_sup, P_sup);
    mon.v_sup = std::max(mon.v_sup, v_sup);
    mon.u_bound = std::max(mon.u_bound, map.hjb.u_bound);
    mon.grad_u_bound = std::max(mon.grad_u_bound, std::sqrt(static_cast<double>(d)) * u_sup / grids.space.h());
    mon.P_bound = std::max(mon.P_bound, P_bound);
    mon.v_bound = std::max(mon.v_bound, v_bound);
    mon.max_projection = std::max(mon.max_projection, map.max_projection);

    constexpr double slack = 1.0 + 1e-9;
    auto check = [&](const char* name, double value, double bound) {
        if (!(value <= bound * slack + 1e-12)) {
            std::ostringstream os;
            os << name << " = " << value << " exceeds monitor bound " << bound << " at tau = " << s.tau;
            mon.breaches.push_back(os.str());
        }
    };
    check("|u|_inf", u_sup, map.hjb.u_bound);
    check("|grad u|_inf", grad_sup, std::sqrt(static_cast<double>(d)) * u_sup / grids.space.h());
    check("|P|_inf", P_sup, P_bound);
    check("|v|_inf", v_sup, v_bound);
}

}  // namespace

MapImage apply_map(const ModelSpec& model, const Grids& grids, const MfgState& state, double tau,
                   const SolveOptions& options) {
    check_state(model, grids, state);
    const int nt = grids.time.steps();
    ScalarField m;
    m.slices.reserve(nt + 1);
    for (const Slice& s : state.m.slices) m.slices.push_back(rho_project(grids.space, s));

    const VectorField w_old = hjb_control_gradients(model, grids, state.u, options.pde);
    SliceSolve old_eq = solve_slices(model, grids, m, w_old, state.P, options.equilibrium);

    ScalarField f = coupling_field(model, grids, m);
    MapImage out;
    out.hjb = hjb_backward(model, grids, old_eq.P, f, tau, options.pde);
    out.hjb_P = std::move(old_eq.P);

    SliceSolve new_eq = solve_slices(model, grids, m, out.hjb.w, out.hjb_P, options.equilibrium);
    FpSolution fp = fp_forward(model, grids, new_eq.v, tau, options.pde);

    out.image.u = out.hjb.u;
    out.image.m = std::move(fp.m);
    out.image.v = std::move(new_eq.v);
    out.image.P = std::move(new_eq.P);
    out.image.tau = tau;
    out.max_projection = fp.max_projection;
    return out;
}

PicardResult picard_step(const ModelSpec& model, const Grids& grids, const MfgState& state, double tau,
                         const SolveOptions& options) {
    PicardResult out;
    out.map = apply_map(model, grids, state, tau, options);
    const MfgState& img = out.map.image;
    out.residual = residuals(state, img);

    const double tu = options.damping_u;
    const double tm = options.damping_m;
    out.state.tau = tau;
    out.state.u.slices.resize(img.u.times());
    out.state.m.slices.resize(img.m.times());
    for (std::size_t j = 0; j < img.u.times(); ++j) {
        Slice u(img.u.slices[j].size());
        Slice m(img.m.slices[j].size());
        for (std::size_t i = 0; i < u.size(); ++i) {
            u[i] = (1.0 - tu) * state.u.slices[j][i] + tu * img.u.slices[j][i];
            m[i] = (1.0 - tm) * state.m.slices[j][i] + tm * img.m.slices[j][i];
        }
        out.state.u.slices[j] = std::move(u);
        out.state.m.slices[j] = rho_project(grids.space, m);
    }
    out.state.v = img.v;
    out.state.P = img.P;
    return out;
}

double residuals(const MfgState& before, const MfgState& after) {
    require(before.u.times() == after.u.times() && before.m.times() == after.m.times(), ErrorCode::InvalidArgument,
            "residuals: states on different time grids");
    return std::max(sup_diff(before.u, after.u), sup_diff(before.m, after.m));
}

SolveResult solve_mfgc(const ModelSpec& model, const Grids& grids, const SolveOptions& options,
                       const std::optional<MfgState>& initial) {
    options.validate(initial.has_value());
    require(model.grid == grids.space, ErrorCode::InvalidArgument, "model grid does not match the solve grid");
    const auto start = std::chrono::steady_clock::now();

    SolveResult result;
    MfgState state = initial ? *initial : initial_state(model, grids);
    if (state.P.empty()) state.P.assign(grids.time.steps() + 1, PriceVec::Zero(model.k));
    if (state.v.times() == 0) state.v = VectorField::filled(grids, 0.0);
    check_state(model, grids, state);
    SolveReport& report = result.report;
    {
        const VectorField w0 = hjb_control_gradients(model, grids, state.u, options.pde);
        for (const VectorSlice& w : w0.slices) {
            report.monitors.grad_u_sup = std::max(report.monitors.grad_u_sup, vector_sup(w, grids.space.dim()));
        }
    }

    std::optional<MapImage> last;
    double previous_final = -1.0;
    for (const double tau : options.tau_schedule) {
        TauStage stage;
        stage.tau = tau;
        for (int it = 0; it < options.max_outer; ++it) {
            PicardResult step = picard_step(model, grids, state, tau, options);
            ++report.total_iterations;
            require(std::isfinite(step.residual), ErrorCode::NonFinite, "outer residual is not finite");
            stage.residuals.push_back(step.residual);
            update_monitors(model, grids, step.map, report.monitors);
            if (!report.monitors.ok()) {
                fail(ErrorCode::MonitorBreach, "a priori monitor breached: " + report.monitors.breaches.front());
            }
            if (it == 0 && previous_final > 0.0 && step.residual > options.tripwire_factor * previous_final) {
                stage.tripwire = true;
                std::ostringstream os;
                os << "continuation tripwire at tau = " << tau << ": first residual " << step.residual
                   << " exceeds " << options.tripwire_factor << " x previous final residual " << previous_final;
                report.warnings.push_back(os.str());
            }
            const bool done = step.residual <= options.outer_tol;
            last = std::move(step.map);
            state = std::move(step.state);
            if (done) {
                stage.converged = true;
                break;
            }
        }
        previous_final = stage.residuals.back();
        report.stages.push_back(stage);

        if (!stage.converged) {
            MfgState partial = last->image;
            fill_terminal(model, grids, partial, options.equilibrium);
            std::ostringstream os;
            os << "outer iteration did not converge at tau = " << tau << " after " << options.max_outer
               << " iterations; residual plateau " << stage.residuals.back() << " (outer_tol " << options.outer_tol
               << "). Either the model violates the monotonicity assumptions or the damping is too weak.";
            report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
            throw NonConvergenceError(os.str(), SolveResult{std::move(partial), report});
        }
    }

    result.state = last->image;
    fill_terminal(model, grids, result.state, options.equilibrium);

    const VectorField w = hjb_control_gradients(model, grids, result.state.u, options.pde);
    report.equilibrium_residuals.resize(grids.time.steps() + 1);
    for (int j = 0; j <= grids.time.steps(); ++j) {
        report.equilibrium_residuals[j] = equilibrium_residual(model, grids.time.t(j), result.state.v.slices[j],
                                                               result.state.P[j], result.state.m.slices[j], w.slices[j]);
    }
    report.converged = true;
    report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return result;
}

EquationDefects equation_defects(const ModelSpec& model, const Grids& grids, const MfgState& state,
                                 const PdeOptions& options) {
    check_state(model, grids, state);
    EquationDefects out;
    const ScalarField f = coupling_field(model, grids, state.m);
    const HjbDefect hjb = hjb_defect(model, grids, state.u, state.P, f, state.tau, options);
    out.hjb = hjb.abs;
    out.hjb_positive = hjb.positive;
    out.fp = fp_defect(model, grids, state.m, state.v, state.tau, options);
    const VectorField w = hjb_control_gradients(model, grids, state.u, options);
    out.min_m = state.m.slices[0].empty() ? 0.0 : state.m.slices[0][0];
    for (int j = 0; j <= grids.time.steps(); ++j) {
        out.equilibrium = std::max(out.equilibrium, equilibrium_residual(model, grids.time.t(j), state.v.slices[j],
                                                                         state.P[j], state.m.slices[j], w.slices[j]));
        out.mass = std::max(out.mass, std::abs(integrate(grids.space, state.m.slices[j]) - 1.0));
        out.min_m = std::min(out.min_m, *std::min_element(state.m.slices[j].begin(), state.m.slices[j].end()));
    }
    return out;
}

}  // namespace mfgc
