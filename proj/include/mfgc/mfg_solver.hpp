#pragma once

#include "mfgc/equilibrium.hpp"
#include "mfgc/error.hpp"
#include "mfgc/pde.hpp"

#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace mfgc {

/// Discrete (u, m, v, P) at one homotopy level. v and P hold nt+1 slices;
/// slice j < nt is the control used by the transport step j -> j+1.
struct MfgState {
    ScalarField u;
    ScalarField m;
    VectorField v;
    std::vector<PriceVec> P;
    double tau = 0.0;
};

struct SolveOptions {
    double outer_tol = 1e-8;
    int max_outer = 500;
    double damping_u = 0.5;
    double damping_m = 0.5;
    std::vector<double> tau_schedule{0.0, 0.25, 0.5, 0.75, 1.0};
    /// warn when the first residual at a new tau exceeds this factor times the last one
    double tripwire_factor = 1e3;
    EquilibriumOptions equilibrium;
    PdeOptions pde;

    /// The schedule must be nondecreasing in [0,1] and end at 1; it must
    /// start at 0 unless the solve is given an initial state.
    void validate(bool has_initial_state) const;
};

struct TauStage {
    double tau = 0.0;
    std::vector<double> residuals;
    bool converged = false;
    bool tripwire = false;
};

/// Sup norms along the iteration next to the model-derived bounds they must respect.
struct Monitors {
    double u_sup = 0.0;
    double grad_u_sup = 0.0;
    double P_sup = 0.0;
    double v_sup = 0.0;
    double u_bound = 0.0;
    double grad_u_bound = 0.0;
    double P_bound = 0.0;
    double v_bound = 0.0;
    double max_projection = 0.0;
    std::vector<std::string> breaches;

    bool ok() const noexcept { return breaches.empty(); }
};

struct GapSummary {
    bool computed = false;
    double gap = 0.0;
    double primal = 0.0;
    double dual = 0.0;
    double hjb_defect = 0.0;
    double dual_infeasibility = 0.0;
    double fp_defect = 0.0;
    bool F_star_certified = true;
};

struct SolveReport {
    std::vector<TauStage> stages;
    std::vector<double> equilibrium_residuals;  ///< per time slice, final state
    Monitors monitors;
    GapSummary duality;
    std::vector<std::string> warnings;
    int total_iterations = 0;
    double wall_seconds = 0.0;
    bool converged = false;
};

struct SolveResult {
    MfgState state;
    SolveReport report;
};

/// Raised when the outer loop exhausts max_outer; carries the last state.
class NonConvergenceError : public MfgcError {
public:
    NonConvergenceError(const std::string& message, SolveResult partial)
        : MfgcError(ErrorCode::NonConvergence, message),
          partial_(std::make_shared<SolveResult>(std::move(partial))) {}

    const SolveResult& partial() const noexcept { return *partial_; }

private:
    std::shared_ptr<SolveResult> partial_;
};

/// Trivial initial guess: u = 0, every m slice = m0, v = 0, P = 0.
MfgState initial_state(const ModelSpec& model, const Grids& grids);

struct MapImage {
    MfgState image;       ///< (u~, m~, v, P~) before damping
    std::vector<PriceVec> hjb_P;  ///< P(rho(m), grad u) fed to the HJB sweep
    double max_projection = 0.0;
    HjbSolution hjb;
};

/// One application of T at the given tau: P from (rho(m), grad u), u~ from
/// the HJB sweep with source f(rho(m)), v from (rho(m), grad u~), m~ from FP.
MapImage apply_map(const ModelSpec& model, const Grids& grids, const MfgState& state, double tau,
                   const SolveOptions& options);

struct PicardResult {
    MfgState state;  ///< damped update
    MapImage map;
    double residual = 0.0;  ///< max(|u~ - u|, |m~ - m|)
};

PicardResult picard_step(const ModelSpec& model, const Grids& grids, const MfgState& state, double tau,
                         const SolveOptions& options);

/// max of the sup-norm deltas of u and m
double residuals(const MfgState& before, const MfgState& after);

/// Continuation over options.tau_schedule with warm starts. Throws
/// NonConvergenceError (carrying the last state) or MonitorBreach.
SolveResult solve_mfgc(const ModelSpec& model, const Grids& grids, const SolveOptions& options = {},
                       const std::optional<MfgState>& initial = std::nullopt);

struct EquationDefects {
    double hjb = 0.0;
    double hjb_positive = 0.0;
    double fp = 0.0;
    double equilibrium = 0.0;
    double mass = 0.0;
    double min_m = 0.0;
};

/// Re-evaluates every discrete equation of the system at `state`.
EquationDefects equation_defects(const ModelSpec& model, const Grids& grids, const MfgState& state,
                                 const PdeOptions& options = {});

/// gamma^j = f(t_j, m^j)
ScalarField coupling_field(const ModelSpec& model, const Grids& grids, const ScalarField& m);

}  // namespace mfgc
