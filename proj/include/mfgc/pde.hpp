#pragma once

#include "mfgc/model.hpp"

#include <span>
#include <vector>

namespace mfgc {

struct PdeOptions {
    /// implicitness of the diffusion step, 1 = backward Euler, 0.5 = Crank-Nicolson
    double theta = 1.0;
    double cfl_safety = 0.9;
    double linear_solver_tol = 1e-12;

    void validate() const;
};

/// Constant-coefficient cyclic tridiagonal system (sub, diag, super) of
/// size n, solved by Thomas elimination plus a Sherman-Morrison correction.
class CyclicTridiagonal {
public:
    CyclicTridiagonal(int n, double sub, double diag, double super);

    /// Solves A x = b in place (x holds b on entry).
    void solve(std::span<double> x) const;
    /// sup |A x - b|
    double residual(std::span<const double> x, std::span<const double> b) const;

private:
    int n_;
    double sub_, diag_, super_;
    double gamma_;
    std::vector<double> c_prime_;  // forward-sweep coefficients of the modified matrix
    std::vector<double> denom_;
    std::vector<double> z_;        // A'^{-1} u of the rank-one correction
    double z_denominator_ = 1.0;

    void thomas(std::span<double> x) const;
};

/// S = prod over axes of (I - theta dt sigma D_axis)^{-1} (I + (1-theta) dt sigma D_axis).
/// Symmetric and mass preserving; applied per axis by cyclic solves.
class DiffusionOperator {
public:
    DiffusionOperator(const TorusGrid& grid, double sigma, double dt, const PdeOptions& options);

    Slice apply(std::span<const double> x) const;

private:
    TorusGrid grid_;
    double theta_;
    double r_;
    double tol_;
    CyclicTridiagonal system_;
};

/// rho(m) = m+ / max(1, int m+) + 1 - int m+ / max(1, int m+)
Slice rho_project(const TorusGrid& grid, std::span<const double> m);
/// Lipschitz constant of rho in sup norm on {||m||_inf <= R}
double rho_lipschitz(double R);

struct HjbSolution {
    ScalarField u;
    /// w^j = grad(S u^{j+1}), j = 0..nt-1, plus grad u^nt as the last slice
    VectorField w;
    double max_abs_H = 0.0;
    double max_speed = 0.0;   ///< sup |H_p| over visited gradients
    double u_sup = 0.0;
    double u_bound = 0.0;     ///< tau (C_g + T (C_f + max |H|))
    bool bound_ok = true;
};

/// Backward sweep of -u_t - sigma Lap u + tau H(grad u + phi^T P) = tau f,
/// u(T) = tau g. P_traj and f_traj are indexed by time step (>= nt entries).
/// Throws CflViolation (with a suggested nt) or LinearSolverBreakdown.
HjbSolution hjb_backward(const ModelSpec& model, const Grids& grids, const std::vector<PriceVec>& P_traj,
                         const ScalarField& f_traj, double tau, const PdeOptions& options = {});

/// w^j = grad(S u^{j+1}) for j < nt and grad u^nt for the terminal slice.
VectorField hjb_control_gradients(const ModelSpec& model, const Grids& grids, const ScalarField& u,
                                  const PdeOptions& options = {});

struct FpSolution {
    ScalarField m;
    double max_projection = 0.0;  ///< sup |rho(x) - x| over steps, the positivity repair size
};

/// Forward sweep of m_t - sigma Lap m + tau div(v m) = 0 from m(0) = m_init;
/// v indexed by time step (>= nt slices).
FpSolution fp_forward(const ModelSpec& model, const Grids& grids, const VectorField& v, double tau,
                      const PdeOptions& options = {});
FpSolution fp_forward(const ModelSpec& model, const Grids& grids, const VectorField& v, double tau,
                      std::span<const double> m_init, const PdeOptions& options = {});

struct HjbDefect {
    double abs = 0.0;       ///< sup of |u^j - (S u^{j+1} + dt tau (f^j - H^j))| and |u^nt - tau g|
    double positive = 0.0;  ///< sup of the positive parts (dual-feasibility violation)
};

HjbDefect hjb_defect(const ModelSpec& model, const Grids& grids, const ScalarField& u,
                     const std::vector<PriceVec>& P_traj, const ScalarField& f_traj, double tau,
                     const PdeOptions& options = {});

/// sup of |m^{j+1} - rho(S(m^j - dt tau div(v^j m^j)))| and |m^0 - m0|
double fp_defect(const ModelSpec& model, const Grids& grids, const ScalarField& m, const VectorField& v,
                 double tau, const PdeOptions& options = {});

}  // namespace mfgc
