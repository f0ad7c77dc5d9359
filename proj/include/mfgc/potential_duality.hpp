#pragma once

#include "mfgc/mfg_solver.hpp"

#include <cstdint>

namespace mfgc {

/// Time sums pair slice j with step j (left rectangle): this is the rule
/// under which the discrete HJB and FP sweeps are exactly adjoint.
struct PotentialValue {
    double total = 0.0;
    double running = 0.0;   ///< sum dt <L(v^j), m^j>
    double coupling = 0.0;  ///< sum dt F(m^j), or sum dt <f~^j, m^j> for the incomplete potential
    double price = 0.0;     ///< sum dt Phi(z^j)
    double terminal = 0.0;  ///< <g, m^nt>
};

struct DualValue {
    double total = 0.0;
    double initial = 0.0;      ///< <u^0, m0>
    double price_conj = 0.0;   ///< -sum dt Phi*(P^j)
    double coupling_conj = 0.0;  ///< -sum dt F*(gamma^j)
    bool infinite = false;     ///< some Phi*(P^j) = +inf
    bool F_star_certified = true;
};

PotentialValue potential_B_incomplete(const ModelSpec& model, const Grids& grids, const ScalarField& m,
                                      const VectorField& v, const ScalarField& f_tilde);
PotentialValue potential_B_full(const ModelSpec& model, const Grids& grids, const ScalarField& m,
                                const VectorField& v);

struct ConjugateValue {
    double value = 0.0;
    bool infinite = false;
    /// tabulated Phi only: maximizer on the table edge, sup taken over the table
    bool on_boundary = false;
};

/// Phi*(t,P) = sup_z <P,z> - Phi(t,z)
ConjugateValue conjugate_phi_star(const ModelSpec& model, double t, const PriceVec& P);

struct FStarOptions {
    double tol = 1e-8;
    int max_iter = 20000;
    int random_starts = 3;
    std::uint64_t seed = 7;
};

struct FStarValue {
    double value = 0.0;        ///< best objective found, a lower bound of the sup
    double gap_bound = 0.0;    ///< Frank-Wolfe bound: sup <= value + gap_bound
    bool certified = true;     ///< gap_bound <= tol
    Slice argmax;
};

/// F*(t,gamma) = sup over grid densities m of <gamma,m> - F(t,m)
FStarValue conjugate_F_star(const ModelSpec& model, double t, std::span<const double> gamma,
                            const FStarOptions& options = {});

DualValue dual_D(const ModelSpec& model, const Grids& grids, const ScalarField& u, const std::vector<PriceVec>& P,
                 const ScalarField& gamma, const FStarOptions& options = {});

struct DualityGap {
    double gap = 0.0;
    PotentialValue primal;
    DualValue dual;
    double hjb_defect = 0.0;          ///< sup |HJB equation residual| with source gamma
    double dual_infeasibility = 0.0;  ///< sup of the positive part of the dual constraint
    double fp_defect = 0.0;           ///< primal feasibility of (m, v)
    double eps_quad = 0.0;            ///< 1e-9 (1 + |B|)
};

/// B_full(m,v) - D(u,P,gamma) with gamma = f(m).
DualityGap duality_gap(const ModelSpec& model, const Grids& grids, const MfgState& state,
                       const PdeOptions& pde = {}, const FStarOptions& options = {});

/// Copies the gap figures into the report summary.
GapSummary summarize(const DualityGap& gap);

}  // namespace mfgc
