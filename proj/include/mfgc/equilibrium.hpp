#pragma once

#include "mfgc/model.hpp"

#include <optional>
#include <span>

namespace mfgc {

struct EquilibriumOptions {
    double tol_P = 1e-10;
    int max_iter = 200;
    double damping = 0.5;
    double jacobian_fd_step = 1e-6;

    /// Throws InvalidArgument unless tol_P > 0, max_iter >= 1, 0 < damping <= 1.
    void validate() const;
};

/// A priori bounds of the slice problem for given (m, w).
struct EquilibriumBounds {
    double v_mean = 0.0;  ///< bound on (int |v|^2 m)^{1/2}
    double P = 0.0;
    double v_sup = 0.0;
};

struct EquilibriumResult {
    VectorSlice v;
    PriceVec P;
    double residual = 0.0;
    int iterations = 0;
    bool newton_used = false;
    bool bound_ok = true;
    EquilibriumBounds bounds;
};

/// z = int phi v m (rectangle rule)
PriceVec demand(const ModelSpec& model, double t, std::span<const double> v, std::span<const double> m);

/// v(x) = -H_p(x, t, w(x) + phi(x)^T P) at every node
VectorSlice control_from_price(const ModelSpec& model, double t, std::span<const double> w, const PriceVec& P);

/// J(v) = Phi(t, int phi v m) + int (L(v) + <w, v>) m
double J_functional(const ModelSpec& model, double t, std::span<const double> v, std::span<const double> m,
                    std::span<const double> w);

EquilibriumBounds equilibrium_bounds(const ModelSpec& model, double t, std::span<const double> m,
                                     std::span<const double> w);
/// Same bounds for any w with sup |w| <= R.
EquilibriumBounds equilibrium_bounds_for_radius(const ModelSpec& model, double t, double R);

/// Solves G(P) = P - Psi(t, demand(v(P), m)) = 0 by damped fixed-point
/// iteration, falling back to finite-difference Newton when progress stalls.
/// Throws NonConvergence after max_iter.
EquilibriumResult solve_equilibrium(const ModelSpec& model, double t, std::span<const double> m,
                                    std::span<const double> w, const EquilibriumOptions& options = {},
                                    const std::optional<PriceVec>& initial_P = std::nullopt);

/// max(sup_x |v + H_p(w + phi^T P)|, |P - Psi(t, demand(v, m))|)
double equilibrium_residual(const ModelSpec& model, double t, std::span<const double> v, const PriceVec& P,
                            std::span<const double> m, std::span<const double> w);

}  // namespace mfgc
