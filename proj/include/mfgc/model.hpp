#pragma once

#include "mfgc/grid.hpp"
#include "mfgc/tabulated.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace mfgc {

inline constexpr int kMaxDim = 2;
inline constexpr int kMaxPrice = 4;

// Fixed-capacity Eigen types: no heap traffic in per-node loops.
using SpaceVec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxDim, 1>;
using PriceVec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxPrice, 1>;
using PriceMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxPrice, kMaxPrice>;
using WeightMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxPrice, kMaxDim>;

/// L(x,t,v) = (weight/2)|v|^2 + offset(x)
struct QuadraticLagrangian {
    double weight = 1.0;
    Slice offset;
};

/// 1-D L(v) given by a Hermite table of (v, L, L_v); `convexity` is the
/// claimed strong-convexity constant c_L of the table.
struct TabulatedLagrangian {
    HermiteTable table;
    double convexity = 1.0;
};

using LagrangianFamily = std::variant<QuadraticLagrangian, TabulatedLagrangian>;

/// Psi(t,z) = a z + b, Phi(t,z) = <a z, z>/2 + <b, z>
struct AffinePrice {
    PriceMat a;
    PriceVec b;
};

/// k = 1. Phi is the Hermite table of (z, Phi, Psi) and Psi := Phi'.
struct TabulatedPrice {
    HermiteTable potential;
};

using PriceFamily = std::variant<AffinePrice, TabulatedPrice>;

/// K(w) = offset + slope * w
struct LinearResponse {
    double slope = 1.0;
    double offset = 0.0;
};

using ResponseMap = std::variant<LinearResponse, LinearTable>;

struct ZeroCoupling {};

/// f(m) = K(m * kernel) * reflect(kernel), F(m) = int Kprim(m * kernel)
struct ConvolutionCoupling {
    Slice kernel;
    Slice reflected;
    ResponseMap response;
};

using CouplingFamily = std::variant<ZeroCoupling, ConvolutionCoupling>;

/// phi(x) in R^{k x d}, stored per node row-major.
struct PhiWeight {
    int k = 1;
    int d = 1;
    std::vector<double> values;

    static PhiWeight constant(const TorusGrid& grid, const WeightMat& value);
    WeightMat at(std::size_t node) const;
    double sup_norm() const;  ///< max over nodes of the spectral-norm bound ||phi(x)||_F
};

struct ModelSpec {
    TorusGrid grid;
    double sigma = 0.05;
    double horizon = 1.0;
    int k = 1;
    LagrangianFamily lagrangian = QuadraticLagrangian{};
    PhiWeight phi;
    PriceFamily price;
    CouplingFamily coupling = ZeroCoupling{};
    Slice terminal_g;
    Slice initial_m0;

    int dim() const noexcept { return grid.dim(); }
};

/// Checks sizes and sigma > 0, fills defaulted slices, clips and
/// renormalizes m0. Throws InvalidArgument / NonFinite.
ModelSpec finalize_model(ModelSpec model);

/// Convenience constructors used by fixtures and tests.
QuadraticLagrangian quadratic_lagrangian(const TorusGrid& grid, double weight, double offset = 0.0);
TabulatedLagrangian tabulate_lagrangian(const std::function<double(double)>& L,
                                        const std::function<double(double)>& dL, double lo, double hi,
                                        int count, double convexity);
AffinePrice affine_price(const PriceMat& a, const PriceVec& b);
AffinePrice scalar_affine_price(double a, double b);
TabulatedPrice tabulate_price(const std::function<double(double)>& Phi,
                              const std::function<double(double)>& Psi, double lo, double hi, int count);
ConvolutionCoupling convolution_coupling(const TorusGrid& grid, Slice kernel, ResponseMap response);
/// kernel (1/h^d) at node 0, so that m * kernel = m
Slice delta_kernel(const TorusGrid& grid);

// --- Lagrangian / Hamiltonian ---

double lagrangian(const ModelSpec& model, std::size_t node, double t, const SpaceVec& v);
SpaceVec lagrangian_grad(const ModelSpec& model, std::size_t node, double t, const SpaceVec& v);

/// H(x,t,p) = sup_v -<p,v> - L(x,t,v)
double hamiltonian(const ModelSpec& model, std::size_t node, double t, const SpaceVec& p);
/// H_p = -argmax
SpaceVec hamiltonian_grad(const ModelSpec& model, std::size_t node, double t, const SpaceVec& p);

struct HamiltonianEval {
    double value = 0.0;
    SpaceVec grad;
};

/// H and H_p together; one Legendre search for tabulated families.
HamiltonianEval hamiltonian_eval(const ModelSpec& model, std::size_t node, double t, const SpaceVec& p);

struct LegendreResult {
    double value = 0.0;
    double argmax = 0.0;
};

/// Numeric conjugate sup_v -p v - L(v) on |v| <= C(|p|+1) intersected with
/// the table. Throws SearchWindow when the maximizer lies on the window edge.
LegendreResult legendre_transform(const TabulatedLagrangian& lagrangian, double p);

/// c_L in <L_v(v2) - L_v(v1), v2 - v1> >= c_L |v2 - v1|^2
double strong_convexity(const ModelSpec& model);
/// sup_x |L_v(x,t,0)|
double lagrangian_grad_at_zero(const ModelSpec& model);

// --- coupling ---

double response(const ResponseMap& map, double w);
double response_primitive(const ResponseMap& map, double w);
/// Lipschitz bound of w -> K(w)
double response_slope_bound(const ResponseMap& map);

Slice coupling_f(const ModelSpec& model, double t, std::span<const double> m);
double coupling_F(const ModelSpec& model, double t, std::span<const double> m);

// --- price ---

PriceVec price_psi(const ModelSpec& model, double t, const PriceVec& z);
double price_phi(const ModelSpec& model, double t, const PriceVec& z);
/// sup_{|z| <= radius} |Psi(t,z)|
double price_sup_on_ball(const ModelSpec& model, double radius);

// --- validation ---

struct ValidationOptions {
    std::uint64_t seed = 20240531;
    int samples = 400;
    /// generic constant C used by the growth / Hölder-type sampled checks
    double constant = 1e4;
    double v_radius = 4.0;
    double z_radius = 4.0;
};

struct AssumptionCheck {
    std::string name;
    bool passed = true;
    std::string detail;
    std::vector<double> witness;
};

struct AssumptionReport {
    std::vector<AssumptionCheck> checks;

    bool all_passed() const;
    const AssumptionCheck* find(const std::string& name) const;
    std::vector<std::string> failed() const;
};

/// Sampled check of the convexity, growth and regularity assumptions.
/// Never throws on a failing assumption; failures carry witness points.
AssumptionReport validate_assumptions(const ModelSpec& model, const ValidationOptions& options = {});

}  // namespace mfgc
