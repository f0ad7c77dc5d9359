#include "mfgc/model.hpp"

#include "mfgc/error.hpp"
#include "mfgc/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace mfgc {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

double clamp_to(const HermiteTable& table, double x) { return std::clamp(x, table.lo(), table.hi()); }

}  // namespace

// --- construction ---

PhiWeight PhiWeight::constant(const TorusGrid& grid, const WeightMat& value) {
    PhiWeight w;
    w.k = static_cast<int>(value.rows());
    w.d = static_cast<int>(value.cols());
    w.values.resize(grid.size() * w.k * w.d);
    for (std::size_t node = 0; node < grid.size(); ++node) {
        for (int r = 0; r < w.k; ++r) {
            for (int c = 0; c < w.d; ++c) w.values[(node * w.k + r) * w.d + c] = value(r, c);
        }
    }
    return w;
}

WeightMat PhiWeight::at(std::size_t node) const {
    WeightMat m(k, d);
    const double* base = values.data() + node * k * d;
    for (int r = 0; r < k; ++r) {
        for (int c = 0; c < d; ++c) m(r, c) = base[r * d + c];
    }
    return m;
}

double PhiWeight::sup_norm() const {
    double best = 0.0;
    const std::size_t stride = static_cast<std::size_t>(k) * d;
    for (std::size_t off = 0; off + stride <= values.size(); off += stride) {
        double s = 0.0;
        for (std::size_t i = 0; i < stride; ++i) s += values[off + i] * values[off + i];
        best = std::max(best, std::sqrt(s));
    }
    return best;
}

QuadraticLagrangian quadratic_lagrangian(const TorusGrid& grid, double weight, double offset) {
    return QuadraticLagrangian{weight, Slice(grid.size(), offset)};
}

TabulatedLagrangian tabulate_lagrangian(const std::function<double(double)>& L,
                                        const std::function<double(double)>& dL, double lo, double hi,
                                        int count, double convexity) {
    std::vector<double> x(count), y(count), dy(count);
    for (int i = 0; i < count; ++i) {
        x[i] = lo + (hi - lo) * i / (count - 1);
        y[i] = L(x[i]);
        dy[i] = dL(x[i]);
    }
    return TabulatedLagrangian{HermiteTable(std::move(x), std::move(y), std::move(dy)), convexity};
}

AffinePrice affine_price(const PriceMat& a, const PriceVec& b) { return AffinePrice{a, b}; }

AffinePrice scalar_affine_price(double a, double b) {
    PriceMat am(1, 1);
    am(0, 0) = a;
    PriceVec bv(1);
    bv(0) = b;
    return AffinePrice{am, bv};
}

TabulatedPrice tabulate_price(const std::function<double(double)>& Phi,
                              const std::function<double(double)>& Psi, double lo, double hi, int count) {
    std::vector<double> x(count), y(count), dy(count);
    for (int i = 0; i < count; ++i) {
        x[i] = lo + (hi - lo) * i / (count - 1);
        y[i] = Phi(x[i]);
        dy[i] = Psi(x[i]);
    }
    return TabulatedPrice{HermiteTable(std::move(x), std::move(y), std::move(dy))};
}

ConvolutionCoupling convolution_coupling(const TorusGrid& grid, Slice kernel, ResponseMap response) {
    require(kernel.size() == grid.size(), ErrorCode::InvalidArgument, "coupling kernel size mismatch");
    Slice reflected = reflect(grid, kernel);
    return ConvolutionCoupling{std::move(kernel), std::move(reflected), std::move(response)};
}

Slice delta_kernel(const TorusGrid& grid) {
    Slice k(grid.size(), 0.0);
    k[0] = 1.0 / grid.cell_volume();
    return k;
}

ModelSpec finalize_model(ModelSpec model) {
    const TorusGrid& grid = model.grid;
    const std::size_t N = grid.size();
    require(std::isfinite(model.sigma) && model.sigma > 0.0, ErrorCode::InvalidArgument,
            "sigma must be positive");
    require(std::isfinite(model.horizon) && model.horizon > 0.0, ErrorCode::InvalidArgument,
            "horizon T must be positive");
    require(model.k >= 1 && model.k <= kMaxPrice, ErrorCode::InvalidArgument,
            "price dimension k must be in 1..4");

    std::visit(overloaded{
                   [&](QuadraticLagrangian& q) {
                       require(std::isfinite(q.weight) && q.weight > 0.0, ErrorCode::InvalidArgument,
                               "quadratic lagrangian weight must be positive");
                       if (q.offset.empty()) q.offset.assign(N, 0.0);
                       require(q.offset.size() == N, ErrorCode::InvalidArgument,
                               "lagrangian offset size mismatch");
                       require_finite(q.offset, "lagrangian offset");
                   },
                   [&](TabulatedLagrangian& t) {
                       require(grid.dim() == 1, ErrorCode::InvalidArgument,
                               "tabulated lagrangian requires d = 1");
                       require(t.convexity > 0.0, ErrorCode::InvalidArgument,
                               "tabulated lagrangian needs a positive convexity constant");
                       require(t.table.contains(0.0), ErrorCode::InvalidArgument,
                               "tabulated lagrangian table must contain v = 0");
                       require_finite(t.table.values(), "lagrangian table");
                       require_finite(t.table.slopes(), "lagrangian table");
                   },
               },
               model.lagrangian);

    if (model.phi.values.empty()) {
        model.phi = PhiWeight::constant(grid, WeightMat::Ones(model.k, grid.dim()));
    }
    require(model.phi.k == model.k && model.phi.d == grid.dim(), ErrorCode::InvalidArgument,
            "phi must be k x d");
    require(model.phi.values.size() == N * model.k * grid.dim(), ErrorCode::InvalidArgument,
            "phi sample count mismatch");
    require_finite(model.phi.values, "phi");

    std::visit(overloaded{
                   [&](AffinePrice& a) {
                       require(a.a.rows() == model.k && a.a.cols() == model.k && a.b.size() == model.k,
                               ErrorCode::InvalidArgument, "affine price needs a k x k matrix and k-vector");
                       require(a.a.allFinite() && a.b.allFinite(), ErrorCode::NonFinite, "affine price data");
                       const double scale = 1.0 + a.a.cwiseAbs().maxCoeff();
                       require((a.a - a.a.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * scale,
                               ErrorCode::InvalidArgument, "affine price matrix must be symmetric");
                   },
                   [&](TabulatedPrice& t) {
                       require(model.k == 1, ErrorCode::InvalidArgument, "tabulated price requires k = 1");
                       require(t.potential.contains(0.0), ErrorCode::InvalidArgument,
                               "tabulated price table must contain z = 0");
                       require_finite(t.potential.values(), "price table");
                       require_finite(t.potential.slopes(), "price table");
                       // normalization Phi(t,0) = 0
                       const double phi0 = t.potential.value(0.0);
                       if (phi0 != 0.0) {
                           std::vector<double> x(t.potential.nodes().begin(), t.potential.nodes().end());
                           std::vector<double> y(t.potential.values().begin(), t.potential.values().end());
                           std::vector<double> dy(t.potential.slopes().begin(), t.potential.slopes().end());
                           for (double& v : y) v -= phi0;
                           t.potential = HermiteTable(std::move(x), std::move(y), std::move(dy));
                       }
                   },
               },
               model.price);

    if (auto* conv = std::get_if<ConvolutionCoupling>(&model.coupling)) {
        require(conv->kernel.size() == N, ErrorCode::InvalidArgument, "coupling kernel size mismatch");
        require_finite(conv->kernel, "coupling kernel");
        conv->reflected = reflect(grid, conv->kernel);
        if (auto* lin = std::get_if<LinearResponse>(&conv->response)) {
            require(std::isfinite(lin->slope) && std::isfinite(lin->offset), ErrorCode::NonFinite,
                    "coupling response");
        }
    }

    if (model.terminal_g.empty()) model.terminal_g.assign(N, 0.0);
    require(model.terminal_g.size() == N, ErrorCode::InvalidArgument, "terminal g size mismatch");
    require_finite(model.terminal_g, "terminal g");

    if (model.initial_m0.empty()) model.initial_m0.assign(N, 1.0);
    require(model.initial_m0.size() == N, ErrorCode::InvalidArgument, "initial m0 size mismatch");
    require_finite(model.initial_m0, "initial m0");
    for (double& v : model.initial_m0) v = std::max(v, 0.0);
    const double mass = integrate(grid, model.initial_m0);
    require(mass > 0.0, ErrorCode::InvalidArgument, "initial m0 has zero mass");
    for (double& v : model.initial_m0) v /= mass;
    return model;
}

// --- Lagrangian / Hamiltonian ---

double lagrangian(const ModelSpec& model, std::size_t node, double, const SpaceVec& v) {
    return std::visit(overloaded{
                          [&](const QuadraticLagrangian& q) { return 0.5 * q.weight * v.squaredNorm() + q.offset[node]; },
                          [&](const TabulatedLagrangian& t) { return t.table.value(v(0)); },
                      },
                      model.lagrangian);
}

SpaceVec lagrangian_grad(const ModelSpec& model, std::size_t, double, const SpaceVec& v) {
    return std::visit(overloaded{
                          [&](const QuadraticLagrangian& q) -> SpaceVec { return q.weight * v; },
                          [&](const TabulatedLagrangian& t) -> SpaceVec {
                              SpaceVec g(1);
                              g(0) = t.table.derivative(v(0));
                              return g;
                          },
                      },
                      model.lagrangian);
}

LegendreResult legendre_transform(const TabulatedLagrangian& lag, double p) {
    require(std::isfinite(p), ErrorCode::NonFinite, "legendre_transform: non-finite p");
    const HermiteTable& table = lag.table;
    const double g0 = std::abs(table.derivative(clamp_to(table, 0.0)));
    // |v*| <= (|p| + |L_v(0)|) / c_L from strong convexity
    const double C = 1.05 * std::max(1.0, g0) / lag.convexity;
    const double window = C * (std::abs(p) + 1.0);
    const double lo = std::max(table.lo(), -window);
    const double hi = std::min(table.hi(), window);
    const auto objective = [&](double v) { return -p * v - table.value(v); };
    const auto slope = [&](double v) { return -p - table.derivative(v); };
    const Maximum1d best = maximize_concave(objective, slope, lo, hi);
    if (best.on_boundary) {
        std::ostringstream msg;
        msg << "search window too small: maximizer of -p v - L(v) at boundary v = " << best.argmax
            << " for p = " << p;
        fail(ErrorCode::SearchWindow, msg.str());
    }
    return LegendreResult{best.value, best.argmax};
}

double hamiltonian(const ModelSpec& model, std::size_t node, double, const SpaceVec& p) {
    return std::visit(overloaded{
                          [&](const QuadraticLagrangian& q) { return p.squaredNorm() / (2.0 * q.weight) - q.offset[node]; },
                          [&](const TabulatedLagrangian& tab) { return legendre_transform(tab, p(0)).value; },
                      },
                      model.lagrangian);
}

SpaceVec hamiltonian_grad(const ModelSpec& model, std::size_t, double, const SpaceVec& p) {
    return std::visit(overloaded{
                          [&](const QuadraticLagrangian& q) -> SpaceVec { return p / q.weight; },
                          [&](const TabulatedLagrangian& tab) -> SpaceVec {
                              SpaceVec g(1);
                              g(0) = -legendre_transform(tab, p(0)).argmax;
                              return g;
                          },
                      },
                      model.lagrangian);
}

HamiltonianEval hamiltonian_eval(const ModelSpec& model, std::size_t node, double, const SpaceVec& p) {
    return std::visit(overloaded{
                          [&](const QuadraticLagrangian& q) {
                              return HamiltonianEval{p.squaredNorm() / (2.0 * q.weight) - q.offset[node],
                                                     SpaceVec(p / q.weight)};
                          },
                          [&](const TabulatedLagrangian& tab) {
                              const LegendreResult r = legendre_transform(tab, p(0));
                              SpaceVec g(1);
                              g(0) = -r.argmax;
                              return HamiltonianEval{r.value, g};
                          },
                      },
                      model.lagrangian);
}

double strong_convexity(const ModelSpec& model) {
    return std::visit(overloaded{
                          [](const QuadraticLagrangian& q) { return q.weight; },
                          [](const TabulatedLagrangian& t) { return t.convexity; },
                      },
                      model.lagrangian);
}

double lagrangian_grad_at_zero(const ModelSpec& model) {
    return std::visit(overloaded{
                          [](const QuadraticLagrangian&) { return 0.0; },
                          [](const TabulatedLagrangian& t) {
                              return std::abs(t.table.derivative(clamp_to(t.table, 0.0)));
                          },
                      },
                      model.lagrangian);
}

// --- coupling ---

double response(const ResponseMap& map, double w) {
    return std::visit(overloaded{
                          [&](const LinearResponse& l) { return l.offset + l.slope * w; },
                          [&](const LinearTable& t) { return t.value(w); },
                      },
                      map);
}

double response_primitive(const ResponseMap& map, double w) {
    return std::visit(overloaded{
                          [&](const LinearResponse& l) { return l.offset * w + 0.5 * l.slope * w * w; },
                          [&](const LinearTable& t) { return t.primitive(w); },
                      },
                      map);
}

double response_slope_bound(const ResponseMap& map) {
    return std::visit(overloaded{
                          [](const LinearResponse& l) { return std::abs(l.slope); },
                          [](const LinearTable& t) { return t.max_slope(); },
                      },
                      map);
}

Slice coupling_f(const ModelSpec& model, double, std::span<const double> m) {
    const auto* conv = std::get_if<ConvolutionCoupling>(&model.coupling);
    if (conv == nullptr) return Slice(model.grid.size(), 0.0);
    Slice smoothed = periodic_convolve(model.grid, m, conv->kernel);
    for (double& w : smoothed) w = response(conv->response, w);
    return periodic_convolve(model.grid, smoothed, conv->reflected);
}

double coupling_F(const ModelSpec& model, double, std::span<const double> m) {
    const auto* conv = std::get_if<ConvolutionCoupling>(&model.coupling);
    if (conv == nullptr) return 0.0;
    Slice smoothed = periodic_convolve(model.grid, m, conv->kernel);
    for (double& w : smoothed) w = response_primitive(conv->response, w);
    return integrate(model.grid, smoothed);
}

// --- price ---

PriceVec price_psi(const ModelSpec& model, double, const PriceVec& z) {
    return std::visit(overloaded{
                          [&](const AffinePrice& a) -> PriceVec { return a.a * z + a.b; },
                          [&](const TabulatedPrice& t) -> PriceVec {
                              PriceVec out(1);
                              out(0) = t.potential.derivative(z(0));
                              return out;
                          },
                      },
                      model.price);
}

double price_phi(const ModelSpec& model, double, const PriceVec& z) {
    return std::visit(overloaded{
                          [&](const AffinePrice& a) { return 0.5 * z.dot(a.a * z) + a.b.dot(z); },
                          [&](const TabulatedPrice& t) { return t.potential.value(z(0)); },
                      },
                      model.price);
}

double price_sup_on_ball(const ModelSpec& model, double radius) {
    return std::visit(overloaded{
                          [&](const AffinePrice& a) {
                              Eigen::SelfAdjointEigenSolver<PriceMat> eig(a.a);
                              const double spectral = eig.eigenvalues().cwiseAbs().maxCoeff();
                              return spectral * radius + a.b.norm();
                          },
                          [&](const TabulatedPrice& t) {
                              const double lo = std::max(t.potential.lo(), -radius);
                              const double hi = std::min(t.potential.hi(), radius);
                              double best = 0.0;
                              for (int i = 0; i <= 256; ++i) {
                                  best = std::max(best, std::abs(t.potential.derivative(lo + (hi - lo) * i / 256.0)));
                              }
                              return best;
                          },
                      },
                      model.price);
}

// --- validation ---

bool AssumptionReport::all_passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const AssumptionCheck& c) { return c.passed; });
}

const AssumptionCheck* AssumptionReport::find(const std::string& name) const {
    for (const auto& c : checks) {
        if (c.name == name) return &c;
    }
    return nullptr;
}

std::vector<std::string> AssumptionReport::failed() const {
    std::vector<std::string> out;
    for (const auto& c : checks) {
        if (!c.passed) out.push_back(c.name);
    }
    return out;
}

namespace {

struct Sampler {
    const ModelSpec& model;
    Rng rng;

    double time() { return rng.uniform(0.0, model.horizon); }
    std::size_t node() { return rng.index(model.grid.size()); }

    SpaceVec velocity(double radius) {
        SpaceVec v(model.dim());
        if (const auto* tab = std::get_if<TabulatedLagrangian>(&model.lagrangian)) {
            v(0) = rng.uniform(std::max(tab->table.lo(), -radius), std::min(tab->table.hi(), radius));
        } else {
            for (int c = 0; c < model.dim(); ++c) v(c) = rng.uniform(-radius, radius);
        }
        return v;
    }

    PriceVec demand(double radius) {
        PriceVec z(model.k);
        if (const auto* tab = std::get_if<TabulatedPrice>(&model.price)) {
            z(0) = rng.uniform(std::max(tab->potential.lo(), -radius), std::min(tab->potential.hi(), radius));
        } else {
            for (int c = 0; c < model.k; ++c) z(c) = rng.uniform(-radius, radius);
        }
        return z;
    }

    /// random smooth-ish positive density of unit mass
    Slice density() {
        const TorusGrid& g = model.grid;
        Slice m(g.size());
        const double a1 = rng.uniform(-1.0, 1.0);
        const double a2 = rng.uniform(-1.0, 1.0);
        const double s1 = rng.uniform(0.0, 1.0);
        const double s2 = rng.uniform(0.0, 1.0);
        for (std::size_t i = 0; i < g.size(); ++i) {
            double arg = a1 * std::cos(2 * M_PI * (g.coord(i, 0) - s1));
            if (g.dim() == 2) arg += a2 * std::cos(2 * M_PI * (g.coord(i, 1) - s2));
            else arg += a2 * std::sin(4 * M_PI * (g.coord(i, 0) - s2));
            m[i] = std::exp(arg) * rng.uniform(0.8, 1.2);
        }
        const double mass = integrate(g, m);
        for (double& v : m) v /= mass;
        return m;
    }
};

std::vector<double> concat(const SpaceVec& a, const SpaceVec& b) {
    std::vector<double> w(a.data(), a.data() + a.size());
    w.insert(w.end(), b.data(), b.data() + b.size());
    return w;
}

double torus_distance(const TorusGrid& g, std::size_t a, std::size_t b) {
    double s = 0.0;
    for (int c = 0; c < g.dim(); ++c) {
        double d = std::abs(g.coord(a, c) - g.coord(b, c));
        d = std::min(d, 1.0 - d);
        s += d * d;
    }
    return std::sqrt(s);
}

std::string describe(const char* what, double lhs, double rhs) {
    std::ostringstream os;
    os << what << ": " << lhs << " vs " << rhs;
    return os.str();
}

}  // namespace

AssumptionReport validate_assumptions(const ModelSpec& model, const ValidationOptions& opt) {
    AssumptionReport report;
    Sampler sample{model, Rng(opt.seed)};
    const double C = opt.constant;
    const int S = opt.samples;

    auto add = [&](AssumptionCheck check) { report.checks.push_back(std::move(check)); };

    add({"sigma_positive", model.sigma > 0.0, describe("sigma", model.sigma, 0.0), {model.sigma}});

    {
        AssumptionCheck check{"A1_strong_convexity", true, "sampled strong monotonicity of L_v", {}};
        const double c = strong_convexity(model);
        if (!(c > 0.0)) {
            check.passed = false;
            check.detail = "non-positive convexity constant";
        }
        for (int s = 0; s < S && check.passed; ++s) {
            const std::size_t x = sample.node();
            const double t = sample.time();
            const SpaceVec v1 = sample.velocity(opt.v_radius);
            const SpaceVec v2 = sample.velocity(opt.v_radius);
            const double lhs = (lagrangian_grad(model, x, t, v2) - lagrangian_grad(model, x, t, v1)).dot(v2 - v1);
            const double rhs = c * (v2 - v1).squaredNorm();
            if (lhs < rhs * (1.0 - 1e-9) - 1e-12) {
                check.passed = false;
                check.detail = describe("<L_v(v2)-L_v(v1), v2-v1> < c_L|v2-v1|^2", lhs, rhs);
                check.witness = concat(v1, v2);
            }
        }
        add(check);
    }

    {
        AssumptionCheck check{"A2_quadratic_growth", true, "L(v) <= C|v|^2 + C on samples", {}};
        for (int s = 0; s < S && check.passed; ++s) {
            const std::size_t x = sample.node();
            const double t = sample.time();
            const SpaceVec v = sample.velocity(opt.v_radius);
            const double L = lagrangian(model, x, t, v);
            if (!(L <= C * v.squaredNorm() + C)) {
                check.passed = false;
                check.detail = describe("L(v) exceeds C|v|^2 + C", L, C * v.squaredNorm() + C);
                check.witness = concat(v, v);
            }
        }
        add(check);
    }

    {
        AssumptionCheck check{"A3_lipschitz_x", true, "|L(y,v)-L(x,v)| <= C|y-x|(1+|v|^2)", {}};
        for (int s = 0; s < S && check.passed && model.grid.size() > 1; ++s) {
            const std::size_t x = sample.node();
            std::size_t y = sample.node();
            if (y == x) y = model.grid.shift(x, 0, 1);
            const double t = sample.time();
            const SpaceVec v = sample.velocity(opt.v_radius);
            const double lhs = std::abs(lagrangian(model, y, t, v) - lagrangian(model, x, t, v));
            const double rhs = C * torus_distance(model.grid, x, y) * (1.0 + v.squaredNorm());
            if (lhs > rhs) {
                check.passed = false;
                check.detail = describe("x-Lipschitz bound violated", lhs, rhs);
                check.witness = {model.grid.coord(x, 0), model.grid.coord(y, 0)};
            }
        }
        add(check);
    }

    {
        AssumptionCheck check{"A4_psi_linear_growth", true, "|Psi(z)| <= C|z| + C", {}};
        for (int s = 0; s < S && check.passed; ++s) {
            const PriceVec z = sample.demand(opt.z_radius);
            const double lhs = price_psi(model, sample.time(), z).norm();
            if (lhs > C * z.norm() + C) {
                check.passed = false;
                check.detail = describe("linear growth violated", lhs, C * z.norm() + C);
                check.witness.assign(z.data(), z.data() + z.size());
            }
        }
        add(check);
    }

    {
        AssumptionCheck check{"psi_monotone", true, "<Psi(z2)-Psi(z1), z2-z1> >= 0", {}};
        for (int s = 0; s < S && check.passed; ++s) {
            const double t = sample.time();
            const PriceVec z1 = sample.demand(opt.z_radius);
            const PriceVec z2 = sample.demand(opt.z_radius);
            const double lhs = (price_psi(model, t, z2) - price_psi(model, t, z1)).dot(z2 - z1);
            if (lhs < -1e-12 * (1.0 + (z2 - z1).squaredNorm())) {
                check.passed = false;
                check.detail = describe("monotonicity gap", lhs, 0.0);
                check.witness.assign(z1.data(), z1.data() + z1.size());
                check.witness.insert(check.witness.end(), z2.data(), z2.data() + z2.size());
            }
        }
        add(check);
    }

    {
        AssumptionCheck check{"phi_potential", true, "Phi(t,0) = 0 and Phi_z = Psi by central differences", {}};
        PriceVec zero = PriceVec::Zero(model.k);
        const double phi0 = price_phi(model, 0.0, zero);
        if (std::abs(phi0) > 1e-12) {
            check.passed = false;
            check.detail = describe("Phi(t,0) != 0", phi0, 0.0);
        }
        for (int s = 0; s < S && check.passed; ++s) {
            const double t = sample.time();
            const PriceVec z = sample.demand(0.9 * opt.z_radius);
            const PriceVec psi = price_psi(model, t, z);
            for (int c = 0; c < model.k; ++c) {
                const double step = 1e-5 * (1.0 + std::abs(z(c)));
                PriceVec zp = z, zm = z;
                zp(c) += step;
                zm(c) -= step;
                double fd = 0.0;
                try {
                    fd = (price_phi(model, t, zp) - price_phi(model, t, zm)) / (2 * step);
                } catch (const MfgcError&) {
                    continue;  // stencil left the tabulated range
                }
                if (std::abs(fd - psi(c)) > 1e-6 * (1.0 + std::abs(psi(c)))) {
                    check.passed = false;
                    check.detail = describe("Phi_z vs Psi", fd, psi(c));
                    check.witness.assign(z.data(), z.data() + z.size());
                    break;
                }
            }
        }
        add(check);
    }

    {
        AssumptionCheck check{"A5_f_bounded", true, "|f(x,t,m)| <= C on sampled densities", {}};
        Slice uniform(model.grid.size(), 1.0);
        for (int s = 0; s < std::min(S, 60) && check.passed; ++s) {
            const Slice m = s == 0 ? uniform : sample.density();
            try {
                const double sup = sup_norm(coupling_f(model, sample.time(), m));
                if (sup > C) {
                    check.passed = false;
                    check.detail = describe("sup |f| exceeds C", sup, C);
                }
            } catch (const MfgcError& e) {
                check.passed = false;
                check.detail = e.what();
            }
        }
        add(check);
    }

    {
        AssumptionCheck check{"K_monotone", true, "K(x,t,.) nondecreasing (monotone coupling)", {}};
        if (const auto* conv = std::get_if<ConvolutionCoupling>(&model.coupling)) {
            double lo = -1.0, hi = 1.0;
            double kmax = 0.0;
            for (double v : conv->kernel) kmax = std::max(kmax, std::abs(v));
            hi = kmax;
            lo = -kmax;
            if (const auto* tab = std::get_if<LinearTable>(&conv->response)) {
                lo = std::max(lo, tab->lo());
                hi = std::min(hi, tab->hi());
            }
            for (int s = 0; s < S && check.passed; ++s) {
                const double w1 = sample.rng.uniform(lo, hi);
                const double w2 = sample.rng.uniform(lo, hi);
                const double gap = (response(conv->response, w2) - response(conv->response, w1)) * (w2 - w1);
                if (gap < -1e-14) {
                    check.passed = false;
                    check.detail = describe("K decreasing", gap, 0.0);
                    check.witness = {w1, w2};
                }
            }
        }
        add(check);
    }

    {
        AssumptionCheck check{"A6_sampled_regularity", true,
                              "bounded difference quotients of L_v, Psi and phi (Hölder continuity is not certifiable from samples)",
                              {}};
        for (int s = 0; s < S && check.passed; ++s) {
            const std::size_t x = sample.node();
            const double t = sample.time();
            const SpaceVec v1 = sample.velocity(opt.v_radius);
            const SpaceVec v2 = sample.velocity(opt.v_radius);
            const double dv = (v2 - v1).norm();
            if (dv > 1e-12) {
                const double q = (lagrangian_grad(model, x, t, v2) - lagrangian_grad(model, x, t, v1)).norm() / dv;
                if (q > C) {
                    check.passed = false;
                    check.detail = describe("L_v difference quotient", q, C);
                    check.witness = concat(v1, v2);
                }
            }
            const PriceVec z1 = sample.demand(opt.z_radius);
            const PriceVec z2 = sample.demand(opt.z_radius);
            const double dz = (z2 - z1).norm();
            if (dz > 1e-12) {
                const double q = (price_psi(model, t, z2) - price_psi(model, t, z1)).norm() / dz;
                if (q > C) {
                    check.passed = false;
                    check.detail = describe("Psi difference quotient", q, C);
                }
            }
            const std::size_t y = model.grid.shift(x, 0, 1);
            const double q = (model.phi.at(y) - model.phi.at(x)).norm() / model.grid.h();
            if (q > C) {
                check.passed = false;
                check.detail = describe("phi difference quotient", q, C);
            }
        }
        add(check);
    }

    {
        AssumptionCheck check{"A7_f_sampled_regularity", true, "bounded difference quotients of f in x and m", {}};
        for (int s = 0; s < std::min(S, 40) && check.passed; ++s) {
            const double t = sample.time();
            const Slice m1 = sample.density();
            const Slice m2 = sample.density();
            try {
                const Slice f1 = coupling_f(model, t, m1);
                const Slice f2 = coupling_f(model, t, m2);
                const double dm = sup_distance(m1, m2);
                if (dm > 1e-12 && sup_distance(f1, f2) / dm > C) {
                    check.passed = false;
                    check.detail = describe("f difference quotient in m", sup_distance(f1, f2) / dm, C);
                }
                for (std::size_t i = 0; i < model.grid.size() && check.passed; ++i) {
                    const double q = std::abs(f1[model.grid.shift(i, 0, 1)] - f1[i]) / model.grid.h();
                    if (q > C) {
                        check.passed = false;
                        check.detail = describe("f difference quotient in x", q, C);
                    }
                }
            } catch (const MfgcError& e) {
                check.passed = false;
                check.detail = e.what();
            }
        }
        add(check);
    }

    {
        AssumptionCheck check{"A8_data_regularity", true, "bounded second differences of m0 and g", {}};
        const double lm = sup_norm(laplacian(model.grid, model.initial_m0));
        const double lg = sup_norm(laplacian(model.grid, model.terminal_g));
        if (lm > C || lg > C) {
            check.passed = false;
            check.detail = describe("sup |Lap m0|, sup |Lap g|", lm, lg);
            check.witness = {lm, lg};
        }
        add(check);
    }

    {
        AssumptionCheck check{"m0_density", true, "m0 >= 0 with unit mass", {}};
        const double mass = integrate(model.grid, model.initial_m0);
        const double mn = *std::min_element(model.initial_m0.begin(), model.initial_m0.end());
        if (std::abs(mass - 1.0) > 1e-10 || mn < 0.0) {
            check.passed = false;
            check.detail = describe("mass, min", mass, mn);
        }
        add(check);
    }
    return report;
}

}  // namespace mfgc
