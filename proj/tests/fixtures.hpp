#pragma once

#include "mfgc/numerics.hpp"
#include "mfgc/potential_duality.hpp"

#include <cmath>
#include <filesystem>
#include <numbers>

namespace fixtures {

using namespace mfgc;

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// L = v^2/2, phi = 1, Psi(z) = a z + b, f = 0, g = 0, m0 uniform
inline ModelSpec homogeneous(int n, double sigma = 0.05, double a = 1.0, double b = 1.0, int d = 1) {
    ModelSpec m;
    m.grid = TorusGrid::make(d, n);
    m.sigma = sigma;
    m.lagrangian = quadratic_lagrangian(m.grid, 1.0);
    m.price = scalar_affine_price(a, b);
    return finalize_model(m);
}

/// periodic Gaussian bump 0.2 + exp(-dist^2 / (2 * 0.1^2)) around x = 0.5
inline Slice bump(const TorusGrid& grid) {
    Slice out(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        double r2 = 0.0;
        for (int c = 0; c < grid.dim(); ++c) {
            const double dx = std::abs(grid.coord(i, c) - 0.5);
            const double dist = std::min(dx, 1.0 - dx);
            r2 += dist * dist;
        }
        out[i] = 0.2 + std::exp(-r2 / (2.0 * 0.1 * 0.1));
    }
    return out;
}

/// local congestion K(w) = w with the delta kernel, bump m0, Psi(z) = z + 1
inline ModelSpec congestion(int n, double sigma = 0.2) {
    ModelSpec m;
    m.grid = TorusGrid::make(1, n);
    m.sigma = sigma;
    m.lagrangian = quadratic_lagrangian(m.grid, 1.0);
    m.price = scalar_affine_price(1.0, 1.0);
    m.coupling = convolution_coupling(m.grid, delta_kernel(m.grid), LinearResponse{1.0, 0.0});
    m.initial_m0 = bump(m.grid);
    return finalize_model(m);
}

inline Slice sampled(const TorusGrid& grid, double (*f)(double)) {
    Slice out(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) out[i] = f(grid.coord(i, 0));
    return out;
}

/// random density: positive node values renormalized to unit mass
inline Slice random_density(const TorusGrid& grid, Rng& rng, double floor = 0.0) {
    Slice m(grid.size());
    double mass = 0.0;
    for (double& x : m) {
        x = floor + rng.uniform();
        mass += x;
    }
    for (double& x : m) x /= mass * grid.cell_volume();
    return m;
}

inline Slice random_slice(std::size_t size, Rng& rng, double lo, double hi) {
    Slice s(size);
    for (double& x : s) x = rng.uniform(lo, hi);
    return s;
}

/// smooth random drift field sum_k a_k cos(2 pi k (x - p_k)) + c, one draw per time slice
inline VectorField smooth_drift(const Grids& grids, Rng& rng, double scale) {
    VectorField v = VectorField::filled(grids, 0.0);
    const double a1 = rng.uniform(-1, 1), a2 = rng.uniform(-1, 1);
    const double p1 = rng.uniform(), p2 = rng.uniform();
    for (auto& s : v.slices) {
        const double c = rng.uniform(-1, 1);
        for (std::size_t i = 0; i < grids.space.size(); ++i) {
            const double x = grids.space.coord(i, 0);
            s[i] = scale * (c + a1 * std::cos(kTwoPi * (x - p1)) + a2 * std::cos(2 * kTwoPi * (x - p2)));
        }
    }
    return v;
}

inline std::filesystem::path scratch_dir(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / ("mfgc_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

}  // namespace fixtures
