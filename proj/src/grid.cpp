#include "mfgc/grid.hpp"

#include "mfgc/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace mfgc {

std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::InvalidArgument: return "INVALID_ARGUMENT";
        case ErrorCode::UnsupportedDimension: return "UNSUPPORTED_DIMENSION";
        case ErrorCode::NonFinite: return "NON_FINITE";
        case ErrorCode::OutOfRange: return "OUT_OF_RANGE";
        case ErrorCode::SearchWindow: return "SEARCH_WINDOW";
        case ErrorCode::CflViolation: return "CFL_VIOLATION";
        case ErrorCode::LinearSolverBreakdown: return "LINEAR_SOLVER_BREAKDOWN";
        case ErrorCode::NonConvergence: return "NON_CONVERGENCE";
        case ErrorCode::MonitorBreach: return "MONITOR_BREACH";
        case ErrorCode::Schema: return "SCHEMA";
        case ErrorCode::Io: return "IO";
    }
    return "UNKNOWN";
}

TorusGrid TorusGrid::make(int d, int n) {
    if (d != 1 && d != 2) {
        fail(ErrorCode::UnsupportedDimension,
             "unsupported dimension " + std::to_string(d) + " (expected 1 or 2)");
    }
    require(n >= 4, ErrorCode::InvalidArgument, "grid needs n >= 4 nodes per dimension");
    TorusGrid g;
    g.d_ = d;
    g.n_ = n;
    g.h_ = 1.0 / n;
    // the torus side must be represented exactly
    require(g.h_ * n == 1.0, ErrorCode::InvalidArgument,
            "n = " + std::to_string(n) + " does not satisfy h*n == 1 in double precision");
    g.size_ = d == 1 ? static_cast<std::size_t>(n) : static_cast<std::size_t>(n) * n;
    g.cell_volume_ = d == 1 ? g.h_ : g.h_ * g.h_;
    return g;
}

int TorusGrid::axis_index(std::size_t node, int axis) const noexcept {
    const auto nn = static_cast<std::size_t>(n_);
    return axis == 0 ? static_cast<int>(node % nn) : static_cast<int>(node / nn);
}

double TorusGrid::coord(std::size_t node, int axis) const noexcept {
    return axis_index(node, axis) * h_;
}

std::size_t TorusGrid::node(int i0, int i1) const noexcept {
    const auto wrap = [this](int i) { return static_cast<std::size_t>(((i % n_) + n_) % n_); };
    return d_ == 1 ? wrap(i0) : wrap(i0) + static_cast<std::size_t>(n_) * wrap(i1);
}

std::size_t TorusGrid::shift(std::size_t node, int axis, int offset) const noexcept {
    const int i0 = axis_index(node, 0) + (axis == 0 ? offset : 0);
    if (d_ == 1) return this->node(i0);
    const int i1 = axis_index(node, 1) + (axis == 1 ? offset : 0);
    return this->node(i0, i1);
}

TimeGrid TimeGrid::make(double horizon, int nt) {
    require(std::isfinite(horizon) && horizon > 0.0, ErrorCode::InvalidArgument,
            "time horizon T must be positive");
    require(nt >= 1, ErrorCode::InvalidArgument, "number of time steps nt must be >= 1");
    TimeGrid g;
    g.horizon_ = horizon;
    g.nt_ = nt;
    g.dt_ = horizon / nt;
    return g;
}

Grids make_grids(int d, int n, double horizon, int nt) {
    return Grids{TorusGrid::make(d, n), TimeGrid::make(horizon, nt)};
}

ScalarField ScalarField::filled(const Grids& grids, double value) {
    ScalarField f;
    f.slices.assign(static_cast<std::size_t>(grids.time.steps()) + 1,
                    Slice(grids.space.size(), value));
    return f;
}

VectorField VectorField::filled(const Grids& grids, double value) {
    VectorField f;
    f.slices.assign(static_cast<std::size_t>(grids.time.steps()) + 1,
                    VectorSlice(grids.space.size() * grids.space.dim(), value));
    return f;
}

void require_finite(std::span<const double> values, const char* what) {
    for (double v : values) {
        if (!std::isfinite(v)) fail(ErrorCode::NonFinite, std::string("non-finite value in ") + what);
    }
}

double integrate(const TorusGrid& grid, std::span<const double> slice) {
    require(slice.size() == grid.size(), ErrorCode::InvalidArgument, "integrate: slice size mismatch");
    require_finite(slice, "integrand");
    double sum = 0.0;
    for (double v : slice) sum += v;
    return grid.cell_volume() * sum;
}

VectorSlice gradient(const TorusGrid& grid, std::span<const double> slice) {
    require(slice.size() == grid.size(), ErrorCode::InvalidArgument, "gradient: slice size mismatch");
    const int d = grid.dim();
    const double inv2h = 0.5 / grid.h();
    VectorSlice out(grid.size() * d);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        for (int c = 0; c < d; ++c) {
            out[i * d + c] = (slice[grid.shift(i, c, 1)] - slice[grid.shift(i, c, -1)]) * inv2h;
        }
    }
    return out;
}

Slice divergence(const TorusGrid& grid, std::span<const double> vslice) {
    const int d = grid.dim();
    require(vslice.size() == grid.size() * d, ErrorCode::InvalidArgument,
            "divergence: vector slice size mismatch");
    const double inv2h = 0.5 / grid.h();
    Slice out(grid.size(), 0.0);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        double acc = 0.0;
        for (int c = 0; c < d; ++c) {
            acc += vslice[grid.shift(i, c, 1) * d + c] - vslice[grid.shift(i, c, -1) * d + c];
        }
        out[i] = acc * inv2h;
    }
    return out;
}

Slice laplacian(const TorusGrid& grid, std::span<const double> slice) {
    require(slice.size() == grid.size(), ErrorCode::InvalidArgument, "laplacian: slice size mismatch");
    const double inv_h2 = 1.0 / (grid.h() * grid.h());
    Slice out(grid.size(), 0.0);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        double acc = 0.0;
        for (int c = 0; c < grid.dim(); ++c) {
            acc += slice[grid.shift(i, c, 1)] - 2.0 * slice[i] + slice[grid.shift(i, c, -1)];
        }
        out[i] = acc * inv_h2;
    }
    return out;
}

Slice periodic_convolve(const TorusGrid& grid, std::span<const double> m,
                        std::span<const double> kernel) {
    require(m.size() == grid.size() && kernel.size() == grid.size(), ErrorCode::InvalidArgument,
            "periodic_convolve: slice size mismatch");
    Slice out(grid.size(), 0.0);
    const int n = grid.n();
    for (std::size_t j = 0; j < grid.size(); ++j) {
        const double kj = kernel[j];
        if (kj == 0.0) continue;  // sparse kernels (delta) stay O(N)
        const int j0 = grid.axis_index(j, 0);
        const int j1 = grid.dim() == 2 ? grid.axis_index(j, 1) : 0;
        for (std::size_t i = 0; i < grid.size(); ++i) {
            const int i0 = grid.axis_index(i, 0);
            const int i1 = grid.dim() == 2 ? grid.axis_index(i, 1) : 0;
            const std::size_t src = grid.node(i0 - j0 + n, i1 - j1 + n);
            out[i] += m[src] * kj;
        }
    }
    for (double& v : out) v *= grid.cell_volume();
    return out;
}

Slice reflect(const TorusGrid& grid, std::span<const double> kernel) {
    Slice out(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const int i0 = grid.axis_index(i, 0);
        const int i1 = grid.dim() == 2 ? grid.axis_index(i, 1) : 0;
        out[grid.node(-i0, -i1)] = kernel[i];
    }
    return out;
}

double sup_norm(std::span<const double> values) {
    double s = 0.0;
    for (double v : values) s = std::max(s, std::abs(v));
    return s;
}

double sup_distance(std::span<const double> a, std::span<const double> b) {
    require(a.size() == b.size(), ErrorCode::InvalidArgument, "sup_distance: size mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s = std::max(s, std::abs(a[i] - b[i]));
    return s;
}

}  // namespace mfgc
