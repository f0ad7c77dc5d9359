#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

namespace mfgc {

/// Node values of one time slice. Index = i0 + n * i1 (i1 only in 2-D).
using Slice = std::vector<double>;

/// Per-node vectors of one time slice, node-major: value(node, c) = data[node * d + c].
using VectorSlice = std::vector<double>;

/// Uniform periodic grid on the unit torus [0,1)^d.
class TorusGrid {
public:
    TorusGrid() = default;

    /// Throws UnsupportedDimension for d outside {1,2}, InvalidArgument for n < 4.
    static TorusGrid make(int d, int n);

    int dim() const noexcept { return d_; }
    int n() const noexcept { return n_; }
    double h() const noexcept { return h_; }
    /// n^d
    std::size_t size() const noexcept { return size_; }
    /// h^d, the rectangle-rule weight.
    double cell_volume() const noexcept { return cell_volume_; }

    double coord(std::size_t node, int axis) const noexcept;
    int axis_index(std::size_t node, int axis) const noexcept;
    std::size_t node(int i0, int i1 = 0) const noexcept;
    /// Neighbour of `node` offset along `axis`, wrapping modulo n.
    std::size_t shift(std::size_t node, int axis, int offset) const noexcept;

    bool operator==(const TorusGrid&) const = default;

private:
    int d_ = 1;
    int n_ = 4;
    double h_ = 0.25;
    double cell_volume_ = 0.25;
    std::size_t size_ = 4;
};

/// Uniform time grid t_j = j * dt, j = 0..nt.
class TimeGrid {
public:
    TimeGrid() = default;
    static TimeGrid make(double horizon, int nt);

    double horizon() const noexcept { return horizon_; }
    int steps() const noexcept { return nt_; }
    double dt() const noexcept { return dt_; }
    double t(int j) const noexcept { return j * dt_; }

    bool operator==(const TimeGrid&) const = default;

private:
    double horizon_ = 1.0;
    int nt_ = 1;
    double dt_ = 1.0;
};

struct Grids {
    TorusGrid space;
    TimeGrid time;
};

Grids make_grids(int d, int n, double horizon, int nt);

/// Time-indexed scalar field: slices[j] holds t_j, j = 0..nt.
struct ScalarField {
    std::vector<Slice> slices;

    static ScalarField filled(const Grids& grids, double value);
    std::size_t times() const noexcept { return slices.size(); }
};

/// Time-indexed vector field (same slice convention as ScalarField).
struct VectorField {
    std::vector<VectorSlice> slices;

    static VectorField filled(const Grids& grids, double value);
    std::size_t times() const noexcept { return slices.size(); }
};

/// Rectangle rule h^d * sum(values). Throws NonFinite on NaN/inf input.
double integrate(const TorusGrid& grid, std::span<const double> slice);

/// Centered differences with periodic wrap.
VectorSlice gradient(const TorusGrid& grid, std::span<const double> slice);

/// Centered differences of the components; discrete adjoint of -gradient.
Slice divergence(const TorusGrid& grid, std::span<const double> vslice);

/// (2d+1)-point stencil.
Slice laplacian(const TorusGrid& grid, std::span<const double> slice);

/// (m * k)(x_i) = h^d sum_j m(x_{i-j}) k(x_j).
Slice periodic_convolve(const TorusGrid& grid, std::span<const double> m,
                        std::span<const double> kernel);

/// k~(x) = k(-x), the reflected kernel.
Slice reflect(const TorusGrid& grid, std::span<const double> kernel);

double sup_norm(std::span<const double> values);
double sup_distance(std::span<const double> a, std::span<const double> b);
void require_finite(std::span<const double> values, const char* what);

}  // namespace mfgc
