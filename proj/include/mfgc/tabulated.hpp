#pragma once

#include <span>
#include <vector>

namespace mfgc {

/// C^1 piecewise-cubic Hermite interpolant of (x_i, y_i, y'_i).
/// derivative() is the exact derivative of value(), so conjugates and
/// potentials built on one table stay mutually consistent.
class HermiteTable {
public:
    HermiteTable() = default;
    /// Throws InvalidArgument unless x is strictly increasing with >= 2 entries.
    HermiteTable(std::vector<double> x, std::vector<double> y, std::vector<double> dy);

    double lo() const noexcept { return x_.front(); }
    double hi() const noexcept { return x_.back(); }
    bool contains(double x) const noexcept { return x >= lo() && x <= hi(); }

    /// Throws OutOfRange outside [lo, hi].
    double value(double x) const;
    double derivative(double x) const;

    std::span<const double> nodes() const noexcept { return x_; }
    std::span<const double> values() const noexcept { return y_; }
    std::span<const double> slopes() const noexcept { return dy_; }

private:
    std::size_t locate(double x) const;

    std::vector<double> x_;
    std::vector<double> y_;
    std::vector<double> dy_;
};

/// Piecewise-linear table with its exact primitive anchored at 0.
class LinearTable {
public:
    LinearTable() = default;
    LinearTable(std::vector<double> x, std::vector<double> y);

    double lo() const noexcept { return x_.front(); }
    double hi() const noexcept { return x_.back(); }

    /// Throws OutOfRange outside [lo, hi].
    double value(double x) const;
    /// int_0^x value(s) ds; 0 must lie in [lo, hi].
    double primitive(double x) const;
    /// max |y_{i+1} - y_i| / (x_{i+1} - x_i)
    double max_slope() const noexcept;

    std::span<const double> nodes() const noexcept { return x_; }
    std::span<const double> values() const noexcept { return y_; }

private:
    std::size_t locate(double x) const;
    double primitive_from_lo(double x) const;

    std::vector<double> x_;
    std::vector<double> y_;
    std::vector<double> cumulative_;  // int_lo^{x_i}
};

}  // namespace mfgc
