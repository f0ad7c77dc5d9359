#include "mfgc/tabulated.hpp"

#include "mfgc/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace mfgc {

namespace {

void check_abscissae(std::span<const double> x, std::size_t other, const char* what) {
    require(x.size() >= 2, ErrorCode::InvalidArgument, std::string(what) + ": need at least 2 nodes");
    require(other == x.size(), ErrorCode::InvalidArgument, std::string(what) + ": column length mismatch");
    for (std::size_t i = 0; i < x.size(); ++i) {
        require(std::isfinite(x[i]), ErrorCode::NonFinite, std::string(what) + ": non-finite abscissa");
        if (i > 0) {
            require(x[i] > x[i - 1], ErrorCode::InvalidArgument,
                    std::string(what) + ": abscissae must be strictly increasing");
        }
    }
}

std::size_t locate_in(std::span<const double> x, double value, const char* what) {
    if (!(value >= x.front() && value <= x.back())) {
        fail(ErrorCode::OutOfRange, std::string(what) + ": argument " + std::to_string(value) +
                                        " outside tabulated range [" + std::to_string(x.front()) +
                                        ", " + std::to_string(x.back()) + "]");
    }
    auto it = std::upper_bound(x.begin(), x.end(), value);
    std::size_t k = static_cast<std::size_t>(it - x.begin());
    if (k == 0) k = 1;
    if (k >= x.size()) k = x.size() - 1;
    return k - 1;
}

}  // namespace

HermiteTable::HermiteTable(std::vector<double> x, std::vector<double> y, std::vector<double> dy)
    : x_(std::move(x)), y_(std::move(y)), dy_(std::move(dy)) {
    check_abscissae(x_, y_.size(), "hermite table");
    require(dy_.size() == x_.size(), ErrorCode::InvalidArgument, "hermite table: slope column length mismatch");
}

std::size_t HermiteTable::locate(double x) const { return locate_in(x_, x, "hermite table"); }

double HermiteTable::value(double x) const {
    const std::size_t k = locate(x);
    const double h = x_[k + 1] - x_[k];
    const double s = (x - x_[k]) / h;
    const double s2 = s * s;
    const double s3 = s2 * s;
    const double h00 = 2 * s3 - 3 * s2 + 1;
    const double h10 = s3 - 2 * s2 + s;
    const double h01 = -2 * s3 + 3 * s2;
    const double h11 = s3 - s2;
    return h00 * y_[k] + h10 * h * dy_[k] + h01 * y_[k + 1] + h11 * h * dy_[k + 1];
}

double HermiteTable::derivative(double x) const {
    const std::size_t k = locate(x);
    const double h = x_[k + 1] - x_[k];
    const double s = (x - x_[k]) / h;
    const double s2 = s * s;
    const double d00 = (6 * s2 - 6 * s) / h;
    const double d10 = 3 * s2 - 4 * s + 1;
    const double d01 = (-6 * s2 + 6 * s) / h;
    const double d11 = 3 * s2 - 2 * s;
    return d00 * y_[k] + d10 * dy_[k] + d01 * y_[k + 1] + d11 * dy_[k + 1];
}

LinearTable::LinearTable(std::vector<double> x, std::vector<double> y)
    : x_(std::move(x)), y_(std::move(y)) {
    check_abscissae(x_, y_.size(), "linear table");
    cumulative_.assign(x_.size(), 0.0);
    for (std::size_t i = 1; i < x_.size(); ++i) {
        cumulative_[i] = cumulative_[i - 1] + 0.5 * (y_[i] + y_[i - 1]) * (x_[i] - x_[i - 1]);
    }
}

std::size_t LinearTable::locate(double x) const { return locate_in(x_, x, "linear table"); }

double LinearTable::value(double x) const {
    const std::size_t k = locate(x);
    const double s = (x - x_[k]) / (x_[k + 1] - x_[k]);
    return (1 - s) * y_[k] + s * y_[k + 1];
}

double LinearTable::primitive_from_lo(double x) const {
    const std::size_t k = locate(x);
    const double yx = value(x);
    return cumulative_[k] + 0.5 * (y_[k] + yx) * (x - x_[k]);
}

double LinearTable::primitive(double x) const {
    return primitive_from_lo(x) - primitive_from_lo(0.0);
}

double LinearTable::max_slope() const noexcept {
    double s = 0.0;
    for (std::size_t i = 1; i < x_.size(); ++i) {
        s = std::max(s, std::abs(y_[i] - y_[i - 1]) / (x_[i] - x_[i - 1]));
    }
    return s;
}

}  // namespace mfgc
