#include "mfgc/numerics.hpp"

#include <algorithm>
#include <cmath>

namespace mfgc {

Maximum1d maximize_concave(const std::function<double(double)>& f,
                           const std::function<double(double)>& df, double lo, double hi,
                           int coarse_points) {
    coarse_points = std::max(coarse_points, 4);
    const double step = (hi - lo) / coarse_points;
    int best = 0;
    double best_value = f(lo);
    for (int i = 1; i <= coarse_points; ++i) {
        const double value = f(lo + i * step);
        if (value > best_value) {
            best_value = value;
            best = i;
        }
    }

    Maximum1d out;
    if ((best == 0 && df(lo) <= 0.0) || (best == coarse_points && df(hi) >= 0.0)) {
        out.argmax = best == 0 ? lo : hi;
        out.value = best_value;
        out.on_boundary = true;
        return out;
    }

    double a = lo + std::max(best - 1, 0) * step;
    double b = lo + std::min(best + 1, coarse_points) * step;

    // golden section
    constexpr double kInvPhi = 0.6180339887498949;
    double c = b - kInvPhi * (b - a);
    double d = a + kInvPhi * (b - a);
    double fc = f(c);
    double fd = f(d);
    for (int it = 0; it < 200 && (b - a) > 1e-12 * (1.0 + std::abs(a) + std::abs(b)); ++it) {
        if (fc > fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - kInvPhi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + kInvPhi * (b - a);
            fd = f(d);
        }
    }
    double x = 0.5 * (a + b);

    // polish on the stationarity condition over the coarse bracket
    double bl = lo + std::max(best - 1, 0) * step;
    double br = lo + std::min(best + 1, coarse_points) * step;
    double gl = df(bl);
    double gr = df(br);
    if (gl >= 0.0 && gr <= 0.0 && gl != gr) {
        for (int it = 0; it < 200; ++it) {
            const double mid = 0.5 * (bl + br);
            if (mid <= bl || mid >= br) break;
            const double gm = df(mid);
            if (gm > 0.0) {
                bl = mid;
            } else if (gm < 0.0) {
                br = mid;
            } else {
                bl = br = mid;
                break;
            }
        }
        x = 0.5 * (bl + br);
    }
    out.argmax = x;
    out.value = f(x);
    return out;
}

}  // namespace mfgc
