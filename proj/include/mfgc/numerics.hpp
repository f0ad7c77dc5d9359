#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>

namespace mfgc {

struct Maximum1d {
    double argmax = 0.0;
    double value = 0.0;
    /// maximizer sits on the search boundary (objective still increasing outward)
    bool on_boundary = false;
};

/// Maximizes a concave objective on [lo, hi]: coarse grid, golden-section
/// refinement, then bisection on the derivative for a machine-precision
/// argmax when a sign change is bracketed.
Maximum1d maximize_concave(const std::function<double(double)>& f,
                           const std::function<double(double)>& df, double lo, double hi,
                           int coarse_points = 64);

/// Seeded generator for randomized checks. Uses mt19937_64 bits directly so
/// sequences are identical across standard-library implementations.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}
    /// uniform in [0,1)
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    std::size_t index(std::size_t count) { return static_cast<std::size_t>(uniform() * count) % count; }

private:
    std::mt19937_64 engine_;
};

}  // namespace mfgc
