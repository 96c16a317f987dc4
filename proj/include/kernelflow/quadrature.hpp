#pragma once

#include <array>
#include <functional>
#include <span>

namespace kernelflow::quadrature {

/// 15-point Gauss-Kronrod rule on [-1, 1]: nodes in increasing order,
/// Kronrod weights, and Gauss weights (zero on Kronrod-only nodes).
struct GaussKronrod15 {
    static const std::array<double, 15> nodes;
    static const std::array<double, 15> kronrod_weights;
    static const std::array<double, 15> gauss_weights;
};

struct Estimate {
    double value = 0.0;
    double error = 0.0;
};

/// Adaptive Gauss-Kronrod integration of `f` over [lo, hi]. Either bound may
/// be infinite; semi-infinite and infinite ranges are mapped onto finite
/// ones by x = a + t / (1 - t). `breakpoints` inside the range seed the
/// initial subdivision. Subdivision stops once the summed error estimate is
/// below `tolerance` or a depth limit is hit; the achieved error is returned
/// either way.
Estimate integrate(const std::function<double(double)>& f, double lo, double hi, double tolerance,
                   std::span<const double> breakpoints = {});

}  // namespace kernelflow::quadrature
