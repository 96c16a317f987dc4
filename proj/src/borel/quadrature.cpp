#include "kernelflow/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <vector>

namespace kernelflow::quadrature {

const std::array<double, 15> GaussKronrod15::nodes = {
    -0.991455371120812639206854697526329, -0.949107912342758524526189684047851,
    -0.864864423359769072789712788640926, -0.741531185599394439863864773280788,
    -0.586087235467691130294144845693013, -0.405845151377397166906606412076961,
    -0.207784955007898467600689403773245, 0.0,
    0.207784955007898467600689403773245,  0.405845151377397166906606412076961,
    0.586087235467691130294144845693013,  0.741531185599394439863864773280788,
    0.864864423359769072789712788640926,  0.949107912342758524526189684047851,
    0.991455371120812639206854697526329};

const std::array<double, 15> GaussKronrod15::kronrod_weights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714,
    0.204432940075298892414161999234649, 0.190350578064785409913256402421014,
    0.169004726639267902826583426598550, 0.140653259715525918745189590510238,
    0.104790010322250183839876322541518, 0.063092092629978553290700663189204,
    0.022935322010529224963732008058970};

const std::array<double, 15> GaussKronrod15::gauss_weights = {
    0.0, 0.129484966168869693270611432679082, 0.0, 0.279705391489276667901467771423780,
    0.0, 0.381830050505118944950369775488975, 0.0, 0.417959183673469387755102040816327,
    0.0, 0.381830050505118944950369775488975, 0.0, 0.279705391489276667901467771423780,
    0.0, 0.129484966168869693270611432679082, 0.0};

namespace {

struct Segment {
    double a;
    double b;
    Estimate estimate;
    int depth;
    friend bool operator<(const Segment& x, const Segment& y) { return x.estimate.error < y.estimate.error; }
};

Estimate gk15(const std::function<double(double)>& f, double a, double b) {
    const double center = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    double kronrod = 0.0;
    double gauss = 0.0;
    for (std::size_t i = 0; i < 15; ++i) {
        const double v = f(center + half * GaussKronrod15::nodes[i]);
        kronrod += GaussKronrod15::kronrod_weights[i] * v;
        gauss += GaussKronrod15::gauss_weights[i] * v;
    }
    return {kronrod * half, std::abs(kronrod - gauss) * half};
}

Estimate integrate_finite(const std::function<double(double)>& f, std::vector<double> cuts, double tolerance) {
    constexpr int kMaxDepth = 60;
    constexpr std::size_t kMaxSegments = 200000;
    std::priority_queue<Segment> heap;
    double total_error = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        if (!(cuts[i + 1] > cuts[i])) continue;
        Segment s{cuts[i], cuts[i + 1], gk15(f, cuts[i], cuts[i + 1]), 0};
        total_error += s.estimate.error;
        heap.push(s);
    }
    while (total_error > tolerance && !heap.empty() && heap.size() < kMaxSegments) {
        Segment worst = heap.top();
        if (worst.depth >= kMaxDepth) break;
        heap.pop();
        const double mid = 0.5 * (worst.a + worst.b);
        Segment left{worst.a, mid, gk15(f, worst.a, mid), worst.depth + 1};
        Segment right{mid, worst.b, gk15(f, mid, worst.b), worst.depth + 1};
        total_error += left.estimate.error + right.estimate.error - worst.estimate.error;
        heap.push(left);
        heap.push(right);
    }
    // Sum in position order so the value does not depend on refinement order.
    std::vector<Segment> segments;
    segments.reserve(heap.size());
    while (!heap.empty()) {
        segments.push_back(heap.top());
        heap.pop();
    }
    std::sort(segments.begin(), segments.end(), [](const Segment& x, const Segment& y) { return x.a < y.a; });
    Estimate out;
    for (const auto& s : segments) {
        out.value += s.estimate.value;
        out.error += s.estimate.error;
    }
    return out;
}

}  // namespace

Estimate integrate(const std::function<double(double)>& f, double lo, double hi, double tolerance,
                   std::span<const double> breakpoints) {
    if (!(hi > lo)) return {};
    const bool lo_inf = std::isinf(lo);
    const bool hi_inf = std::isinf(hi);
    if (!lo_inf && !hi_inf) {
        std::vector<double> cuts{lo};
        for (double c : breakpoints) {
            if (c > lo && c < hi) cuts.push_back(c);
        }
        cuts.push_back(hi);
        std::sort(cuts.begin(), cuts.end());
        return integrate_finite(f, std::move(cuts), tolerance);
    }
    if (lo_inf && hi_inf) {
        const Estimate left = integrate(f, lo, 0.0, 0.5 * tolerance, breakpoints);
        const Estimate right = integrate(f, 0.0, hi, 0.5 * tolerance, breakpoints);
        return {left.value + right.value, left.error + right.error};
    }
    // Semi-infinite: [a, inf) via x = a + t/(1-t), (-inf, b] via x = b - t/(1-t).
    const double anchor = lo_inf ? hi : lo;
    const double sign = lo_inf ? -1.0 : 1.0;
    auto mapped = [&](double t) {
        const double one_minus = 1.0 - t;
        if (one_minus <= 0.0) return 0.0;
        const double x = anchor + sign * t / one_minus;
        const double v = f(x);
        return v == 0.0 ? 0.0 : v / (one_minus * one_minus);
    };
    std::vector<double> cuts{0.0, 1.0};
    for (double c : breakpoints) {
        const double d = sign * (c - anchor);
        if (d > 0.0 && std::isfinite(d)) cuts.push_back(d / (1.0 + d));
    }
    std::sort(cuts.begin(), cuts.end());
    return integrate_finite(mapped, std::move(cuts), tolerance);
}

}  // namespace kernelflow::quadrature
