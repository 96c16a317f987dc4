#pragma once

// Random finite instances for property tests. Masses are rational with a
// common denominator of at most 64.

#include "kernelflow/coherent_pair.hpp"
#include "kernelflow/distribution.hpp"
#include "kernelflow/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

namespace kernelflow::testing {

using Rng = std::mt19937_64;

inline std::size_t uniform_index(Rng& rng, std::size_t lo, std::size_t hi) {
    return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

inline FiniteSpace make_space(const std::string& prefix, std::size_t n) {
    std::vector<std::string> labels;
    for (std::size_t i = 0; i < n; ++i) labels.push_back(prefix + std::to_string(i));
    return FiniteSpace(std::move(labels));
}

/// Random composition of `den` into `parts` non-negative integers.
inline std::vector<long> random_composition(Rng& rng, long den, std::size_t parts) {
    std::vector<long> cuts;
    for (std::size_t i = 0; i + 1 < parts; ++i) {
        cuts.push_back(std::uniform_int_distribution<long>(0, den)(rng));
    }
    std::sort(cuts.begin(), cuts.end());
    std::vector<long> out;
    long prev = 0;
    for (long c : cuts) {
        out.push_back(c - prev);
        prev = c;
    }
    out.push_back(den - prev);
    return out;
}

/// A distribution on `space` with masses k_i / D, D <= 64. When `full` is set
/// every mass is positive.
inline FiniteDistribution random_distribution(Rng& rng, const FiniteSpace& space, bool full = false) {
    const std::size_t n = space.size();
    const long den = static_cast<long>(uniform_index(rng, std::max<std::size_t>(n, 2), 64));
    std::vector<long> parts;
    if (full) {
        parts = random_composition(rng, den - static_cast<long>(n), n);
        for (auto& k : parts) k += 1;
    } else {
        parts = random_composition(rng, den, n);
    }
    std::vector<Rational> masses;
    for (long k : parts) masses.emplace_back(k, den);
    return FiniteDistribution(space, std::move(masses));
}

/// Distribution supported on `points` only.
inline FiniteDistribution random_distribution_on(Rng& rng, const FiniteSpace& space,
                                                 const std::vector<std::size_t>& points, bool full) {
    const std::size_t n = points.size();
    const long den = static_cast<long>(uniform_index(rng, std::max<std::size_t>(n, 2), 64));
    std::vector<long> parts = full ? random_composition(rng, den - static_cast<long>(n), n)
                                   : random_composition(rng, den, n);
    std::vector<Rational> masses(space.size());
    for (std::size_t i = 0; i < n; ++i) masses[points[i]] = Rational(parts[i] + (full ? 1 : 0), den);
    return FiniteDistribution(space, std::move(masses));
}

/// A surjective map from `domain` onto `codomain` (requires |domain| >= |codomain|).
inline PointMap random_surjection(Rng& rng, const FiniteSpace& domain, const FiniteSpace& codomain) {
    std::vector<std::size_t> image(domain.size());
    std::vector<std::size_t> order(domain.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t i = 0; i < order.size(); ++i) {
        image[order[i]] = i < codomain.size() ? i : uniform_index(rng, 0, codomain.size() - 1);
    }
    return PointMap(domain, codomain, std::move(image));
}

/// A hypothesis whose every row lives on its fiber. With `full_rows` each
/// row has full support on the fiber. Requires a surjective f.
inline StochasticKernel random_fiber_kernel(Rng& rng, const PointMap& f, bool full_rows) {
    std::vector<FiniteDistribution> rows;
    for (std::size_t y = 0; y < f.codomain().size(); ++y) {
        rows.push_back(random_distribution_on(rng, f.domain(), f.fiber(y), full_rows));
    }
    return StochasticKernel(f.codomain(), f.domain(), std::move(rows));
}

/// A random coherent pair (X, p) -> (Y, q) with fiber-supported rows.
/// `full_rows` makes it absolutely coherent.
inline CoherentPair random_pair_from(Rng& rng, const FiniteDistribution& p, const FiniteSpace& y_space,
                                     bool full_rows) {
    const PointMap f = random_surjection(rng, p.space(), y_space);
    return CoherentPair(f, random_fiber_kernel(rng, f, full_rows), p);
}

inline CoherentPair random_pair(Rng& rng, std::size_t max_x = 8, std::size_t max_y = 4,
                                bool full_rows = false) {
    const std::size_t ny = uniform_index(rng, 1, max_y);
    const std::size_t nx = uniform_index(rng, ny, max_x);
    const FiniteSpace xs = make_space("x", nx);
    return random_pair_from(rng, random_distribution(rng, xs), make_space("y", ny), full_rows);
}

/// A random pair (first, second) with first.q == second.p.
inline std::pair<CoherentPair, CoherentPair> random_composable(Rng& rng, bool full_rows,
                                                               std::size_t max_x = 8) {
    const std::size_t nz = uniform_index(rng, 1, 3);
    const std::size_t ny = uniform_index(rng, nz, 5);
    const std::size_t nx = uniform_index(rng, ny, max_x);
    const FiniteSpace xs = make_space("x", nx);
    CoherentPair first = random_pair_from(rng, random_distribution(rng, xs), make_space("y", ny), full_rows);
    CoherentPair second = random_pair_from(rng, first.q(), make_space("z", nz), full_rows);
    return {std::move(first), std::move(second)};
}

/// Independent double-precision oracle for RE: builds s o~ q in floating
/// point and sums p ln(p / r) directly.
inline double oracle_re(const CoherentPair& pair) {
    const auto& p = pair.p();
    const auto& q = pair.q();
    const auto& s = pair.s();
    double total = 0.0;
    for (std::size_t x = 0; x < p.space().size(); ++x) {
        const double px = p.mass(x).to_double();
        if (px == 0.0) continue;
        double r = 0.0;
        for (std::size_t y = 0; y < q.space().size(); ++y) r += q.mass(y).to_double() * s.row(y).mass(x).to_double();
        if (r == 0.0) return INFINITY;
        total += px * std::log(px / r);
    }
    return total;
}

}  // namespace kernelflow::testing
