#pragma once

// Finite instance of the Giry monad: unit (dirac), multiplication (flatten),
// functorial action (pushforward) and Kleisli composition of kernels.
// All operations are exact.

#include "kernelflow/distribution.hpp"
#include "kernelflow/errors.hpp"
#include "kernelflow/kernel.hpp"

#include <map>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

namespace kernelflow {

/// A finitely supported distribution over arbitrary values: an element of
/// Gamma(T) with finite support. Entries need not be distinct.
template <typename T>
struct Weighted {
    Rational weight;
    T value;
};

template <typename T>
using Mixture = std::vector<Weighted<T>>;

/// Unit of the outer monad: the point mass at `value`.
template <typename T>
Mixture<T> point_mass(T value) {
    return Mixture<T>{Weighted<T>{Rational(1), std::move(value)}};
}

template <typename T, typename F>
auto map_mixture(const Mixture<T>& m, F&& fn) {
    using U = std::invoke_result_t<F&, const T&>;
    Mixture<U> out;
    out.reserve(m.size());
    for (const auto& w : m) out.push_back(Weighted<U>{w.weight, fn(w.value)});
    return out;
}

/// Multiplication on nested finite mixtures: weights multiply along paths.
template <typename T>
Mixture<T> join(const Mixture<Mixture<T>>& nested) {
    Mixture<T> out;
    for (const auto& outer : nested) {
        for (const auto& inner : outer.value) {
            out.push_back(Weighted<T>{outer.weight * inner.weight, inner.value});
        }
    }
    return out;
}

/// Checks that mixture weights are non-negative and sum to exactly one.
template <typename T>
void require_probability_weights(const Mixture<T>& m) {
    if (m.empty()) throw DomainError("mixture has no components");
    Rational total;
    for (const auto& w : m) {
        if (w.weight.is_negative()) throw DomainError("negative mixture weight " + w.weight.to_string());
        total += w.weight;
    }
    if (!total.is_one()) {
        throw DomainError("mixture weights sum to " + total.to_string() + ", expected exactly 1");
    }
}

/// delta_x on `space`. Throws DomainError if x is not a point of `space`.
FiniteDistribution dirac(std::string_view x, const FiniteSpace& space);
FiniteDistribution dirac(std::size_t x, const FiniteSpace& space);

/// Image measure p o f^-1.
FiniteDistribution pushforward(const FiniteDistribution& p, const PointMap& f);

/// Label-based form: `f` must be total on p's space and land in `target`.
FiniteDistribution pushforward(const FiniteDistribution& p,
                               const std::map<std::string, std::string>& f,
                               const FiniteSpace& target);

/// mu: Gamma(Gamma(X)) -> Gamma(X), result(x) = sum_i w_i d_i(x).
/// All inner distributions must share one space.
FiniteDistribution flatten(const Mixture<FiniteDistribution>& meta);

/// (s o~ t)_z(x) = sum_y t_z(y) s_y(x), for s: Y -> Gamma(X), t: Z -> Gamma(Y).
StochasticKernel kleisli_compose(const StochasticKernel& s, const StochasticKernel& t);

/// s o~ q, i.e. q treated as a kernel out of a one-point space.
FiniteDistribution kernel_apply(const StochasticKernel& s, const FiniteDistribution& q);

/// Conditional distributions of p along f.
struct Disintegration {
    StochasticKernel kernel;
    /// null_fiber[y] is set when q(y) = 0 and the row is a conventional
    /// choice (uniform on the fiber, or on X if the fiber is empty).
    std::vector<bool> null_fiber;
};

Disintegration disintegrate(const FiniteDistribution& p, const PointMap& f);

}  // namespace kernelflow
