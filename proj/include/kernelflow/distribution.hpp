#pragma once

#include "kernelflow/finite_space.hpp"
#include "kernelflow/rational.hpp"

#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace kernelflow {

/// An exact probability mass function on a FiniteSpace.
///
/// Masses are non-negative Rationals summing to exactly one; both are checked
/// at construction, so every live instance is a probability measure.
class FiniteDistribution {
public:
    /// `masses` is indexed in the space's point order.
    FiniteDistribution(FiniteSpace space, std::vector<Rational> masses);

    /// Points missing from `masses` get mass zero.
    static FiniteDistribution from_labels(FiniteSpace space,
                                          const std::vector<std::pair<std::string, Rational>>& masses);

    static FiniteDistribution uniform(FiniteSpace space);

    [[nodiscard]] const FiniteSpace& space() const { return space_; }
    [[nodiscard]] std::span<const Rational> masses() const { return masses_; }
    [[nodiscard]] const Rational& mass(std::size_t index) const { return masses_.at(index); }
    [[nodiscard]] const Rational& mass(std::string_view label) const {
        return masses_[space_.index_of(label)];
    }

    [[nodiscard]] bool in_support(std::size_t index) const { return masses_.at(index).is_positive(); }
    /// Indices of points with positive mass, in point order.
    [[nodiscard]] std::vector<std::size_t> support() const;
    /// True iff support(*this) is a subset of support(other) (finite reading of <<).
    [[nodiscard]] bool absolutely_continuous_wrt(const FiniteDistribution& other) const;

    [[nodiscard]] std::string to_string() const;

    friend bool operator==(const FiniteDistribution& a, const FiniteDistribution& b) {
        return a.space_ == b.space_ && a.masses_ == b.masses_;
    }

private:
    FiniteSpace space_;
    std::vector<Rational> masses_;
};

}  // namespace kernelflow
