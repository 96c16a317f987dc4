#pragma once

#include "kernelflow/distribution.hpp"
#include "kernelflow/finite_space.hpp"

#include <map>
#include <string>
#include <vector>

namespace kernelflow {

/// A total function between finite spaces, stored by point index.
class PointMap {
public:
    /// `image[i]` is the codomain index of domain point i.
    PointMap(FiniteSpace domain, FiniteSpace codomain, std::vector<std::size_t> image);

    /// Builds a map from label pairs. Throws DomainError if a domain point is
    /// unmapped, mapped twice, or sent outside `codomain`.
    static PointMap from_labels(FiniteSpace domain, FiniteSpace codomain,
                                const std::map<std::string, std::string>& assignment);

    static PointMap identity(const FiniteSpace& space);
    /// The unique map to a one-point space.
    static PointMap to_point(const FiniteSpace& domain, const FiniteSpace& point);

    [[nodiscard]] const FiniteSpace& domain() const { return domain_; }
    [[nodiscard]] const FiniteSpace& codomain() const { return codomain_; }
    [[nodiscard]] std::size_t operator()(std::size_t x) const { return image_.at(x); }
    [[nodiscard]] const std::string& apply(std::string_view label) const {
        return codomain_.label(image_[domain_.index_of(label)]);
    }
    [[nodiscard]] std::span<const std::size_t> image() const { return image_; }

    /// Domain indices x with f(x) = y, in point order.
    [[nodiscard]] std::vector<std::size_t> fiber(std::size_t y) const;

    /// (g after f): requires f.codomain == g.domain.
    friend PointMap compose(const PointMap& g, const PointMap& f);

    friend bool operator==(const PointMap& a, const PointMap& b) {
        return a.domain_ == b.domain_ && a.codomain_ == b.codomain_ && a.image_ == b.image_;
    }

private:
    FiniteSpace domain_;
    FiniteSpace codomain_;
    std::vector<std::size_t> image_;
};

/// A Markov kernel Y -> Gamma(X): one FiniteDistribution on the target per
/// source point.
class StochasticKernel {
public:
    StochasticKernel(FiniteSpace source, FiniteSpace target, std::vector<FiniteDistribution> rows);

    /// The deterministic kernel y -> delta_{f(y)}.
    static StochasticKernel deterministic(const PointMap& f);
    /// A kernel out of a one-point space, i.e. a single distribution.
    static StochasticKernel constant(const FiniteSpace& point, const FiniteDistribution& d);

    [[nodiscard]] const FiniteSpace& source() const { return source_; }
    [[nodiscard]] const FiniteSpace& target() const { return target_; }
    [[nodiscard]] const FiniteDistribution& row(std::size_t y) const { return rows_.at(y); }
    [[nodiscard]] const FiniteDistribution& row(std::string_view y) const {
        return rows_[source_.index_of(y)];
    }
    [[nodiscard]] std::span<const FiniteDistribution> rows() const { return rows_; }

    friend bool operator==(const StochasticKernel& a, const StochasticKernel& b) {
        return a.source_ == b.source_ && a.target_ == b.target_ && a.rows_ == b.rows_;
    }

private:
    FiniteSpace source_;
    FiniteSpace target_;
    std::vector<FiniteDistribution> rows_;
};

}  // namespace kernelflow
