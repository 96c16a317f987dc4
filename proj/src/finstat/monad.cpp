#include "kernelflow/monad.hpp"

namespace kernelflow {

FiniteDistribution dirac(std::size_t x, const FiniteSpace& space) {
    if (x >= space.size()) throw DomainError("dirac point index out of range");
    std::vector<Rational> masses(space.size());
    masses[x] = 1;
    return FiniteDistribution(space, std::move(masses));
}

FiniteDistribution dirac(std::string_view x, const FiniteSpace& space) {
    return dirac(space.index_of(x), space);
}

FiniteDistribution pushforward(const FiniteDistribution& p, const PointMap& f) {
    if (!(p.space() == f.domain())) {
        throw DomainError("pushforward: distribution lives on " + p.space().describe() +
                          " but the map is defined on " + f.domain().describe());
    }
    std::vector<Rational> masses(f.codomain().size());
    for (std::size_t x = 0; x < p.space().size(); ++x) masses[f(x)] += p.mass(x);
    return FiniteDistribution(f.codomain(), std::move(masses));
}

FiniteDistribution pushforward(const FiniteDistribution& p,
                               const std::map<std::string, std::string>& f,
                               const FiniteSpace& target) {
    return pushforward(p, PointMap::from_labels(p.space(), target, f));
}

FiniteDistribution flatten(const Mixture<FiniteDistribution>& meta) {
    require_probability_weights(meta);
    const FiniteSpace& space = meta.front().value.space();
    std::vector<Rational> masses(space.size());
    for (const auto& [weight, d] : meta) {
        if (!(d.space() == space)) {
            throw DomainError("flatten: inner distributions live on different spaces (" +
                              space.describe() + " vs " + d.space().describe() + ")");
        }
        if (weight.is_zero()) continue;
        for (std::size_t x = 0; x < masses.size(); ++x) masses[x] += weight * d.mass(x);
    }
    return FiniteDistribution(space, std::move(masses));
}

FiniteDistribution kernel_apply(const StochasticKernel& s, const FiniteDistribution& q) {
    if (!(q.space() == s.source())) {
        throw DomainError("kernel_apply: distribution lives on " + q.space().describe() +
                          " but the kernel's source is " + s.source().describe());
    }
    std::vector<Rational> masses(s.target().size());
    for (std::size_t y = 0; y < q.space().size(); ++y) {
        const Rational& w = q.mass(y);
        if (w.is_zero()) continue;
        const FiniteDistribution& row = s.row(y);
        for (std::size_t x = 0; x < masses.size(); ++x) {
            if (!row.mass(x).is_zero()) masses[x] += w * row.mass(x);
        }
    }
    return FiniteDistribution(s.target(), std::move(masses));
}

StochasticKernel kleisli_compose(const StochasticKernel& s, const StochasticKernel& t) {
    if (!(s.source() == t.target())) {
        throw DomainError("kleisli_compose: source " + s.source().describe() +
                          " does not match target " + t.target().describe());
    }
    std::vector<FiniteDistribution> rows;
    rows.reserve(t.source().size());
    for (const auto& t_row : t.rows()) rows.push_back(kernel_apply(s, t_row));
    return StochasticKernel(t.source(), s.target(), std::move(rows));
}

Disintegration disintegrate(const FiniteDistribution& p, const PointMap& f) {
    const FiniteDistribution q = pushforward(p, f);
    const FiniteSpace& xs = f.domain();
    std::vector<FiniteDistribution> rows;
    std::vector<bool> null_fiber(f.codomain().size(), false);
    rows.reserve(f.codomain().size());
    for (std::size_t y = 0; y < f.codomain().size(); ++y) {
        std::vector<Rational> masses(xs.size());
        const auto fiber = f.fiber(y);
        if (q.mass(y).is_positive()) {
            for (std::size_t x : fiber) masses[x] = p.mass(x) / q.mass(y);
        } else {
            null_fiber[y] = true;
            if (fiber.empty()) {
                masses.assign(xs.size(), Rational(1, static_cast<long>(xs.size())));
            } else {
                for (std::size_t x : fiber) masses[x] = Rational(1, static_cast<long>(fiber.size()));
            }
        }
        rows.emplace_back(xs, std::move(masses));
    }
    return Disintegration{StochasticKernel(f.codomain(), xs, std::move(rows)), std::move(null_fiber)};
}

}  // namespace kernelflow
