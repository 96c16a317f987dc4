#include "kernelflow/kernel.hpp"

#include "kernelflow/errors.hpp"

namespace kernelflow {

PointMap::PointMap(FiniteSpace domain, FiniteSpace codomain, std::vector<std::size_t> image)
    : domain_(std::move(domain)), codomain_(std::move(codomain)), image_(std::move(image)) {
    if (image_.size() != domain_.size()) {
        throw DomainError("point map must assign every point of " + domain_.describe());
    }
    for (std::size_t x = 0; x < image_.size(); ++x) {
        if (image_[x] >= codomain_.size()) {
            throw DomainError("point '" + domain_.label(x) + "' is mapped outside " +
                              codomain_.describe());
        }
    }
}

PointMap PointMap::from_labels(FiniteSpace domain, FiniteSpace codomain,
                               const std::map<std::string, std::string>& assignment) {
    std::vector<std::size_t> image(domain.size(), codomain.size());
    for (const auto& [x, y] : assignment) {
        const std::size_t xi = domain.index_of(x);
        const auto yi = codomain.find(y);
        if (!yi) {
            throw DomainError("point '" + x + "' is mapped to '" + y + "', which is not in " +
                              codomain.describe());
        }
        image[xi] = *yi;
    }
    for (std::size_t x = 0; x < image.size(); ++x) {
        if (image[x] == codomain.size()) {
            throw DomainError("point '" + domain.label(x) + "' has no image");
        }
    }
    return PointMap(std::move(domain), std::move(codomain), std::move(image));
}

PointMap PointMap::identity(const FiniteSpace& space) {
    std::vector<std::size_t> image(space.size());
    for (std::size_t i = 0; i < image.size(); ++i) image[i] = i;
    return PointMap(space, space, std::move(image));
}

PointMap PointMap::to_point(const FiniteSpace& domain, const FiniteSpace& point) {
    if (point.size() != 1) throw DomainError("target of to_point must be a one-point space");
    return PointMap(domain, point, std::vector<std::size_t>(domain.size(), 0));
}

std::vector<std::size_t> PointMap::fiber(std::size_t y) const {
    std::vector<std::size_t> out;
    for (std::size_t x = 0; x < image_.size(); ++x) {
        if (image_[x] == y) out.push_back(x);
    }
    return out;
}

PointMap compose(const PointMap& g, const PointMap& f) {
    if (!(f.codomain_ == g.domain_)) {
        throw DomainError("cannot compose point maps: " + f.codomain_.describe() + " vs " +
                          g.domain_.describe());
    }
    std::vector<std::size_t> image(f.image_.size());
    for (std::size_t x = 0; x < image.size(); ++x) image[x] = g.image_[f.image_[x]];
    return PointMap(f.domain_, g.codomain_, std::move(image));
}

StochasticKernel::StochasticKernel(FiniteSpace source, FiniteSpace target,
                                   std::vector<FiniteDistribution> rows)
    : source_(std::move(source)), target_(std::move(target)), rows_(std::move(rows)) {
    if (rows_.size() != source_.size()) {
        throw DomainError("kernel needs exactly one row per point of " + source_.describe());
    }
    for (std::size_t y = 0; y < rows_.size(); ++y) {
        if (!(rows_[y].space() == target_)) {
            throw DomainError("kernel row '" + source_.label(y) + "' is not a distribution on " +
                              target_.describe());
        }
    }
}

StochasticKernel StochasticKernel::deterministic(const PointMap& f) {
    std::vector<FiniteDistribution> rows;
    rows.reserve(f.domain().size());
    for (std::size_t y = 0; y < f.domain().size(); ++y) {
        std::vector<Rational> masses(f.codomain().size());
        masses[f(y)] = 1;
        rows.emplace_back(f.codomain(), std::move(masses));
    }
    return StochasticKernel(f.domain(), f.codomain(), std::move(rows));
}

StochasticKernel StochasticKernel::constant(const FiniteSpace& point, const FiniteDistribution& d) {
    if (point.size() != 1) throw DomainError("constant kernel needs a one-point source");
    return StochasticKernel(point, d.space(), {d});
}

}  // namespace kernelflow
