#include "kernelflow/distribution.hpp"

#include "kernelflow/errors.hpp"

namespace kernelflow {

FiniteDistribution::FiniteDistribution(FiniteSpace space, std::vector<Rational> masses)
    : space_(std::move(space)), masses_(std::move(masses)) {
    if (masses_.size() != space_.size()) {
        throw DomainError("distribution has " + std::to_string(masses_.size()) +
                          " masses for a space of " + std::to_string(space_.size()) + " points");
    }
    Rational total;
    for (std::size_t i = 0; i < masses_.size(); ++i) {
        if (masses_[i].is_negative()) {
            throw DomainError("negative mass " + masses_[i].to_string() + " at point '" +
                              space_.label(i) + "'");
        }
        total += masses_[i];
    }
    if (!total.is_one()) {
        throw DomainError("masses sum to " + total.to_string() + ", expected exactly 1");
    }
}

FiniteDistribution FiniteDistribution::from_labels(
    FiniteSpace space, const std::vector<std::pair<std::string, Rational>>& masses) {
    std::vector<Rational> dense(space.size());
    std::vector<bool> seen(space.size(), false);
    for (const auto& [label, mass] : masses) {
        const std::size_t i = space.index_of(label);
        if (seen[i]) throw DomainError("point '" + label + "' assigned twice");
        seen[i] = true;
        dense[i] = mass;
    }
    return FiniteDistribution(std::move(space), std::move(dense));
}

FiniteDistribution FiniteDistribution::uniform(FiniteSpace space) {
    const auto n = static_cast<long>(space.size());
    std::vector<Rational> masses(space.size(), Rational(1, n));
    return FiniteDistribution(std::move(space), std::move(masses));
}

std::vector<std::size_t> FiniteDistribution::support() const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < masses_.size(); ++i) {
        if (masses_[i].is_positive()) out.push_back(i);
    }
    return out;
}

bool FiniteDistribution::absolutely_continuous_wrt(const FiniteDistribution& other) const {
    if (!(space_ == other.space_)) throw DomainError("absolute continuity across different spaces");
    for (std::size_t i = 0; i < masses_.size(); ++i) {
        if (masses_[i].is_positive() && other.masses_[i].is_zero()) return false;
    }
    return true;
}

std::string FiniteDistribution::to_string() const {
    std::string out = "(";
    for (std::size_t i = 0; i < masses_.size(); ++i) {
        if (i != 0) out += ", ";
        out += space_.label(i) + ":" + masses_[i].to_string();
    }
    return out + ")";
}

}  // namespace kernelflow
