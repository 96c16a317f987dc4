#include "kernelflow/finite_space.hpp"

#include "kernelflow/errors.hpp"

namespace kernelflow {

FiniteSpace::FiniteSpace(std::vector<std::string> labels) {
    if (labels.empty()) throw DomainError("a finite space needs at least one point");
    auto impl = std::make_shared<Impl>();
    impl->index.reserve(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i].empty()) throw DomainError("point labels must be nonempty");
        if (!impl->index.emplace(labels[i], i).second) {
            throw DomainError("duplicate point label '" + labels[i] + "'");
        }
    }
    impl->labels = std::move(labels);
    impl_ = std::move(impl);
}

FiniteSpace FiniteSpace::singleton(std::string label) {
    return FiniteSpace(std::vector<std::string>{std::move(label)});
}

FiniteSpace FiniteSpace::product(const FiniteSpace& first, const FiniteSpace& second) {
    std::vector<std::string> labels;
    labels.reserve(first.size() * second.size());
    for (const auto& a : first.labels()) {
        for (const auto& b : second.labels()) labels.push_back(a + "|" + b);
    }
    return FiniteSpace(std::move(labels));
}

std::optional<std::size_t> FiniteSpace::find(std::string_view label) const {
    const auto it = impl_->index.find(std::string(label));
    if (it == impl_->index.end()) return std::nullopt;
    return it->second;
}

std::size_t FiniteSpace::index_of(std::string_view label) const {
    if (auto i = find(label)) return *i;
    throw DomainError("point '" + std::string(label) + "' is not in space " + describe());
}

std::string FiniteSpace::describe() const {
    std::string out = "{";
    for (std::size_t i = 0; i < size(); ++i) {
        if (i != 0) out += ", ";
        out += impl_->labels[i];
    }
    return out + "}";
}

}  // namespace kernelflow
