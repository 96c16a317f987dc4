#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace kernelflow {

/// A finite set of labeled points with the power set as sigma-algebra.
///
/// Point order is fixed at construction and is the canonical iteration and
/// serialization order everywhere in the library. Copies share storage.
class FiniteSpace {
public:
    /// Throws DomainError on an empty list, an empty label or a duplicate.
    explicit FiniteSpace(std::vector<std::string> labels);

    /// A one-point space, used as the terminal object ({y}, delta_y).
    static FiniteSpace singleton(std::string label = "*");

    /// Cartesian product; point (a, b) is labeled "a|b", first factor major.
    static FiniteSpace product(const FiniteSpace& first, const FiniteSpace& second);

    [[nodiscard]] std::size_t size() const { return impl_->labels.size(); }
    [[nodiscard]] std::span<const std::string> labels() const { return impl_->labels; }
    [[nodiscard]] const std::string& label(std::size_t index) const { return impl_->labels.at(index); }

    [[nodiscard]] std::optional<std::size_t> find(std::string_view label) const;
    /// Index of a label; throws DomainError if absent.
    [[nodiscard]] std::size_t index_of(std::string_view label) const;
    [[nodiscard]] bool contains(std::string_view label) const { return find(label).has_value(); }

    friend bool operator==(const FiniteSpace& a, const FiniteSpace& b) {
        return a.impl_ == b.impl_ || a.impl_->labels == b.impl_->labels;
    }

    [[nodiscard]] std::string describe() const;

private:
    struct Impl {
        std::vector<std::string> labels;
        std::unordered_map<std::string, std::size_t> index;
    };
    std::shared_ptr<const Impl> impl_;
};

}  // namespace kernelflow
