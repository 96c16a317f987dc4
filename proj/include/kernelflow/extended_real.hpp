#pragma once

#include <compare>
#include <limits>
#include <ostream>
#include <string>

namespace kernelflow {

/// A value in [0, inf]: the morphisms of Lawvere's category [0, inf].
///
/// Addition is total with inf absorbing. Multiplication follows the measure
/// theory conventions inf * c = inf for c > 0 and inf * 0 = 0 * inf = 0, so
/// weighted sums over null sets never produce NaN.
class ExtendedNonNegReal {
public:
    constexpr ExtendedNonNegReal() = default;

    /// Throws DomainError for negative or NaN input. +inf is accepted.
    explicit ExtendedNonNegReal(double value);

    static constexpr ExtendedNonNegReal infinity() {
        ExtendedNonNegReal r;
        r.value_ = std::numeric_limits<double>::infinity();
        return r;
    }
    static constexpr ExtendedNonNegReal zero() { return {}; }

    [[nodiscard]] constexpr bool is_infinite() const {
        return value_ == std::numeric_limits<double>::infinity();
    }
    [[nodiscard]] constexpr bool is_finite() const { return !is_infinite(); }

    /// The finite value, or +inf.
    [[nodiscard]] constexpr double value() const { return value_; }

    friend ExtendedNonNegReal operator+(ExtendedNonNegReal a, ExtendedNonNegReal b);
    ExtendedNonNegReal& operator+=(ExtendedNonNegReal rhs) { return *this = *this + rhs; }

    /// Product under the 0 * inf = 0 convention.
    friend ExtendedNonNegReal operator*(ExtendedNonNegReal a, ExtendedNonNegReal b);

    friend constexpr bool operator==(ExtendedNonNegReal a, ExtendedNonNegReal b) {
        return a.value_ == b.value_;
    }
    friend constexpr std::partial_ordering operator<=>(ExtendedNonNegReal a, ExtendedNonNegReal b) {
        return a.value_ <=> b.value_;
    }

    [[nodiscard]] std::string to_string() const;

    friend std::ostream& operator<<(std::ostream& os, ExtendedNonNegReal r) {
        return os << r.to_string();
    }

private:
    double value_ = 0.0;
};

}  // namespace kernelflow
