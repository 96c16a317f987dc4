#include "kernelflow/extended_real.hpp"

#include "kernelflow/errors.hpp"

#include <cmath>
#include <cstdio>

namespace kernelflow {

ExtendedNonNegReal::ExtendedNonNegReal(double value) : value_(value) {
    if (std::isnan(value) || value < 0.0) {
        throw DomainError("extended non-negative real must lie in [0, inf], got " +
                          std::to_string(value));
    }
}

ExtendedNonNegReal operator+(ExtendedNonNegReal a, ExtendedNonNegReal b) {
    if (a.is_infinite() || b.is_infinite()) return ExtendedNonNegReal::infinity();
    return ExtendedNonNegReal(a.value_ + b.value_);
}

ExtendedNonNegReal operator*(ExtendedNonNegReal a, ExtendedNonNegReal b) {
    if (a.value_ == 0.0 || b.value_ == 0.0) return ExtendedNonNegReal::zero();
    if (a.is_infinite() || b.is_infinite()) return ExtendedNonNegReal::infinity();
    return ExtendedNonNegReal(a.value_ * b.value_);
}

std::string ExtendedNonNegReal::to_string() const {
    if (is_infinite()) return "inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.9g", value_);
    return buf;
}

}  // namespace kernelflow
