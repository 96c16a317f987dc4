#pragma once

#include "kernelflow/coherent_pair.hpp"
#include "kernelflow/extended_real.hpp"

#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace kernelflow {

struct PointTerm {
    std::string point;
    /// p(x) ln(p(x) / (s o~ q)(x)); may be negative.
    double term;
};

/// Relative entropy of a morphism, natural log.
struct ReValue {
    ExtendedNonNegReal value;
    bool absolutely_coherent = false;
    /// Present iff the value is finite. Points with p(x) = 0 are omitted
    /// (they contribute exactly 0).
    std::optional<std::vector<PointTerm>> per_point_terms;
};

/// RE((f, s)) = sum_x p(x) ln(p(x) / (s o~ q)(x)) when p << s o~ q, otherwise
/// +inf. Each ratio is formed exactly before its logarithm; terms are summed
/// in point order with compensated summation. Throws PreconditionError on an
/// incoherent pair.
ReValue re_fin(const CoherentPair& pair);

/// Any functor-candidate from FinStat morphisms to [0, inf].
using MorphismFunctional = std::function<ExtendedNonNegReal(const CoherentPair&)>;

/// The relative entropy functor as a MorphismFunctional.
ExtendedNonNegReal relative_entropy(const CoherentPair& pair);

/// The restricted morphism (f^-1(y), p_y) -> ({y}, delta_y) with hypothesis
/// s_y. Requires a coherent pair and q(y) > 0.
CoherentPair local_morphism(const CoherentPair& pair, std::size_t y);

/// Local relative entropy at y, i.e. KL(p_y || s_y). Returns nullopt when
/// q(y) = 0: the local morphism is undefined there and carries zero weight.
std::optional<ExtendedNonNegReal> local_re(const CoherentPair& pair, std::size_t y);
std::optional<ExtendedNonNegReal> local_re(const CoherentPair& pair, std::string_view y);

struct LocalReDecomposition {
    struct Entry {
        std::string y;
        Rational weight;  // q(y)
        std::optional<ExtendedNonNegReal> local;  // nullopt iff weight == 0
    };
    /// One entry per point of Y, in point order.
    std::vector<Entry> entries;
    /// sum_y q(y) * local(y), with 0 * inf = 0.
    ExtendedNonNegReal total;
};

/// Convex-linear decomposition of RE over the fibers of f.
LocalReDecomposition convex_decompose(const CoherentPair& pair);
/// Same decomposition for an arbitrary functional (used to test candidates
/// such as c * RE against the convex-linearity law).
LocalReDecomposition convex_decompose(const CoherentPair& pair, const MorphismFunctional& functional);

struct FunctorialityCheck {
    ExtendedNonNegReal first;
    ExtendedNonNegReal second;
    ExtendedNonNegReal composite;
    /// composite - first - second, when all three are finite.
    std::optional<double> residual;
    /// Some side is infinite and both sides of the law are +inf together.
    bool infinite_agreement = false;

    [[nodiscard]] bool holds(double tolerance) const {
        return residual ? std::abs(*residual) < tolerance : infinite_agreement;
    }
};

/// Evaluates F((g,t) o (f,s)) against F((g,t)) + F((f,s)). Throws DomainError
/// if the pairs are not composable.
FunctorialityCheck check_functoriality(const CoherentPair& first, const CoherentPair& second,
                                       const MorphismFunctional& functional = relative_entropy);

struct LscCheck {
    ExtendedNonNegReal liminf_estimate;
    bool satisfied = false;
};

/// Lower semicontinuity spot check along a caller-supplied sequence of
/// morphisms into a one-point space that converges strongly to `target`.
/// The liminf is estimated by the minimum over the last ceil(n/2) terms and
/// the check passes when RE(target) <= that minimum + 1e-9.
LscCheck check_lsc_on_sequence(const CoherentPair& target, const std::vector<CoherentPair>& approximants);

/// c * RE((f, s)) with inf * 0 = 0 * inf = 0.
ExtendedNonNegReal scaled_functor(ExtendedNonNegReal c, const CoherentPair& pair);

}  // namespace kernelflow
