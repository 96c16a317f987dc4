#include "kernelflow/entropy.hpp"

#include "kernelflow/detail/compensated_sum.hpp"
#include "kernelflow/errors.hpp"
#include "kernelflow/monad.hpp"

#include <algorithm>

namespace kernelflow {

ReValue re_fin(const CoherentPair& pair) {
    pair.require_coherent("re_fin");
    const FiniteDistribution& p = pair.p();
    const FiniteDistribution& r = pair.reconstruction();
    if (!p.absolutely_continuous_wrt(r)) {
        return ReValue{ExtendedNonNegReal::infinity(), false, std::nullopt};
    }
    detail::CompensatedSum sum;
    std::vector<PointTerm> terms;
    for (std::size_t x = 0; x < p.space().size(); ++x) {
        if (p.mass(x).is_zero()) continue;
        const Rational ratio = p.mass(x) / r.mass(x);
        const double term = ratio.is_one() ? 0.0 : p.mass(x).to_double() * ratio.log();
        terms.push_back({p.space().label(x), term});
        sum.add(term);
    }
    // Gibbs' inequality: a negative total is rounding around a true zero.
    const double value = std::max(0.0, sum.value());
    return ReValue{ExtendedNonNegReal(value), true, std::move(terms)};
}

ExtendedNonNegReal relative_entropy(const CoherentPair& pair) { return re_fin(pair).value; }

CoherentPair local_morphism(const CoherentPair& pair, std::size_t y) {
    pair.require_coherent("local_morphism");
    const Rational& weight = pair.q().mass(y);
    const std::string& y_label = pair.q().space().label(y);
    if (!weight.is_positive()) {
        throw PreconditionError("local morphism at '" + y_label + "' is undefined: q(y) = 0");
    }
    const auto fiber = pair.f().fiber(y);
    std::vector<std::string> labels;
    std::vector<Rational> conditional;
    std::vector<Rational> hypothesis;
    for (std::size_t x : fiber) {
        labels.push_back(pair.p().space().label(x));
        conditional.push_back(pair.p().mass(x) / weight);
        hypothesis.push_back(pair.s().row(y).mass(x));
    }
    const FiniteSpace fiber_space(std::move(labels));
    return CoherentPair::to_point(FiniteDistribution(fiber_space, std::move(conditional)),
                                        FiniteDistribution(fiber_space, std::move(hypothesis)), y_label);
}

std::optional<ExtendedNonNegReal> local_re(const CoherentPair& pair, std::size_t y) {
    pair.require_coherent("local_re");
    if (!pair.q().mass(y).is_positive()) return std::nullopt;
    return re_fin(local_morphism(pair, y)).value;
}

std::optional<ExtendedNonNegReal> local_re(const CoherentPair& pair, std::string_view y) {
    return local_re(pair, pair.q().space().index_of(y));
}

LocalReDecomposition convex_decompose(const CoherentPair& pair, const MorphismFunctional& functional) {
    pair.require_coherent("convex_decompose");
    LocalReDecomposition out;
    detail::CompensatedSum finite_part;
    bool infinite = false;
    const FiniteDistribution& q = pair.q();
    for (std::size_t y = 0; y < q.space().size(); ++y) {
        LocalReDecomposition::Entry entry{q.space().label(y), q.mass(y), std::nullopt};
        if (q.mass(y).is_positive()) {
            entry.local = functional(local_morphism(pair, y));
            const ExtendedNonNegReal weighted = ExtendedNonNegReal(q.mass(y).to_double()) * *entry.local;
            if (weighted.is_infinite()) {
                infinite = true;
            } else {
                finite_part.add(weighted.value());
            }
        }
        out.entries.push_back(std::move(entry));
    }
    out.total = infinite ? ExtendedNonNegReal::infinity() : ExtendedNonNegReal(finite_part.value());
    return out;
}

LocalReDecomposition convex_decompose(const CoherentPair& pair) {
    return convex_decompose(pair, relative_entropy);
}

FunctorialityCheck check_functoriality(const CoherentPair& first, const CoherentPair& second,
                                       const MorphismFunctional& functional) {
    const CoherentPair composite = compose_pairs(first, second);
    FunctorialityCheck check;
    check.first = functional(first);
    check.second = functional(second);
    check.composite = functional(composite);
    const ExtendedNonNegReal sides = check.first + check.second;
    if (check.composite.is_finite() && sides.is_finite()) {
        check.residual = check.composite.value() - check.first.value() - check.second.value();
    } else {
        check.infinite_agreement = check.composite.is_infinite() && sides.is_infinite();
    }
    return check;
}

LscCheck check_lsc_on_sequence(const CoherentPair& target, const std::vector<CoherentPair>& approximants) {
    if (approximants.empty()) throw DomainError("lower semicontinuity check needs at least one approximant");
    auto require_shape = [&](const CoherentPair& m) {
        if (m.q().space().size() != 1) {
            throw DomainError("lower semicontinuity is stated for morphisms into a one-point space");
        }
        if (!(m.p().space() == target.p().space()) || !(m.q().space() == target.q().space())) {
            throw DomainError("approximants must share the target's spaces");
        }
    };
    require_shape(target);
    for (const auto& m : approximants) require_shape(m);

    const ExtendedNonNegReal target_value = relative_entropy(target);
    const std::size_t tail_begin = approximants.size() / 2;
    ExtendedNonNegReal running_min = ExtendedNonNegReal::infinity();
    for (std::size_t i = tail_begin; i < approximants.size(); ++i) {
        running_min = std::min(running_min, relative_entropy(approximants[i]));
    }
    LscCheck out;
    out.liminf_estimate = running_min;
    out.satisfied = running_min.is_infinite() ||
                    (target_value.is_finite() && target_value.value() <= running_min.value() + 1e-9);
    return out;
}

ExtendedNonNegReal scaled_functor(ExtendedNonNegReal c, const CoherentPair& pair) {
    return c * relative_entropy(pair);
}

}  // namespace kernelflow
