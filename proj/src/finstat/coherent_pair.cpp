#include "kernelflow/coherent_pair.hpp"

#include "kernelflow/errors.hpp"
#include "kernelflow/monad.hpp"

namespace kernelflow {

CoherenceReport validate_coherent(const PointMap& f, const StochasticKernel& s,
                                  const FiniteDistribution& p, const FiniteDistribution& q) {
    if (!(f.domain() == p.space()) || !(f.codomain() == q.space()) ||
        !(s.source() == f.codomain()) || !(s.target() == f.domain())) {
        throw DomainError("coherence check: f, s, p and q do not describe a pair X -> Y");
    }
    CoherenceReport report;
    const FiniteDistribution image = pushforward(p, f);
    for (std::size_t y = 0; y < q.space().size(); ++y) {
        if (image.mass(y) != q.mass(y)) {
            report.violations.push_back(
                {CoherenceViolation::Kind::NotMeasurePreserving, q.space().label(y), std::nullopt,
                 "pushforward mass " + image.mass(y).to_string() + " but q = " + q.mass(y).to_string()});
        }
    }
    bool everywhere = true;
    for (std::size_t y = 0; y < s.source().size(); ++y) {
        const FiniteDistribution& row = s.row(y);
        for (std::size_t x = 0; x < row.space().size(); ++x) {
            if (row.mass(x).is_zero() || f(x) == y) continue;
            everywhere = false;
            if (q.mass(y).is_positive()) {
                report.violations.push_back(
                    {CoherenceViolation::Kind::MassOutsideFiber, q.space().label(y), p.space().label(x),
                     "s_" + q.space().label(y) + " puts mass " + row.mass(x).to_string() + " on '" +
                         p.space().label(x) + "', which maps to '" + q.space().label(f(x)) + "'"});
            }
        }
    }
    report.is_coherent = report.violations.empty();
    report.fiber_supported_everywhere = report.is_coherent && everywhere;
    return report;
}

CoherentPair::CoherentPair(PointMap f, StochasticKernel s, FiniteDistribution p, FiniteDistribution q)
    : f_(std::move(f)),
      s_(std::move(s)),
      p_(std::move(p)),
      q_(std::move(q)),
      report_(validate_coherent(f_, s_, p_, q_)),
      reconstruction_(kernel_apply(s_, q_)) {}

CoherentPair::CoherentPair(PointMap f, StochasticKernel s, FiniteDistribution p)
    : CoherentPair(f, std::move(s), p, pushforward(p, f)) {}

CoherentPair CoherentPair::identity(const FiniteDistribution& p) {
    const PointMap id = PointMap::identity(p.space());
    return CoherentPair(id, StochasticKernel::deterministic(id), p, p);
}

CoherentPair CoherentPair::with_disintegration(const PointMap& f, const FiniteDistribution& p) {
    return CoherentPair(f, disintegrate(p, f).kernel, p);
}

CoherentPair CoherentPair::to_point(const FiniteDistribution& p, const FiniteDistribution& forecast,
                                    std::string point_label) {
    if (!(p.space() == forecast.space())) {
        throw DomainError("forecast lives on " + forecast.space().describe() + " but truth on " +
                          p.space().describe());
    }
    const FiniteSpace point = FiniteSpace::singleton(std::move(point_label));
    return CoherentPair(PointMap::to_point(p.space(), point), StochasticKernel::constant(point, forecast),
                        p, dirac(0, point));
}

void CoherentPair::require_coherent(std::string_view operation) const {
    if (report_.is_coherent) return;
    std::string msg = std::string(operation) + " requires a coherent pair; violations:";
    for (const auto& v : report_.violations) msg += " [" + v.detail + "]";
    throw PreconditionError(msg);
}

bool is_absolutely_coherent(const CoherentPair& pair) {
    pair.require_coherent("is_absolutely_coherent");
    return pair.p().absolutely_continuous_wrt(pair.reconstruction());
}

bool is_optimal(const CoherentPair& pair) {
    pair.require_coherent("is_optimal");
    return pair.reconstruction() == pair.p();
}

CoherentPair compose_pairs(const CoherentPair& first, const CoherentPair& second) {
    if (!(first.q() == second.p())) {
        throw DomainError("compose_pairs: codomain object " + first.q().to_string() +
                          " differs from domain object " + second.p().to_string());
    }
    return CoherentPair(compose(second.f(), first.f()), kleisli_compose(first.s(), second.s()),
                        first.p(), second.q());
}

}  // namespace kernelflow
