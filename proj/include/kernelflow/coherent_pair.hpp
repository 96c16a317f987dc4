#pragma once

#include "kernelflow/distribution.hpp"
#include "kernelflow/kernel.hpp"

#include <optional>
#include <string>
#include <vector>

namespace kernelflow {

struct CoherenceViolation {
    enum class Kind {
        /// pushforward(p, f)(y) differs from q(y).
        NotMeasurePreserving,
        /// q(y) > 0 but s_y puts mass on x outside f^-1(y).
        MassOutsideFiber,
    };
    Kind kind;
    std::string y;
    /// Offending x for MassOutsideFiber.
    std::optional<std::string> x;
    std::string detail;
};

struct CoherenceReport {
    bool is_coherent = false;
    /// Every row s_y, including rows at q-null y, is supported on f^-1(y).
    /// This is the everywhere reading eta_Y = Gamma(f) o s; it is what the
    /// chain rule and closure under composition rely on.
    bool fiber_supported_everywhere = false;
    std::vector<CoherenceViolation> violations;
};

/// Checks that f: X -> Y pushes p to q and that s_y lives on f^-1(y) for
/// every y with q(y) > 0. Throws DomainError only when the shapes disagree.
CoherenceReport validate_coherent(const PointMap& f, const StochasticKernel& s,
                                  const FiniteDistribution& p, const FiniteDistribution& q);

/// A morphism (f, s): (X, p) -> (Y, q) of FinStat, with its coherence report
/// computed eagerly at construction. An incoherent pair can be built (so it
/// can be reported on) but the entropy operations reject it.
class CoherentPair {
public:
    CoherentPair(PointMap f, StochasticKernel s, FiniteDistribution p, FiniteDistribution q);
    /// q is taken to be pushforward(p, f).
    CoherentPair(PointMap f, StochasticKernel s, FiniteDistribution p);

    /// (id, delta): (X, p) -> (X, p).
    static CoherentPair identity(const FiniteDistribution& p);
    /// (f, disintegration of p along f): the optimal hypothesis.
    static CoherentPair with_disintegration(const PointMap& f, const FiniteDistribution& p);
    /// The morphism (X, p) -> ({y}, delta_y) whose hypothesis is `forecast`.
    static CoherentPair to_point(const FiniteDistribution& p, const FiniteDistribution& forecast,
                                 std::string point_label = "*");

    [[nodiscard]] const PointMap& f() const { return f_; }
    [[nodiscard]] const StochasticKernel& s() const { return s_; }
    [[nodiscard]] const FiniteDistribution& p() const { return p_; }
    [[nodiscard]] const FiniteDistribution& q() const { return q_; }
    [[nodiscard]] const CoherenceReport& report() const { return report_; }
    [[nodiscard]] bool coherent() const { return report_.is_coherent; }

    /// s o~ q, the hypothesis' reconstruction of p.
    [[nodiscard]] const FiniteDistribution& reconstruction() const { return reconstruction_; }

    /// Throws PreconditionError naming `operation` if the pair is incoherent.
    void require_coherent(std::string_view operation) const;

private:
    PointMap f_;
    StochasticKernel s_;
    FiniteDistribution p_;
    FiniteDistribution q_;
    CoherenceReport report_;
    FiniteDistribution reconstruction_;
};

/// p << s o~ q. Requires a coherent pair.
bool is_absolutely_coherent(const CoherentPair& pair);

/// p = s o~ q exactly (membership in FP). Requires a coherent pair.
bool is_optimal(const CoherentPair& pair);

/// (g, t) o (f, s) = (g o f, s o~ t). Requires first.q == second.p exactly.
CoherentPair compose_pairs(const CoherentPair& first, const CoherentPair& second);

}  // namespace kernelflow
