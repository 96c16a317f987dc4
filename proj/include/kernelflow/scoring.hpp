#pragma once

// Scoring of probabilistic forecasts. Scores are losses: smaller is better.
//
// The canonical score is kl_score, KL(truth || forecast). empirical_log_score
// is the outcome-only estimator -ln forecast(outcome); its expectation under
// the truth exceeds kl_score by the truth's Shannon entropy, a constant that
// does not depend on the forecast.

#include "kernelflow/coherent_pair.hpp"
#include "kernelflow/distribution.hpp"
#include "kernelflow/entropy.hpp"
#include "kernelflow/extended_real.hpp"
#include "kernelflow/kernel.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace kernelflow {

struct ForecastRecord {
    long round = 0;
    std::string forecaster;
    FiniteDistribution forecast;
    std::string outcome;
};

struct RoundScore {
    long round;
    /// +inf when the forecast gave the realized outcome probability zero.
    double score;
};

struct ScoreReport {
    std::string forecaster;
    std::vector<RoundScore> per_round;
    /// Left-to-right sum of per_round, so appending a round adds exactly its score.
    double total = 0.0;
};

/// Log loss of one forecaster's records, in the order given. Throws
/// DomainError naming the round and field for an outcome outside the
/// forecast's space, a record from another forecaster, or a repeated round.
ScoreReport empirical_log_score(const std::vector<ForecastRecord>& log);

/// Splits a multi-forecaster log and scores each forecaster; reports are
/// ordered by forecaster id.
std::vector<ScoreReport> empirical_log_scores(const std::vector<ForecastRecord>& log);

/// RE of (X, truth) -> ({*}, delta) with hypothesis `forecast`; bit-identical
/// to re_fin on that pair. Throws DomainError on a space mismatch.
ExtendedNonNegReal kl_score(const FiniteDistribution& truth, const FiniteDistribution& forecast);

/// Expected score of the conditional forecasts s_y under q: the convex
/// decomposition of the pair's relative entropy.
LocalReDecomposition conditional_score(const CoherentPair& joint_pair);

/// score_1 = S(p, q_1), score_i = S(p, q_{i-1}) - S(p, q_i). Entries may be
/// +-inf; two consecutive infinite scores throw IndeterminateError naming
/// both rounds (1-based).
std::vector<double> sequential_scores(const FiniteDistribution& truth, const std::vector<FiniteDistribution>& forecasts);

/// Finite meta-forecasting. `joint` lives on X x F (labels "x|f"), F being a
/// finite set of candidate first forecasts; `second` maps each f to a
/// forecast over X. Returns E_{f ~ Q} KL(P_f || second_f), the relative
/// entropy of the projection X x F -> F with hypothesis `second`. Throws
/// DomainError if the F-marginal of `joint` differs from `first_marginal`.
ExtendedNonNegReal meta_score(const FiniteDistribution& joint, const FiniteDistribution& first_marginal,
                              const StochasticKernel& second);

/// A scoring rule on distributions, returning a loss that may be +inf.
using ScoringRule = std::function<double(const FiniteDistribution&, const FiniteDistribution&)>;

struct PropernessViolation {
    FiniteDistribution truth;
    FiniteDistribution forecast;
    double self_score;
    double cross_score;
    std::string reason;
};

struct PropernessAudit {
    std::size_t trials = 0;
    std::vector<PropernessViolation> violations;
};

/// Samples `trials` pairs (p, q) with masses on grids of denominator <= 64 and
/// checks S(p, p) = 0 <= S(p, q), strictly when the total variation between p
/// and q exceeds 1e-9.
PropernessAudit properness_audit(const FiniteSpace& space, std::size_t trials, std::uint64_t seed,
                                 const ScoringRule& rule = {});

}  // namespace kernelflow
