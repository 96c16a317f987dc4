#include "kernelflow/scoring.hpp"
#include "kernelflow/errors.hpp"
#include "kernelflow/monad.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <random>
#include <set>

namespace kernelflow {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string round_name(long round) { return "round " + std::to_string(round); }

FiniteDistribution grid_distribution(std::mt19937_64& rng, const FiniteSpace& space) {
    const long n = static_cast<long>(space.size());
    const long den = std::uniform_int_distribution<long>(std::max(n, 2L), 64)(rng);
    std::vector<long> cuts;
    for (long i = 0; i + 1 < n; ++i) cuts.push_back(std::uniform_int_distribution<long>(0, den)(rng));
    std::sort(cuts.begin(), cuts.end());
    std::vector<Rational> masses;
    long prev = 0;
    for (long c : cuts) {
        masses.emplace_back(c - prev, den);
        prev = c;
    }
    masses.emplace_back(den - prev, den);
    return FiniteDistribution(space, std::move(masses));
}

double total_variation(const FiniteDistribution& p, const FiniteDistribution& q) {
    Rational sum;
    for (std::size_t i = 0; i < p.space().size(); ++i) {
        const Rational d = p.mass(i) - q.mass(i);
        sum += d.is_negative() ? -d : d;
    }
    return (sum / Rational(2)).to_double();
}

}  // namespace

ScoreReport empirical_log_score(const std::vector<ForecastRecord>& log) {
    ScoreReport report;
    if (log.empty()) return report;
    report.forecaster = log.front().forecaster;
    std::set<long> seen;
    for (const auto& record : log) {
        if (record.forecaster != report.forecaster) {
            throw DomainError(round_name(record.round) + ": field 'forecaster' is '" + record.forecaster +
                              "', expected '" + report.forecaster + "'");
        }
        if (!seen.insert(record.round).second) {
            throw DomainError(round_name(record.round) + ": field 'round' repeats for forecaster '" +
                              record.forecaster + "'");
        }
        const auto index = record.forecast.space().find(record.outcome);
        if (!index) {
            throw DomainError(round_name(record.round) + ": field 'outcome' value '" + record.outcome +
                              "' is not a point of " + record.forecast.space().describe());
        }
        const Rational& mass = record.forecast.mass(*index);
        const double score = mass.is_zero() ? kInf : 0.0 - mass.log();
        report.per_round.push_back({record.round, score});
        report.total += score;
    }
    return report;
}

std::vector<ScoreReport> empirical_log_scores(const std::vector<ForecastRecord>& log) {
    std::map<std::string, std::vector<ForecastRecord>> by_forecaster;
    for (const auto& record : log) by_forecaster[record.forecaster].push_back(record);
    std::vector<ScoreReport> reports;
    for (const auto& [id, records] : by_forecaster) reports.push_back(empirical_log_score(records));
    return reports;
}

ExtendedNonNegReal kl_score(const FiniteDistribution& truth, const FiniteDistribution& forecast) {
    return re_fin(CoherentPair::to_point(truth, forecast)).value;
}

LocalReDecomposition conditional_score(const CoherentPair& joint_pair) { return convex_decompose(joint_pair); }

std::vector<double> sequential_scores(const FiniteDistribution& truth, const std::vector<FiniteDistribution>& forecasts) {
    if (forecasts.empty()) throw DomainError("sequential scoring needs at least one forecast");
    std::vector<double> scores;
    double previous = 0.0;
    for (std::size_t i = 0; i < forecasts.size(); ++i) {
        const double current = kl_score(truth, forecasts[i]).value();
        if (i == 0) {
            scores.push_back(current);
        } else if (std::isinf(previous) && std::isinf(current)) {
            throw IndeterminateError("indeterminate increment inf - inf between rounds " + std::to_string(i) +
                                     " and " + std::to_string(i + 1));
        } else {
            scores.push_back(previous - current);
        }
        previous = current;
    }
    return scores;
}

ExtendedNonNegReal meta_score(const FiniteDistribution& joint, const FiniteDistribution& first_marginal,
                              const StochasticKernel& second) {
    const FiniteSpace& events = second.target();
    const FiniteSpace& candidates = second.source();
    const FiniteSpace product = FiniteSpace::product(events, candidates);
    if (!(joint.space() == product)) {
        throw DomainError("meta_score: joint lives on " + joint.space().describe() + ", expected " +
                          product.describe());
    }
    if (!(first_marginal.space() == candidates)) {
        throw DomainError("meta_score: first forecaster marginal lives on " + first_marginal.space().describe() +
                          ", expected " + candidates.describe());
    }
    std::vector<std::size_t> image(product.size());
    for (std::size_t i = 0; i < product.size(); ++i) image[i] = i % candidates.size();
    const PointMap projection(product, candidates, std::move(image));
    if (!(pushforward(joint, projection) == first_marginal)) {
        throw DomainError("meta_score: F-marginal of the joint " + pushforward(joint, projection).to_string() +
                          " differs from the first forecaster marginal " + first_marginal.to_string());
    }
    // Lift each row over X onto the fiber X x {f}.
    std::vector<FiniteDistribution> rows;
    for (std::size_t f = 0; f < candidates.size(); ++f) {
        std::vector<Rational> masses(product.size());
        for (std::size_t x = 0; x < events.size(); ++x) masses[x * candidates.size() + f] = second.row(f).mass(x);
        rows.emplace_back(product, std::move(masses));
    }
    const CoherentPair pair(projection, StochasticKernel(candidates, product, std::move(rows)), joint, first_marginal);
    return relative_entropy(pair);
}

PropernessAudit properness_audit(const FiniteSpace& space, std::size_t trials, std::uint64_t seed,
                                 const ScoringRule& rule) {
    if (trials == 0) throw DomainError("properness audit needs at least one trial");
    const ScoringRule score = rule ? rule : [](const FiniteDistribution& p, const FiniteDistribution& q) {
        return kl_score(p, q).value();
    };
    std::mt19937_64 rng(seed);
    PropernessAudit audit;
    audit.trials = trials;
    for (std::size_t t = 0; t < trials; ++t) {
        const auto p = grid_distribution(rng, space);
        const auto q = grid_distribution(rng, space);
        const double self = score(p, p);
        const double cross = score(p, q);
        auto flag = [&](std::string reason) { audit.violations.push_back({p, q, self, cross, std::move(reason)}); };
        if (self != 0.0) {
            flag("S(p, p) is not zero");
        } else if (!(cross >= self)) {
            flag("S(p, q) < S(p, p)");
        } else if (total_variation(p, q) > 1e-9 && !(cross > self)) {
            flag("S(p, q) = S(p, p) although q differs from p");
        }
    }
    return audit;
}

}  // namespace kernelflow
