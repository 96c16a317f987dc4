#pragma once

// KL divergence between two measures on the real line via dyadic level sets
// of the Radon-Nikodym derivative dp/dq.
//
// At level n the ratio range [0, inf) is cut into I_{n,k} = [k 2^-n, (k+1) 2^-n)
// for k = 0 .. n 2^n - 1 plus the tail I_{n,tail} = [n, inf). The level sets
// X_{n,k} = {x : dp/dq(x) in I_{n,k}} partition the line, and the finite
// relative entropy sum_k p(X_{n,k}) ln(p(X_{n,k}) / q(X_{n,k})) is a lower bound
// on KL(p || q) that is nondecreasing in n (level n+1 refines level n).

#include "kernelflow/distribution.hpp"
#include "kernelflow/extended_real.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace kernelflow::borel {

struct Interval {
    double lo;
    double hi;
};

using RealFunction = std::function<double(double)>;
using Sampler = std::function<double(std::mt19937_64&)>;

/// p << q on the real line, given by q's Lebesgue density and a fixed,
/// everywhere-finite version of dp/dq.
struct DensityModel {
    std::string name;
    RealFunction base_density;
    RealFunction ratio;
    Interval support;
    /// Finite window used by quadrature. Must capture at least 1 - 1e-10 of
    /// both p and q; the mass outside is folded into the boundary bins.
    Interval truncation;
    /// Points where the densities or the ratio may jump.
    std::vector<double> breakpoints;
    /// Draws from q; required by the Monte Carlo integrator.
    std::optional<Sampler> sampler;
    /// KL(p || q) when known in closed form (reference only).
    std::optional<double> closed_form_kl;
};

/// Gaussian p = N(mu1, sigma1^2) against q = N(mu2, sigma2^2).
DensityModel gaussian_pair(double mu1, double sigma1, double mu2, double sigma2);
/// Exponential p = Exp(rate1) against q = Exp(rate2).
DensityModel exponential_pair(double rate1, double rate2);
/// Uniform p on [a, b] against uniform q on [c, d]; requires [a, b] within [c, d].
DensityModel uniform_pair(double a, double b, double c, double d);

struct Piece {
    double lo;
    double hi;
    double p_mass;
    double q_mass;
};
/// Piecewise-constant densities on adjacent intervals; piece masses must each
/// sum to one and q_mass > 0 wherever p_mass > 0.
DensityModel piecewise_constant(std::vector<Piece> pieces);

/// Resolves `gaussian`, `exponential` and `uniform-pair` with their numeric
/// parameters. Throws DomainError for unknown names or a wrong arity.
DensityModel model_from_registry(const std::string& name, const std::vector<double>& params);

struct ModelCheck {
    double q_total;
    double p_total;
};
/// Integrates q and p over the full support; throws DomainError if either
/// total is off by more than 1e-6.
ModelCheck validate_model(const DensityModel& model);

enum class IntegratorKind { Quadrature, MonteCarlo };

struct IntegratorSpec {
    IntegratorKind kind = IntegratorKind::Quadrature;
    /// Quadrature: target for the summed per-bin error estimate.
    /// Monte Carlo: largest acceptable standard error of the total p mass.
    double tolerance = 1e-8;
    std::uint64_t samples = 1'000'000;
    std::uint64_t seed = 0;
    /// Worker threads; 0 means hardware concurrency. Never changes results.
    unsigned threads = 0;

    static IntegratorSpec quadrature(double tolerance = 1e-8) {
        return IntegratorSpec{IntegratorKind::Quadrature, tolerance, 0, 0, 0};
    }
    static IntegratorSpec monte_carlo(std::uint64_t samples, std::uint64_t seed, double tolerance = 1e-2) {
        return IntegratorSpec{IntegratorKind::MonteCarlo, tolerance, samples, seed, 0};
    }
};

struct BinMass {
    double p_mass = 0.0;
    double q_mass = 0.0;
    double p_error = 0.0;
    double q_error = 0.0;
};

/// The level-n partition with its p and q masses. Bin k < n 2^n is
/// I_{n,k}; the last bin is the tail [n, inf).
class PartitionLevel {
public:
    PartitionLevel(int n, std::vector<BinMass> bins, double truncated_p, double truncated_q, double error_estimate);

    [[nodiscard]] int level() const { return n_; }
    [[nodiscard]] std::size_t size() const { return bins_.size(); }
    [[nodiscard]] std::size_t tail_index() const { return bins_.size() - 1; }
    [[nodiscard]] const BinMass& bin(std::size_t k) const { return bins_.at(k); }
    [[nodiscard]] const std::vector<BinMass>& bins() const { return bins_; }

    /// Ratio interval [lower, upper) of bin k; the tail's upper bound is inf.
    [[nodiscard]] Interval ratio_interval(std::size_t k) const;
    /// Bin index of a ratio value at this level.
    [[nodiscard]] std::size_t bin_of(double ratio) const;

    [[nodiscard]] double total_p() const;
    [[nodiscard]] double total_q() const;
    /// Mass that fell outside the truncation window (folded into boundary bins).
    [[nodiscard]] double truncated_p() const { return truncated_p_; }
    [[nodiscard]] double truncated_q() const { return truncated_q_; }
    [[nodiscard]] double error_estimate() const { return error_estimate_; }

private:
    int n_;
    std::vector<BinMass> bins_;
    double truncated_p_;
    double truncated_q_;
    double error_estimate_;
};

/// Number of bins at level n, n 2^n + 1.
std::size_t bin_count(int n);
/// Bin of `ratio` at level n. Throws DomainError for negative or non-finite ratios.
std::size_t level_bin(int n, double ratio);

struct KlTraceLevel {
    int n;
    ExtendedNonNegReal kl;
    std::size_t bins;
    double error_estimate;
};

/// Raised when an integrator misses its tolerance. Carries the achieved error
/// estimate and, from estimate_kl, the levels completed before the failure.
class IntegrationError : public std::runtime_error {
public:
    IntegrationError(const std::string& what, double achieved) : std::runtime_error(what), achieved_(achieved) {}
    [[nodiscard]] double achieved_error() const { return achieved_; }

    std::vector<KlTraceLevel> partial_trace;

private:
    double achieved_;
};

PartitionLevel bin_masses(const DensityModel& model, int n, const IntegratorSpec& integrator);

/// sum over bins with p_mass > 0 of p_mass ln(p_mass / q_mass); +inf if such a
/// bin has q_mass = 0.
ExtendedNonNegReal discretized_kl(const PartitionLevel& level);

/// Merges a level-(n+1) partition into the level-n bins it refines.
PartitionLevel coarsen(const PartitionLevel& fine);

struct KlTrace {
    std::vector<KlTraceLevel> levels;
    bool converged = false;
    ExtendedNonNegReal final_value;
};

/// Runs levels 1..n_max, stopping early once two consecutive increments are
/// below stop_tol.
KlTrace estimate_kl(const DensityModel& model, int n_max, double stop_tol, const IntegratorSpec& integrator);

/// Re-integrates the simple function p_n* = p_mass / q_mass against q on each
/// level set (on an independent subdivision, or a fresh Monte Carlo stream)
/// and returns the largest |p_n(X_{n,k}) - p(X_{n,k})|.
double agreement_check(const DensityModel& model, const PartitionLevel& level, const IntegratorSpec& integrator);

/// Exact finite instance of the level-set construction: for p << q on a
/// finite space, p_n(x) = q(x) p(X_{n,k}) / q(X_{n,k}) on X_{n,k}.
struct FiniteLevelSetApproximation {
    FiniteDistribution approximant;
    /// Bin index of each point.
    std::vector<std::size_t> bin_of_point;
};
FiniteLevelSetApproximation level_set_approximation(const FiniteDistribution& p, const FiniteDistribution& q, int n);

}  // namespace kernelflow::borel
