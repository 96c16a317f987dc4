#include "kernelflow/borel_approx.hpp"
#include "kernelflow/errors.hpp"
#include "kernelflow/quadrature.hpp"
#include "kernelflow/detail/compensated_sum.hpp"

#include <gmpxx.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <map>
#include <thread>

namespace kernelflow::borel {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kMaxDepth = 96;
constexpr std::size_t kUnits = 64;
// Accuracy-driven splits allowed per work unit; past this the cell is accepted
// with its error estimate, which then shows up in the level's total.
constexpr std::size_t kCellBudget = 1 << 13;
constexpr std::size_t kAgreementUnits = 61;
constexpr std::uint64_t kChunk = 1 << 16;
constexpr double kTruncationLimit = 1e-10;

unsigned resolve_threads(unsigned requested) {
    if (requested != 0) return requested;
    return std::max(1u, std::thread::hardware_concurrency());
}

// Runs task(i) for i in [0, count). Tasks write to disjoint slots, so the
// outcome does not depend on how they are spread over threads.
template <typename Task>
void parallel_for(std::size_t count, unsigned threads, Task task) {
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, count));
    if (threads <= 1) {
        for (std::size_t i = 0; i < count; ++i) task(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::atomic<bool> failed{false};
    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= count || failed.load()) return;
            try {
                task(i);
            } catch (...) {
                if (!failed.exchange(true)) failure = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    pool.clear();
    if (failure) std::rethrow_exception(failure);
}

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

double p_density(const DensityModel& m, double x) {
    const double qx = m.base_density(x);
    return qx == 0.0 ? 0.0 : m.ratio(x) * qx;
}

struct Contribution {
    std::size_t bin;
    BinMass mass;
};

// Integrates q and r q over one cell, assigning mass to the bin of the ratio.
// Cells whose sampled ratios span several bins are split, at the crossing
// point when there is exactly one change of bin and at the midpoint otherwise.
class LevelSetIntegrator {
public:
    LevelSetIntegrator(const DensityModel& model, int n, double error_density)
        : model_(model), n_(n), error_density_(error_density) {}

    void run(double a, double b, std::vector<Contribution>& out) {
        out_ = &out;
        process(a, b, 0);
    }

private:
    static constexpr std::size_t kPoints = 17;

    struct Sample {
        double x;
        double q;
        double r;
        std::size_t bin;
    };

    Sample sample(double x) const {
        const double r = model_.ratio(x);
        if (!std::isfinite(r) || r < 0.0) {
            throw DomainError("ratio of model '" + model_.name + "' is not finite and non-negative at x = " +
                              std::to_string(x));
        }
        return {x, model_.base_density(x), r, level_bin(n_, r)};
    }

    std::size_t bin_at(double x) const { return sample(x).bin; }

    void emit(std::size_t bin, double p, double q, double p_err, double q_err) {
        out_->push_back({bin, {p, q, p_err, q_err}});
    }

    // Kronrod sums over the interior nodes; samples[1..15] are the nodes.
    void accept(const std::array<Sample, kPoints>& s, double half, double p_err, double q_err) {
        double kp = 0.0, kq = 0.0;
        for (std::size_t i = 0; i < 15; ++i) {
            kp += quadrature::GaussKronrod15::kronrod_weights[i] * s[i + 1].r * s[i + 1].q;
            kq += quadrature::GaussKronrod15::kronrod_weights[i] * s[i + 1].q;
        }
        emit(s[1].bin, kp * half, kq * half, p_err, q_err);
    }

    // Last resort for cells too narrow to split: each node's weight goes to its own bin.
    void distribute(const std::array<Sample, kPoints>& s, double half) {
        double mass = 0.0;
        for (std::size_t i = 0; i < 15; ++i) {
            const double w = quadrature::GaussKronrod15::kronrod_weights[i] * half;
            const double p = w * s[i + 1].r * s[i + 1].q;
            const double q = w * s[i + 1].q;
            emit(s[i + 1].bin, p, q, 0.0, 0.0);
            mass += p + q;
        }
        emit(s[1].bin, 0.0, 0.0, mass, mass);
    }

    void process(double a, double b, int depth) {
        const double mid = 0.5 * (a + b);
        const double half = 0.5 * (b - a);
        std::array<Sample, kPoints> s;
        s[0] = sample(a);
        for (std::size_t i = 0; i < 15; ++i) s[i + 1] = sample(mid + half * quadrature::GaussKronrod15::nodes[i]);
        s[16] = sample(b);

        bool interior_uniform = true;
        for (std::size_t i = 2; i <= 15; ++i) interior_uniform = interior_uniform && s[i].bin == s[1].bin;
        const bool uniform = interior_uniform && s[0].bin == s[1].bin && s[16].bin == s[1].bin;
        const bool narrow = mid <= a || mid >= b || depth >= kMaxDepth;

        if (uniform || (narrow && interior_uniform)) {
            double gp = 0.0, gq = 0.0, kp = 0.0, kq = 0.0;
            for (std::size_t i = 0; i < 15; ++i) {
                const double f = s[i + 1].r * s[i + 1].q;
                kp += quadrature::GaussKronrod15::kronrod_weights[i] * f;
                kq += quadrature::GaussKronrod15::kronrod_weights[i] * s[i + 1].q;
                gp += quadrature::GaussKronrod15::gauss_weights[i] * f;
                gq += quadrature::GaussKronrod15::gauss_weights[i] * s[i + 1].q;
            }
            const double p_err = std::abs(kp - gp) * half;
            const double q_err = std::abs(kq - gq) * half;
            if (p_err + q_err <= error_density_ * (b - a) || narrow || ++refinements_ > kCellBudget) {
                accept(s, half, p_err, q_err);
                return;
            }
            process(a, mid, depth + 1);
            process(mid, b, depth + 1);
            return;
        }
        if (narrow) {
            distribute(s, half);
            return;
        }

        std::size_t changes = 0, at = 0;
        for (std::size_t i = 0; i + 1 < kPoints; ++i) {
            if (s[i].bin != s[i + 1].bin) {
                ++changes;
                at = i;
            }
        }
        if (changes == 1) {
            if (const auto c = crossing(s[at], s[at + 1]); c && *c > a && *c < b) {
                process(a, *c, depth + 1);
                process(*c, b, depth + 1);
                return;
            }
            // The only change of bin sits on an endpoint, a set of measure zero.
            if (interior_uniform) {
                process_interior(s, a, b, half, depth);
                return;
            }
        }
        process(a, mid, depth + 1);
        process(mid, b, depth + 1);
    }

    void process_interior(const std::array<Sample, kPoints>& s, double a, double b, double half, int depth) {
        double gp = 0.0, gq = 0.0, kp = 0.0, kq = 0.0;
        for (std::size_t i = 0; i < 15; ++i) {
            const double f = s[i + 1].r * s[i + 1].q;
            kp += quadrature::GaussKronrod15::kronrod_weights[i] * f;
            kq += quadrature::GaussKronrod15::kronrod_weights[i] * s[i + 1].q;
            gp += quadrature::GaussKronrod15::gauss_weights[i] * f;
            gq += quadrature::GaussKronrod15::gauss_weights[i] * s[i + 1].q;
        }
        const double p_err = std::abs(kp - gp) * half;
        const double q_err = std::abs(kq - gq) * half;
        if (p_err + q_err <= error_density_ * (b - a) || ++refinements_ > kCellBudget) {
            accept(s, half, p_err, q_err);
            return;
        }
        const double mid = 0.5 * (a + b);
        process(a, mid, depth + 1);
        process(mid, b, depth + 1);
    }

    // Bisects on the ratio to the first point in the right-hand bin. Returns
    // nothing if a third bin shows up in between.
    std::optional<double> crossing(const Sample& left, const Sample& right) const {
        double lo = left.x, hi = right.x;
        for (;;) {
            const double m = 0.5 * (lo + hi);
            if (m <= lo || m >= hi) return hi;
            const std::size_t k = bin_at(m);
            if (k == left.bin) {
                lo = m;
            } else if (k == right.bin) {
                hi = m;
            } else {
                return std::nullopt;
            }
        }
    }

    const DensityModel& model_;
    int n_;
    double error_density_;
    std::vector<Contribution>* out_ = nullptr;
    std::size_t refinements_ = 0;
};

// Cuts the truncation window into a fixed number of cells, respecting breakpoints.
std::vector<Interval> work_units(const DensityModel& m, std::size_t target) {
    const double lo = m.truncation.lo, hi = m.truncation.hi;
    std::vector<double> cuts{lo, hi};
    for (double b : m.breakpoints) {
        if (b > lo && b < hi) cuts.push_back(b);
    }
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    const double width = hi - lo;
    std::vector<Interval> units;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        const double a = cuts[i], b = cuts[i + 1];
        const auto pieces = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(target * (b - a) / width)));
        for (std::size_t j = 0; j < pieces; ++j) {
            const double x0 = a + (b - a) * static_cast<double>(j) / static_cast<double>(pieces);
            const double x1 = j + 1 == pieces ? b : a + (b - a) * static_cast<double>(j + 1) / static_cast<double>(pieces);
            units.push_back({x0, x1});
        }
    }
    return units;
}

struct TruncatedTail {
    BinMass mass;
    std::size_t bin;
};

std::optional<TruncatedTail> tail_mass(const DensityModel& m, int n, double from, double to, double boundary) {
    if (!(from < to)) return std::nullopt;
    const auto q = quadrature::integrate(m.base_density, from, to, 1e-14, m.breakpoints);
    const auto p = quadrature::integrate([&](double x) { return p_density(m, x); }, from, to, 1e-14, m.breakpoints);
    return TruncatedTail{{p.value, q.value, p.error, q.error}, level_bin(n, m.ratio(boundary))};
}

void check_model_shape(const DensityModel& m) {
    if (!m.base_density || !m.ratio) throw DomainError("density model needs a base density and a ratio");
    const auto& t = m.truncation;
    if (!(t.lo < t.hi) || !std::isfinite(t.lo) || !std::isfinite(t.hi)) {
        throw DomainError("truncation window must be a finite interval lo < hi");
    }
    if (t.lo < m.support.lo || t.hi > m.support.hi) throw DomainError("truncation window leaves the support");
}

struct QuadratureRun {
    std::vector<BinMass> bins;
    double truncated_p = 0.0;
    double truncated_q = 0.0;
    double error = 0.0;
};

QuadratureRun quadrature_bins(const DensityModel& m, int n, const IntegratorSpec& spec, std::size_t units_target) {
    check_model_shape(m);
    if (!(spec.tolerance > 0.0)) throw DomainError("integrator tolerance must be positive");
    const auto units = work_units(m, units_target);
    const double width = m.truncation.hi - m.truncation.lo;
    const double error_density = 0.5 * spec.tolerance / width;

    std::vector<std::vector<Contribution>> partial(units.size());
    parallel_for(units.size(), resolve_threads(spec.threads), [&](std::size_t i) {
        LevelSetIntegrator(m, n, error_density).run(units[i].lo, units[i].hi, partial[i]);
    });

    QuadratureRun run;
    run.bins.assign(bin_count(n), BinMass{});
    for (const auto& unit : partial) {
        for (const auto& c : unit) {
            auto& b = run.bins[c.bin];
            b.p_mass += c.mass.p_mass;
            b.q_mass += c.mass.q_mass;
            b.p_error += c.mass.p_error;
            b.q_error += c.mass.q_error;
        }
    }
    for (const auto& tail : {tail_mass(m, n, m.support.lo, m.truncation.lo, m.truncation.lo),
                             tail_mass(m, n, m.truncation.hi, m.support.hi, m.truncation.hi)}) {
        if (!tail) continue;
        auto& b = run.bins[tail->bin];
        b.p_mass += tail->mass.p_mass;
        b.q_mass += tail->mass.q_mass;
        b.p_error += tail->mass.p_error + tail->mass.p_mass;
        b.q_error += tail->mass.q_error + tail->mass.q_mass;
        run.truncated_p += tail->mass.p_mass;
        run.truncated_q += tail->mass.q_mass;
    }
    if (run.truncated_p > kTruncationLimit || run.truncated_q > kTruncationLimit) {
        throw DomainError("truncation window of model '" + m.name + "' drops more than 1e-10 of the mass");
    }
    detail::CompensatedSum err;
    for (const auto& b : run.bins) err.add(b.p_error + b.q_error);
    run.error = err.value();
    return run;
}

// Draws ratio values r(X) with X ~ q. Chunk c uses its own generator seeded
// from (seed, c), so the draws do not depend on the thread count.
std::vector<double> draw_ratios(const DensityModel& m, const IntegratorSpec& spec, std::uint64_t salt) {
    if (!m.sampler) throw DomainError("model '" + m.name + "' has no sampler for Monte Carlo integration");
    if (spec.samples == 0) throw DomainError("Monte Carlo needs at least one sample");
    std::vector<double> ratios(spec.samples);
    const std::size_t chunks = (spec.samples + kChunk - 1) / kChunk;
    parallel_for(chunks, resolve_threads(spec.threads), [&](std::size_t c) {
        std::mt19937_64 rng(splitmix64(spec.seed ^ splitmix64(salt + c)));
        const std::uint64_t end = std::min<std::uint64_t>(spec.samples, (c + 1) * kChunk);
        for (std::uint64_t i = c * kChunk; i < end; ++i) ratios[i] = m.ratio((*m.sampler)(rng));
    });
    return ratios;
}

struct MonteCarloRun {
    std::vector<BinMass> bins;
    double standard_error;
};

MonteCarloRun monte_carlo_bins(const DensityModel& m, int n, const IntegratorSpec& spec, std::uint64_t salt) {
    const auto ratios = draw_ratios(m, spec, salt);
    const double count = static_cast<double>(ratios.size());
    std::vector<BinMass> bins(bin_count(n));
    std::vector<double> second(bins.size(), 0.0);
    detail::CompensatedSum sum, sum_sq;
    for (double r : ratios) {
        const auto k = level_bin(n, r);
        bins[k].p_mass += r;
        bins[k].q_mass += 1.0;
        second[k] += r * r;
        sum.add(r);
        sum_sq.add(r * r);
    }
    for (std::size_t k = 0; k < bins.size(); ++k) {
        auto& b = bins[k];
        const double mean = b.p_mass / count;
        const double freq = b.q_mass / count;
        b.p_error = std::sqrt(std::max(0.0, second[k] / count - mean * mean) / count);
        b.q_error = std::sqrt(freq * (1.0 - freq) / count);
        b.p_mass = mean;
        b.q_mass = freq;
    }
    const double mean = sum.value() / count;
    const double variance = std::max(0.0, sum_sq.value() / count - mean * mean);
    return {std::move(bins), std::sqrt(variance / count)};
}

}  // namespace

PartitionLevel::PartitionLevel(int n, std::vector<BinMass> bins, double truncated_p, double truncated_q,
                               double error_estimate)
    : n_(n), bins_(std::move(bins)), truncated_p_(truncated_p), truncated_q_(truncated_q),
      error_estimate_(error_estimate) {
    if (n < 0) throw DomainError("level must be non-negative");
    if (bins_.size() != bin_count(n)) throw DomainError("level " + std::to_string(n) + " needs n 2^n + 1 bins");
}

Interval PartitionLevel::ratio_interval(std::size_t k) const {
    if (k >= bins_.size()) throw DomainError("bin index out of range");
    if (k == tail_index()) return {static_cast<double>(n_), kInf};
    const double width = std::ldexp(1.0, -n_);
    return {static_cast<double>(k) * width, static_cast<double>(k + 1) * width};
}

std::size_t PartitionLevel::bin_of(double ratio) const { return level_bin(n_, ratio); }

double PartitionLevel::total_p() const {
    detail::CompensatedSum s;
    for (const auto& b : bins_) s.add(b.p_mass);
    return s.value();
}

double PartitionLevel::total_q() const {
    detail::CompensatedSum s;
    for (const auto& b : bins_) s.add(b.q_mass);
    return s.value();
}

std::size_t bin_count(int n) {
    if (n < 0 || n > 40) throw DomainError("level must lie in 0..40");
    return static_cast<std::size_t>(n) * (std::size_t{1} << n) + 1;
}

std::size_t level_bin(int n, double ratio) {
    if (!std::isfinite(ratio) || ratio < 0.0) throw DomainError("ratio must be finite and non-negative");
    const std::size_t tail = bin_count(n) - 1;
    if (ratio >= static_cast<double>(n)) return tail;
    // Scaling by a power of two is exact, so floor() matches the interval test.
    return std::min(tail - 1, static_cast<std::size_t>(std::floor(std::ldexp(ratio, n))));
}

PartitionLevel bin_masses(const DensityModel& model, int n, const IntegratorSpec& integrator) {
    if (n < 1) throw DomainError("levels start at n = 1");
    if (integrator.kind == IntegratorKind::Quadrature) {
        auto run = quadrature_bins(model, n, integrator, kUnits);
        if (run.error > integrator.tolerance) {
            throw IntegrationError("quadrature error estimate " + std::to_string(run.error) + " exceeds tolerance " +
                                       std::to_string(integrator.tolerance) + " at level " + std::to_string(n),
                                   run.error);
        }
        return {n, std::move(run.bins), run.truncated_p, run.truncated_q, run.error};
    }
    auto run = monte_carlo_bins(model, n, integrator, 0);
    if (run.standard_error > integrator.tolerance) {
        throw IntegrationError("Monte Carlo standard error " + std::to_string(run.standard_error) +
                                   " exceeds tolerance " + std::to_string(integrator.tolerance),
                               run.standard_error);
    }
    return {n, std::move(run.bins), 0.0, 0.0, run.standard_error};
}

ExtendedNonNegReal discretized_kl(const PartitionLevel& level) {
    detail::CompensatedSum sum;
    for (const auto& b : level.bins()) {
        if (b.p_mass <= 0.0) continue;
        if (b.q_mass <= 0.0) return ExtendedNonNegReal::infinity();
        sum.add(b.p_mass * std::log(b.p_mass / b.q_mass));
    }
    // A lower bound on a divergence; rounding can leave it a hair below zero.
    return ExtendedNonNegReal(std::max(0.0, sum.value()));
}

PartitionLevel coarsen(const PartitionLevel& fine) {
    const int n = fine.level() - 1;
    if (n < 1) throw DomainError("cannot coarsen below level 1");
    std::vector<BinMass> bins(bin_count(n));
    const std::size_t tail = bins.size() - 1;
    for (std::size_t j = 0; j < fine.size(); ++j) {
        const std::size_t k = j == fine.tail_index() ? tail : std::min(tail, j / 2);
        const auto& b = fine.bin(j);
        bins[k].p_mass += b.p_mass;
        bins[k].q_mass += b.q_mass;
        bins[k].p_error += b.p_error;
        bins[k].q_error += b.q_error;
    }
    return {n, std::move(bins), fine.truncated_p(), fine.truncated_q(), fine.error_estimate()};
}

KlTrace estimate_kl(const DensityModel& model, int n_max, double stop_tol, const IntegratorSpec& integrator) {
    if (n_max < 1 || n_max > 24) throw DomainError("n_max must lie in 1..24");
    if (!(stop_tol >= 0.0)) throw DomainError("stop tolerance must be non-negative");
    KlTrace trace;
    int small_steps = 0;
    for (int n = 1; n <= n_max; ++n) {
        std::optional<PartitionLevel> level;
        try {
            level.emplace(bin_masses(model, n, integrator));
        } catch (IntegrationError& e) {
            e.partial_trace = trace.levels;
            throw;
        }
        const auto kl = discretized_kl(*level);
        if (!trace.levels.empty()) {
            const auto& prev = trace.levels.back().kl;
            const bool small = prev.is_finite() && kl.is_finite() && std::abs(kl.value() - prev.value()) < stop_tol;
            small_steps = small ? small_steps + 1 : 0;
        }
        trace.levels.push_back({n, kl, level->size(), level->error_estimate()});
        if (small_steps >= 2) {
            trace.converged = true;
            break;
        }
    }
    trace.final_value = trace.levels.back().kl;
    return trace;
}

double agreement_check(const DensityModel& model, const PartitionLevel& level, const IntegratorSpec& integrator) {
    std::vector<BinMass> again;
    if (integrator.kind == IntegratorKind::Quadrature) {
        again = quadrature_bins(model, level.level(), integrator, kAgreementUnits).bins;
    } else {
        again = monte_carlo_bins(model, level.level(), integrator, 0x5eed5eedULL).bins;
    }
    double worst = 0.0;
    for (std::size_t k = 0; k < level.size(); ++k) {
        const auto& b = level.bin(k);
        if (b.q_mass <= 0.0) {
            if (b.p_mass > 0.0) return kInf;
            continue;
        }
        const double simple = b.p_mass / b.q_mass * again[k].q_mass;
        worst = std::max(worst, std::abs(simple - b.p_mass));
    }
    return worst;
}

FiniteLevelSetApproximation level_set_approximation(const FiniteDistribution& p, const FiniteDistribution& q, int n) {
    if (p.space() != q.space()) throw DomainError("p and q must live on the same space");
    if (!p.absolutely_continuous_wrt(q)) throw DomainError("level sets need p << q");
    const std::size_t tail = bin_count(n) - 1;
    const std::size_t size = p.space().size();
    std::vector<std::size_t> bin_of_point(size);
    for (std::size_t i = 0; i < size; ++i) {
        if (q.mass(i).is_zero()) {
            bin_of_point[i] = 0;
            continue;
        }
        const Rational ratio = p.mass(i) / q.mass(i);
        if (ratio >= Rational(n)) {
            bin_of_point[i] = tail;
            continue;
        }
        mpq_class scaled = ratio.raw();
        scaled *= mpq_class(mpz_class(1) << n);
        mpz_class k;
        mpz_fdiv_q(k.get_mpz_t(), scaled.get_num_mpz_t(), scaled.get_den_mpz_t());
        bin_of_point[i] = static_cast<std::size_t>(k.get_ui());
    }
    std::map<std::size_t, Rational> p_bin, q_bin;
    for (std::size_t i = 0; i < size; ++i) {
        p_bin[bin_of_point[i]] += p.mass(i);
        q_bin[bin_of_point[i]] += q.mass(i);
    }
    std::vector<Rational> masses(size);
    for (std::size_t i = 0; i < size; ++i) {
        const auto k = bin_of_point[i];
        if (!q.mass(i).is_zero()) masses[i] = q.mass(i) * p_bin[k] / q_bin[k];
    }
    return {FiniteDistribution(p.space(), std::move(masses)), std::move(bin_of_point)};
}

}  // namespace kernelflow::borel
