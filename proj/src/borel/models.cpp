#include "kernelflow/borel_approx.hpp"
#include "kernelflow/errors.hpp"
#include "kernelflow/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace kernelflow::borel {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double normal_pdf(double x, double mu, double sigma) {
    const double z = (x - mu) / sigma;
    return std::exp(-0.5 * z * z) / (sigma * std::sqrt(2.0 * std::numbers::pi));
}

void require_positive(double v, const char* what) {
    if (!(v > 0.0) || !std::isfinite(v)) {
        throw DomainError(std::string(what) + " must be positive and finite");
    }
}

}  // namespace

DensityModel gaussian_pair(double mu1, double sigma1, double mu2, double sigma2) {
    require_positive(sigma1, "gaussian sigma1");
    require_positive(sigma2, "gaussian sigma2");
    DensityModel m;
    m.name = "gaussian";
    m.base_density = [=](double x) { return normal_pdf(x, mu2, sigma2); };
    m.ratio = [=](double x) {
        const double a = (x - mu1) / sigma1;
        const double b = (x - mu2) / sigma2;
        return (sigma2 / sigma1) * std::exp(0.5 * (b * b - a * a));
    };
    m.support = {-kInf, kInf};
    m.truncation = {std::min(mu1 - 10.0 * sigma1, mu2 - 10.0 * sigma2),
                    std::max(mu1 + 10.0 * sigma1, mu2 + 10.0 * sigma2)};
    m.sampler = [=](std::mt19937_64& rng) { return std::normal_distribution<double>(mu2, sigma2)(rng); };
    m.closed_form_kl = std::log(sigma2 / sigma1) +
                       (sigma1 * sigma1 + (mu1 - mu2) * (mu1 - mu2)) / (2.0 * sigma2 * sigma2) - 0.5;
    return m;
}

DensityModel exponential_pair(double rate1, double rate2) {
    require_positive(rate1, "exponential rate1");
    require_positive(rate2, "exponential rate2");
    DensityModel m;
    m.name = "exponential";
    m.base_density = [=](double x) { return x < 0.0 ? 0.0 : rate2 * std::exp(-rate2 * x); };
    m.ratio = [=](double x) { return x < 0.0 ? 0.0 : (rate1 / rate2) * std::exp((rate2 - rate1) * x); };
    m.support = {0.0, kInf};
    m.truncation = {0.0, 30.0 / std::min(rate1, rate2)};
    m.sampler = [=](std::mt19937_64& rng) { return std::exponential_distribution<double>(rate2)(rng); };
    m.closed_form_kl = std::log(rate1 / rate2) + rate2 / rate1 - 1.0;
    return m;
}

DensityModel uniform_pair(double a, double b, double c, double d) {
    if (!(c <= a && a < b && b <= d) || !std::isfinite(c) || !std::isfinite(d)) {
        throw DomainError("uniform-pair needs c <= a < b <= d (p on [a,b] absolutely continuous w.r.t. q on [c,d])");
    }
    DensityModel m;
    m.name = "uniform-pair";
    const double height = (d - c) / (b - a);
    m.base_density = [=](double x) { return (x >= c && x <= d) ? 1.0 / (d - c) : 0.0; };
    m.ratio = [=](double x) { return (x >= a && x < b) ? height : 0.0; };
    m.support = {c, d};
    m.truncation = {c, d};
    m.breakpoints = {a, b};
    m.sampler = [=](std::mt19937_64& rng) { return std::uniform_real_distribution<double>(c, d)(rng); };
    m.closed_form_kl = std::log(height);
    return m;
}

DensityModel piecewise_constant(std::vector<Piece> pieces) {
    if (pieces.empty()) throw DomainError("piecewise density needs at least one piece");
    double p_total = 0.0;
    double q_total = 0.0;
    double kl = 0.0;
    for (std::size_t i = 0; i < pieces.size(); ++i) {
        const Piece& piece = pieces[i];
        if (!(piece.lo < piece.hi) || !std::isfinite(piece.lo) || !std::isfinite(piece.hi)) {
            throw DomainError("piece " + std::to_string(i) + " is not a finite interval lo < hi");
        }
        if (i > 0 && piece.lo != pieces[i - 1].hi) {
            throw DomainError("piece " + std::to_string(i) + " does not start where the previous one ends");
        }
        if (piece.p_mass < 0.0 || piece.q_mass < 0.0) throw DomainError("negative piece mass");
        if (piece.p_mass > 0.0 && piece.q_mass == 0.0) {
            throw DomainError("piece " + std::to_string(i) + " has p mass but no q mass: p is not << q");
        }
        p_total += piece.p_mass;
        q_total += piece.q_mass;
        if (piece.p_mass > 0.0) kl += piece.p_mass * std::log(piece.p_mass / piece.q_mass);
    }
    if (std::abs(p_total - 1.0) > 1e-12 || std::abs(q_total - 1.0) > 1e-12) {
        throw DomainError("piece masses must sum to one for both p and q");
    }
    auto locate = [pieces](double x) -> const Piece* {
        auto it = std::upper_bound(pieces.begin(), pieces.end(), x,
                                   [](double v, const Piece& piece) { return v < piece.hi; });
        if (it == pieces.end() || x < it->lo) return nullptr;
        return &*it;
    };
    DensityModel m;
    m.name = "piecewise";
    m.base_density = [locate](double x) {
        const Piece* piece = locate(x);
        return piece ? piece->q_mass / (piece->hi - piece->lo) : 0.0;
    };
    m.ratio = [locate](double x) {
        const Piece* piece = locate(x);
        return (piece && piece->q_mass > 0.0) ? piece->p_mass / piece->q_mass : 0.0;
    };
    m.support = {pieces.front().lo, pieces.back().hi};
    m.truncation = m.support;
    for (const auto& piece : pieces) m.breakpoints.push_back(piece.lo);
    m.breakpoints.push_back(pieces.back().hi);
    m.sampler = [pieces](std::mt19937_64& rng) {
        std::vector<double> weights;
        for (const auto& piece : pieces) weights.push_back(piece.q_mass);
        const auto i = std::discrete_distribution<std::size_t>(weights.begin(), weights.end())(rng);
        return std::uniform_real_distribution<double>(pieces[i].lo, pieces[i].hi)(rng);
    };
    m.closed_form_kl = kl;
    return m;
}

DensityModel model_from_registry(const std::string& name, const std::vector<double>& params) {
    auto arity = [&](std::size_t n) {
        if (params.size() != n) {
            throw DomainError("model '" + name + "' takes " + std::to_string(n) + " parameters, got " +
                              std::to_string(params.size()));
        }
    };
    if (name == "gaussian") {
        arity(4);
        return gaussian_pair(params[0], params[1], params[2], params[3]);
    }
    if (name == "exponential") {
        arity(2);
        return exponential_pair(params[0], params[1]);
    }
    if (name == "uniform-pair") {
        arity(4);
        return uniform_pair(params[0], params[1], params[2], params[3]);
    }
    throw DomainError("unknown model '" + name + "' (expected gaussian, exponential or uniform-pair)");
}

ModelCheck validate_model(const DensityModel& model) {
    std::vector<double> cuts = model.breakpoints;
    cuts.push_back(model.truncation.lo);
    cuts.push_back(model.truncation.hi);
    const auto& q = model.base_density;
    const auto& r = model.ratio;
    auto p_density = [&](double x) {
        const double qx = q(x);
        return qx == 0.0 ? 0.0 : r(x) * qx;
    };
    const double q_total = quadrature::integrate(q, model.support.lo, model.support.hi, 1e-11, cuts).value;
    const double p_total = quadrature::integrate(p_density, model.support.lo, model.support.hi, 1e-11, cuts).value;
    if (std::abs(q_total - 1.0) > 1e-6) {
        throw DomainError("base density of model '" + model.name + "' integrates to " + std::to_string(q_total));
    }
    if (std::abs(p_total - 1.0) > 1e-6) {
        throw DomainError("ratio * base density of model '" + model.name + "' integrates to " +
                          std::to_string(p_total));
    }
    return {q_total, p_total};
}

}  // namespace kernelflow::borel
