#include "kernelflow/cli/commands.hpp"
#include "kernelflow/borel_approx.hpp"
#include "kernelflow/cli/documents.hpp"
#include "kernelflow/coherent_pair.hpp"
#include "kernelflow/entropy.hpp"
#include "kernelflow/errors.hpp"
#include "kernelflow/scoring.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace kernelflow::cli {

std::string format_number(double value) {
    if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
    char buffer[32];
    std::snprintf(buffer, sizeof buffer, "%.9g", value);
    return buffer;
}

namespace {

// Unreadable input is reported like a parse failure.
class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A failure of the request itself rather than of a document.
class SemanticError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError(path + ": cannot open file");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

std::string fmt(ExtendedNonNegReal v) { return format_number(v.value()); }

std::string mass(const Rational& r) { return r.to_string() + " (" + format_number(r.to_double()) + ")"; }

std::string yes_no(bool b) { return b ? "yes" : "no"; }

unsigned thread_setting(const Environment& env) {
    if (!env.threads || env.threads->empty()) return 0;
    const std::string& text = *env.threads;
    if (!std::all_of(text.begin(), text.end(), [](char c) { return c >= '0' && c <= '9'; }) || text.size() > 6) {
        throw InputError("KERNELFLOW_THREADS must be a non-negative integer, got '" + text + "'");
    }
    return static_cast<unsigned>(std::stoul(text));
}

void print_violations(std::ostream& out, const CoherenceReport& report) {
    for (const auto& v : report.violations) {
        if (v.kind == CoherenceViolation::Kind::MassOutsideFiber) {
            out << "violation: mass outside fiber at (y=" << v.y << ", x=" << v.x.value_or("?") << "): " << v.detail
                << '\n';
        } else {
            out << "violation: not measure preserving at y=" << v.y << ": " << v.detail << '\n';
        }
    }
}

CoherentPair load_pair(const std::string& path) { return parse_morphism(read_file(path), path).to_pair(); }

int cmd_validate(const std::string& path, std::ostream& out) {
    const auto pair = load_pair(path);
    const auto& report = pair.report();
    out << "coherent: " << yes_no(report.is_coherent)
        << ", absolutely coherent: " << (report.is_coherent ? yes_no(is_absolutely_coherent(pair)) : "n/a") << '\n';
    out << "fiber supported everywhere: " << yes_no(report.fiber_supported_everywhere) << '\n';
    if (report.is_coherent) out << "optimal hypothesis: " << yes_no(is_optimal(pair)) << '\n';
    print_violations(out, report);
    return report.is_coherent ? exit_code::ok : exit_code::semantic;
}

int cmd_re(const std::string& path, const std::string& second_path, std::ostream& out) {
    const auto first = load_pair(path);
    if (second_path.empty()) {
        const auto value = re_fin(first);
        out << "RE = " << fmt(value.value) << '\n';
        out << "absolutely coherent: " << yes_no(value.absolutely_coherent) << '\n';
        return exit_code::ok;
    }
    const auto second = load_pair(second_path);
    first.require_coherent("re");
    second.require_coherent("re");
    const auto check = check_functoriality(first, second);
    out << "RE(first) = " << fmt(check.first) << '\n';
    out << "RE(second) = " << fmt(check.second) << '\n';
    out << "RE(composite) = " << fmt(check.composite) << '\n';
    if (check.residual) {
        out << "residual = " << format_number(*check.residual) << '\n';
    } else {
        out << "residual = n/a (" << (check.infinite_agreement ? "both sides inf" : "sides disagree") << ")\n";
    }
    return check.holds(1e-10) ? exit_code::ok : exit_code::semantic;
}

int cmd_decompose(const std::string& path, std::ostream& out) {
    const auto pair = load_pair(path);
    const auto table = convex_decompose(pair);
    const auto re = relative_entropy(pair);
    out << "y, q(y), local RE\n";
    for (const auto& e : table.entries) {
        out << e.y << ", " << mass(e.weight) << ", " << (e.local ? fmt(*e.local) : "-") << '\n';
    }
    out << "total = " << fmt(table.total) << '\n';
    out << "RE = " << fmt(re) << '\n';
    if (table.total.is_finite() && re.is_finite()) {
        out << "|total - RE| = " << format_number(std::abs(table.total.value() - re.value())) << '\n';
    } else {
        out << "|total - RE| = n/a (total " << fmt(table.total) << ", RE " << fmt(re) << ")\n";
    }
    return exit_code::ok;
}

struct EstimateOptions {
    std::vector<std::string> model;
    std::string density;
    int n_max = 14;
    double stop_tol = 1e-4;
    std::string integrator = "quad";
    std::optional<std::uint64_t> seed;
    std::uint64_t samples = 1'000'000;
    double integrator_tol = -1.0;
    std::vector<double> truncate;
};

void print_trace(std::ostream& out, const std::vector<borel::KlTraceLevel>& levels) {
    out << "n, kl_n, bins, err_est\n";
    for (const auto& l : levels) {
        out << l.n << ", " << fmt(l.kl) << ", " << l.bins << ", " << format_number(l.error_estimate) << '\n';
    }
}

int cmd_estimate_kl(const EstimateOptions& o, const Environment& env, std::ostream& out, std::ostream& err) {
    borel::DensityModel model;
    std::string description;
    if (!o.density.empty()) {
        if (!o.model.empty()) throw InputError("give either a model name or --density, not both");
        const auto pieces = parse_density(read_file(o.density), o.density);
        model = borel::piecewise_constant(pieces);
        description = "piecewise, " + std::to_string(pieces.size()) + " pieces";
    } else {
        if (o.model.empty()) throw InputError("missing model name (gaussian, exponential, uniform-pair) or --density");
        std::vector<double> params;
        description = o.model.front();
        for (std::size_t i = 1; i < o.model.size(); ++i) {
            double v = 0.0;
            std::istringstream in(o.model[i]);
            if (!(in >> v) || !in.eof()) throw InputError("model parameter '" + o.model[i] + "' is not a number");
            params.push_back(v);
            description += ' ' + o.model[i];
        }
        model = borel::model_from_registry(o.model.front(), params);
    }
    if (!o.truncate.empty()) model.truncation = {o.truncate[0], o.truncate[1]};

    borel::IntegratorSpec spec;
    if (o.integrator == "quad") {
        spec = borel::IntegratorSpec::quadrature(o.integrator_tol > 0 ? o.integrator_tol : 1e-8);
    } else {
        if (!o.seed) throw InputError("--integrator mc requires --seed");
        spec = borel::IntegratorSpec::monte_carlo(o.samples, *o.seed, o.integrator_tol > 0 ? o.integrator_tol : 1e-2);
    }
    spec.threads = thread_setting(env);

    out << "model: " << description << '\n';
    out << "truncation: [" << format_number(model.truncation.lo) << ", " << format_number(model.truncation.hi) << "]\n";
    if (spec.kind == borel::IntegratorKind::Quadrature) {
        out << "integrator: quad (tolerance " << format_number(spec.tolerance) << ")\n";
    } else {
        out << "integrator: mc (samples " << spec.samples << ", seed " << spec.seed << ", tolerance "
            << format_number(spec.tolerance) << ")\n";
    }
    out << "stop: nmax " << o.n_max << ", tol " << format_number(o.stop_tol) << '\n';
    try {
        const auto trace = borel::estimate_kl(model, o.n_max, o.stop_tol, spec);
        print_trace(out, trace.levels);
        out << "final = " << fmt(trace.final_value) << '\n';
        if (model.closed_form_kl) out << "closed form = " << format_number(*model.closed_form_kl) << '\n';
        out << "converged: " << yes_no(trace.converged) << '\n';
        return trace.converged ? exit_code::ok : exit_code::semantic;
    } catch (const borel::IntegrationError& e) {
        print_trace(out, e.partial_trace);
        out << "integrator failed: achieved error " << format_number(e.achieved_error()) << '\n';
        err << "error: " << e.what() << '\n';
        return exit_code::tolerance;
    }
}

struct ScoreOptions {
    std::string log;
    std::string mode = "empirical";
    std::string truth;
    std::string json;
};

nlohmann::json json_number(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return v;
}

void require_outcomes(const ForecastLog& log, const std::string& path) {
    for (const auto& row : log.rows) {
        if (!log.outcomes.contains(row.label)) {
            throw ParseError(path, row.line, row.label_column,
                             "outcome '" + row.label + "' is not a declared point (" + log.outcomes.describe() + ")");
        }
    }
}

int score_empirical(const ForecastLog& log, const std::string& path, std::ostream& out, nlohmann::json& summary) {
    require_outcomes(log, path);
    std::vector<ForecastRecord> records;
    for (const auto& row : log.rows) records.push_back({row.round, row.forecaster, row.forecast, row.label});
    for (const auto& report : empirical_log_scores(records)) {
        out << "forecaster " << report.forecaster << '\n';
        nlohmann::json rounds = nlohmann::json::array();
        for (const auto& r : report.per_round) {
            out << "  round " << r.round << ": " << format_number(r.score) << '\n';
            rounds.push_back({{"round", r.round}, {"score", json_number(r.score)}});
        }
        out << "  total: " << format_number(report.total) << '\n';
        summary["forecasters"].push_back(
            {{"id", report.forecaster}, {"per_round", rounds}, {"total", json_number(report.total)}});
    }
    return exit_code::ok;
}

int score_sequential(const ForecastLog& log, const std::string& path, const std::string& truth_path,
                     std::ostream& out, nlohmann::json& summary) {
    require_outcomes(log, path);
    const auto truth = parse_distribution(read_file(truth_path), truth_path);
    if (!(truth.space() == log.outcomes)) {
        throw SemanticError("truth lives on " + truth.space().describe() + " but the log's outcomes are " +
                            log.outcomes.describe());
    }
    if (log.rows.empty()) throw SemanticError("sequential scoring needs at least one forecast");
    std::vector<const ForecastRow*> order;
    for (const auto& row : log.rows) order.push_back(&row);
    std::stable_sort(order.begin(), order.end(), [](auto* a, auto* b) { return a->round < b->round; });
    for (std::size_t i = 1; i < order.size(); ++i) {
        if (order[i]->round == order[i - 1]->round) {
            throw SemanticError("round " + std::to_string(order[i]->round) +
                                " has more than one forecast; sequential scoring needs one forecast per round");
        }
    }
    std::vector<FiniteDistribution> forecasts;
    for (const auto* row : order) forecasts.push_back(row->forecast);
    const auto increments = sequential_scores(truth, forecasts);

    std::map<std::string, double> totals;
    nlohmann::json rounds = nlohmann::json::array();
    for (std::size_t i = 0; i < order.size(); ++i) {
        const double s = kl_score(truth, forecasts[i]).value();
        out << "round " << order[i]->round << ' ' << order[i]->forecaster << ": S = " << format_number(s)
            << ", increment = " << format_number(increments[i]) << '\n';
        totals[order[i]->forecaster] += increments[i];
        rounds.push_back({{"round", order[i]->round},
                          {"forecaster", order[i]->forecaster},
                          {"score", json_number(s)},
                          {"increment", json_number(increments[i])}});
    }
    for (const auto& [id, total] : totals) {
        out << "forecaster " << id << " total: " << format_number(total) << '\n';
        summary["forecasters"].push_back({{"id", id}, {"total", json_number(total)}});
    }
    summary["rounds"] = rounds;
    double sum = 0.0;
    for (std::size_t i = 1; i < increments.size(); ++i) sum += increments[i];
    const double first = kl_score(truth, forecasts.front()).value();
    const double last = kl_score(truth, forecasts.back()).value();
    if (std::isfinite(sum) && std::isfinite(first) && std::isfinite(last)) {
        out << "telescoped: sum of increments 2..n = " << format_number(sum)
            << ", S(p,q_1) - S(p,q_n) = " << format_number(first - last)
            << ", difference = " << format_number(std::abs(sum - (first - last))) << '\n';
    } else {
        out << "telescoped: n/a (infinite scores)\n";
    }
    return exit_code::ok;
}

int score_conditional(const ForecastLog& log, const std::string& truth_path, std::ostream& out,
                      nlohmann::json& summary) {
    const auto doc = parse_morphism(read_file(truth_path), truth_path, true);
    if (!(doc.x == log.outcomes)) {
        throw SemanticError("the log's outcomes " + log.outcomes.describe() + " differ from X " + doc.x.describe());
    }
    std::map<std::string, std::map<std::size_t, FiniteDistribution>> by_forecaster;
    for (const auto& row : log.rows) {
        const auto y = doc.y.find(row.label);
        if (!y) throw SemanticError("round " + std::to_string(row.round) + ": scenario '" + row.label + "' is not in Y");
        if (!by_forecaster[row.forecaster].emplace(*y, row.forecast).second) {
            throw SemanticError("forecaster '" + row.forecaster + "' gives scenario '" + row.label + "' twice");
        }
    }
    int status = exit_code::ok;
    for (const auto& [id, rows] : by_forecaster) {
        out << "forecaster " << id << '\n';
        std::vector<FiniteDistribution> kernel_rows;
        for (std::size_t y = 0; y < doc.y.size(); ++y) {
            const auto it = rows.find(y);
            if (it == rows.end()) {
                throw SemanticError("forecaster '" + id + "' gives no forecast for scenario '" + doc.y.label(y) + "'");
            }
            kernel_rows.push_back(it->second);
        }
        MorphismDocument scored = doc;
        scored.s.emplace(doc.y, doc.x, std::move(kernel_rows));
        const auto pair = scored.to_pair();
        if (!pair.coherent()) {
            out << "  incoherent conditional forecasts\n";
            std::ostringstream lines;
            print_violations(lines, pair.report());
            std::string line;
            std::istringstream in(lines.str());
            while (std::getline(in, line)) out << "  " << line << '\n';
            status = exit_code::semantic;
            continue;
        }
        const auto table = conditional_score(pair);
        nlohmann::json scenarios = nlohmann::json::array();
        for (const auto& e : table.entries) {
            out << "  scenario " << e.y << ": q = " << mass(e.weight) << ", S = " << (e.local ? fmt(*e.local) : "-")
                << '\n';
            scenarios.push_back({{"y", e.y},
                                 {"q", e.weight.to_string()},
                                 {"score", e.local ? json_number(e.local->value()) : nlohmann::json(nullptr)}});
        }
        out << "  total: " << fmt(table.total) << '\n';
        summary["forecasters"].push_back(
            {{"id", id}, {"scenarios", scenarios}, {"total", json_number(table.total.value())}});
    }
    return status;
}

int cmd_score(const ScoreOptions& o, std::ostream& out) {
    const auto log = parse_forecast_log(read_file(o.log), o.log);
    nlohmann::json summary{{"mode", o.mode}, {"forecasters", nlohmann::json::array()}};
    if (o.mode != "empirical" && o.truth.empty()) throw InputError("--mode " + o.mode + " requires --truth");
    int status = exit_code::ok;
    if (o.mode == "empirical") {
        status = score_empirical(log, o.log, out, summary);
    } else if (o.mode == "sequential") {
        status = score_sequential(log, o.log, o.truth, out, summary);
    } else {
        status = score_conditional(log, o.truth, out, summary);
    }
    if (!o.json.empty()) {
        std::ofstream file(o.json, std::ios::binary);
        if (!file) throw InputError(o.json + ": cannot write summary");
        file << summary.dump(2) << '\n';
    }
    return status;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err, const Environment& env) {
    CLI::App app{"Relative entropy of finite statistical inference morphisms, KL estimation and forecast scoring",
                 "kernelflow"};
    app.require_subcommand(1);

    std::string path, second_path;
    auto* validate = app.add_subcommand("validate", "Check coherence of a morphism document");
    validate->add_option("path", path, "Morphism document")->required();

    auto* re = app.add_subcommand("re", "Relative entropy of one morphism, or functoriality of two composable ones");
    re->add_option("path", path, "Morphism document")->required();
    re->add_option("second", second_path, "Second morphism document, composed after the first");

    auto* decompose = app.add_subcommand("decompose", "Per-scenario local relative entropies");
    decompose->add_option("path", path, "Morphism document")->required();

    EstimateOptions estimate;
    auto* est = app.add_subcommand("estimate-kl", "KL between two densities via dyadic level sets");
    est->add_option("model", estimate.model, "Model name and parameters: gaussian mu1 s1 mu2 s2 | exponential r1 r2 | "
                                             "uniform-pair a b c d");
    est->add_option("--density", estimate.density, "Piecewise-constant density document");
    est->add_option("--nmax", estimate.n_max, "Deepest level")->check(CLI::Range(1, 24));
    est->add_option("--tol", estimate.stop_tol, "Stop after two consecutive increments below this")
        ->check(CLI::NonNegativeNumber);
    est->add_option("--integrator", estimate.integrator, "quad or mc")->check(CLI::IsMember({"quad", "mc"}));
    est->add_option("--seed", estimate.seed, "Monte Carlo seed");
    est->add_option("--samples", estimate.samples, "Monte Carlo sample count")->check(CLI::PositiveNumber);
    est->add_option("--integrator-tol", estimate.integrator_tol, "Integrator error target")->check(CLI::PositiveNumber);
    est->add_option("--truncate", estimate.truncate, "Quadrature window lo hi")->expected(2);

    ScoreOptions score;
    auto* sc = app.add_subcommand("score", "Score a forecast log");
    sc->add_option("log", score.log, "Forecast log document")->required();
    sc->add_option("--mode", score.mode, "empirical, sequential or conditional")
        ->check(CLI::IsMember({"empirical", "sequential", "conditional"}));
    sc->add_option("--truth", score.truth, "Truth: distribution document (sequential) or morphism document (conditional)");
    sc->add_option("--json", score.json, "Write a machine-readable summary here");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return exit_code::ok;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return exit_code::ok;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return exit_code::parse;
    }

    try {
        if (validate->parsed()) return cmd_validate(path, out);
        if (re->parsed()) return cmd_re(path, second_path, out);
        if (decompose->parsed()) return cmd_decompose(path, out);
        if (est->parsed()) return cmd_estimate_kl(estimate, env, out, err);
        return cmd_score(score, out);
    } catch (const ParseError& e) {
        err << "parse error: " << e.what() << '\n';
        return exit_code::parse;
    } catch (const InputError& e) {
        err << "error: " << e.what() << '\n';
        return exit_code::parse;
    } catch (const IndeterminateError& e) {
        err << "indeterminate: " << e.what() << '\n';
        return exit_code::indeterminate;
    } catch (const borel::IntegrationError& e) {
        err << "error: " << e.what() << '\n';
        return exit_code::tolerance;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return exit_code::semantic;
    }
}

}  // namespace kernelflow::cli
