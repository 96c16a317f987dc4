#include "kernelflow/cli/documents.hpp"
#include "kernelflow/errors.hpp"
#include "kernelflow/monad.hpp"

#include <charconv>
#include <map>
#include <set>

namespace kernelflow::cli {

ParseError::ParseError(const std::string& source, std::size_t line, std::size_t column, const std::string& message)
    : std::runtime_error(source + ":" + std::to_string(line) + ":" + std::to_string(column) + ": " + message),
      line_(line), column_(column) {}

namespace {

struct Token {
    std::string_view text;
    std::size_t column;
};

struct Line {
    std::size_t number;
    std::vector<Token> tokens;
};

class Reader {
public:
    Reader(std::string_view text, std::string source) : source_(std::move(source)) {
        std::size_t number = 0;
        while (!text.empty()) {
            ++number;
            const auto end = text.find('\n');
            std::string_view raw = text.substr(0, end);
            text = end == std::string_view::npos ? std::string_view{} : text.substr(end + 1);
            if (const auto hash = raw.find('#'); hash != std::string_view::npos) raw = raw.substr(0, hash);
            Line line{number, {}};
            std::size_t i = 0;
            while (i < raw.size()) {
                while (i < raw.size() && is_space(raw[i])) ++i;
                const std::size_t start = i;
                while (i < raw.size() && !is_space(raw[i])) ++i;
                if (i > start) line.tokens.push_back({raw.substr(start, i - start), start + 1});
            }
            if (!line.tokens.empty()) lines_.push_back(std::move(line));
        }
        end_line_ = number + 1;
    }

    [[nodiscard]] const std::vector<Line>& lines() const { return lines_; }

    [[noreturn]] void fail(const Token& at, std::size_t line, const std::string& message) const {
        throw ParseError(source_, line, at.column, message);
    }
    [[noreturn]] void fail(std::size_t line, std::size_t column, const std::string& message) const {
        throw ParseError(source_, line, column, message);
    }
    [[noreturn]] void fail_at_end(const std::string& message) const { fail(end_line_, 1, message); }

    void expect_header(std::string_view kind) const {
        if (lines_.empty()) fail_at_end("empty document, expected 'kernelflow " + std::string(kind) + " 1'");
        const Line& first = lines_.front();
        const auto& t = first.tokens;
        if (t.size() != 3 || t[0].text != "kernelflow" || t[1].text != kind || t[2].text != "1") {
            fail(t[0], first.number, "expected header 'kernelflow " + std::string(kind) + " 1'");
        }
    }

    Rational fraction(const Token& t, std::size_t line, bool allow_negative = false) const {
        Rational value;
        try {
            value = Rational::parse(t.text);
        } catch (const DomainError&) {
            fail(t, line, "'" + std::string(t.text) + "' is not an exact fraction");
        }
        if (!allow_negative && value.is_negative()) fail(t, line, "negative mass '" + std::string(t.text) + "'");
        return value;
    }

    std::size_t point(const FiniteSpace& space, std::string_view label, const Token& t, std::size_t line) const {
        const auto index = space.find(label);
        if (!index) fail(t, line, "unknown point '" + std::string(label) + "' (declared: " + space.describe() + ")");
        return *index;
    }

    /// `label:value` entries starting at token `from`.
    template <typename OnEntry>
    void entries(const Line& line, std::size_t from, OnEntry on_entry) const {
        for (std::size_t i = from; i < line.tokens.size(); ++i) {
            const Token& t = line.tokens[i];
            const auto colon = t.text.find(':');
            if (colon == std::string_view::npos || colon == 0 || colon + 1 == t.text.size()) {
                fail(t, line.number, "expected 'label:value', got '" + std::string(t.text) + "'");
            }
            on_entry(t.text.substr(0, colon), Token{t.text.substr(colon + 1), t.column + colon + 1}, t);
        }
    }

    FiniteDistribution masses(const Line& line, std::size_t from, const FiniteSpace& space,
                              const std::string& what) const {
        std::vector<Rational> values(space.size());
        std::vector<bool> seen(space.size(), false);
        entries(line, from, [&](std::string_view label, const Token& value, const Token& whole) {
            const auto i = point(space, label, whole, line.number);
            if (seen[i]) fail(whole, line.number, "point '" + std::string(label) + "' listed twice in " + what);
            seen[i] = true;
            values[i] = fraction(value, line.number);
        });
        Rational total;
        for (const auto& v : values) total += v;
        if (!total.is_one()) {
            fail(line.tokens.front(), line.number, what + " masses sum to " + total.to_string() + ", expected 1");
        }
        return FiniteDistribution(space, std::move(values));
    }

    void expect_equals(const Line& line, std::size_t index) const {
        if (line.tokens.size() <= index || line.tokens[index].text != "=") {
            const Token& at = line.tokens.size() > index ? line.tokens[index] : line.tokens.back();
            fail(at, line.number, "expected '='");
        }
    }

    FiniteSpace space(const Line& line) const {
        expect_equals(line, 2);
        if (line.tokens.size() < 4) fail(line.tokens[2], line.number, "a space needs at least one point");
        std::vector<std::string> labels;
        std::set<std::string_view> seen;
        for (std::size_t i = 3; i < line.tokens.size(); ++i) {
            const Token& t = line.tokens[i];
            if (t.text.find_first_of(":[]=|") != std::string_view::npos) {
                fail(t, line.number, "point label '" + std::string(t.text) + "' contains a reserved character");
            }
            if (!seen.insert(t.text).second) fail(t, line.number, "duplicate point '" + std::string(t.text) + "'");
            labels.emplace_back(t.text);
        }
        return FiniteSpace(std::move(labels));
    }

private:
    static bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r'; }

    std::string source_;
    std::vector<Line> lines_;
    std::size_t end_line_ = 1;
};

std::string mass_list(const FiniteDistribution& d) {
    std::string out;
    for (std::size_t i = 0; i < d.space().size(); ++i) {
        out += ' ' + d.space().label(i) + ':' + d.mass(i).to_string();
    }
    return out;
}

std::string space_line(const std::string& name, const FiniteSpace& s) {
    std::string out = "space " + name + " =";
    for (const auto& label : s.labels()) out += ' ' + label;
    return out + '\n';
}

}  // namespace

CoherentPair MorphismDocument::to_pair() const {
    if (!s) throw DomainError("document has no hypothesis kernel s");
    return q ? CoherentPair(f, *s, p, *q) : CoherentPair(f, *s, p);
}

MorphismDocument parse_morphism(std::string_view text, const std::string& source, bool kernel_optional) {
    const Reader r(text, source);
    r.expect_header("morphism");
    std::optional<FiniteSpace> x, y;
    std::optional<FiniteDistribution> p, q;
    std::optional<PointMap> f;
    std::map<std::size_t, FiniteDistribution> rows;

    for (std::size_t li = 1; li < r.lines().size(); ++li) {
        const Line& line = r.lines()[li];
        const Token& key = line.tokens.front();
        auto need = [&](bool ok, const std::string& what) {
            if (!ok) r.fail(key, line.number, what + " must be declared first");
        };
        if (key.text == "space") {
            if (line.tokens.size() < 2) r.fail(key, line.number, "expected 'space X = ...' or 'space Y = ...'");
            const Token& name = line.tokens[1];
            auto& slot = name.text == "X" ? x : name.text == "Y" ? y : x;
            if (name.text != "X" && name.text != "Y") r.fail(name, line.number, "space name must be X or Y");
            if (slot) r.fail(name, line.number, "space " + std::string(name.text) + " declared twice");
            slot = r.space(line);
        } else if (key.text == "p") {
            need(x.has_value(), "space X");
            if (p) r.fail(key, line.number, "p given twice");
            r.expect_equals(line, 1);
            p = r.masses(line, 2, *x, "p");
        } else if (key.text == "q") {
            need(y.has_value(), "space Y");
            if (q) r.fail(key, line.number, "q given twice");
            r.expect_equals(line, 1);
            q = r.masses(line, 2, *y, "q");
        } else if (key.text == "f") {
            need(x && y, "spaces X and Y");
            if (f) r.fail(key, line.number, "f given twice");
            r.expect_equals(line, 1);
            std::vector<std::optional<std::size_t>> image(x->size());
            r.entries(line, 2, [&](std::string_view from, const Token& to, const Token& whole) {
                const auto i = r.point(*x, from, whole, line.number);
                if (image[i]) r.fail(whole, line.number, "f maps '" + std::string(from) + "' twice");
                image[i] = r.point(*y, to.text, to, line.number);
            });
            std::vector<std::size_t> resolved;
            for (std::size_t i = 0; i < image.size(); ++i) {
                if (!image[i]) r.fail(key, line.number, "f does not map point '" + x->label(i) + "'");
                resolved.push_back(*image[i]);
            }
            f.emplace(*x, *y, std::move(resolved));
        } else if (key.text.starts_with("s[") && key.text.ends_with("]")) {
            need(x && y, "spaces X and Y");
            const auto label = key.text.substr(2, key.text.size() - 3);
            const Token label_token{label, key.column + 2};
            const auto yi = r.point(*y, label, label_token, line.number);
            if (rows.contains(yi)) r.fail(key, line.number, "row s[" + std::string(label) + "] given twice");
            r.expect_equals(line, 1);
            rows.emplace(yi, r.masses(line, 2, *x, "s[" + std::string(label) + "]"));
        } else {
            r.fail(key, line.number, "unknown key '" + std::string(key.text) + "'");
        }
    }

    if (!x) r.fail_at_end("missing 'space X'");
    if (!y) r.fail_at_end("missing 'space Y'");
    if (!p) r.fail_at_end("missing 'p'");
    if (!f) r.fail_at_end("missing 'f'");
    std::optional<StochasticKernel> s;
    if (!rows.empty() || !kernel_optional) {
        std::vector<FiniteDistribution> ordered;
        for (std::size_t i = 0; i < y->size(); ++i) {
            const auto it = rows.find(i);
            if (it == rows.end()) r.fail_at_end("missing row 's[" + y->label(i) + "]'");
            ordered.push_back(it->second);
        }
        s.emplace(*y, *x, std::move(ordered));
    }
    return MorphismDocument{*x, *y, *p, *f, s, q};
}

std::string serialize_morphism(const MorphismDocument& doc) {
    std::string out = "kernelflow morphism 1\n";
    out += space_line("X", doc.x);
    out += space_line("Y", doc.y);
    out += "p =" + mass_list(doc.p) + '\n';
    out += "f =";
    for (std::size_t i = 0; i < doc.x.size(); ++i) out += ' ' + doc.x.label(i) + ':' + doc.y.label(doc.f(i));
    out += '\n';
    if (doc.s) {
        for (std::size_t i = 0; i < doc.y.size(); ++i) {
            out += "s[" + doc.y.label(i) + "] =" + mass_list(doc.s->row(i)) + '\n';
        }
    }
    out += "q =" + mass_list(doc.q ? *doc.q : pushforward(doc.p, doc.f)) + '\n';
    return out;
}

FiniteDistribution parse_distribution(std::string_view text, const std::string& source) {
    const Reader r(text, source);
    r.expect_header("distribution");
    std::optional<FiniteSpace> x;
    std::optional<FiniteDistribution> p;
    for (std::size_t li = 1; li < r.lines().size(); ++li) {
        const Line& line = r.lines()[li];
        const Token& key = line.tokens.front();
        if (key.text == "space") {
            if (x) r.fail(key, line.number, "space declared twice");
            if (line.tokens.size() < 2 || line.tokens[1].text != "X") r.fail(key, line.number, "expected 'space X = ...'");
            x = r.space(line);
        } else if (key.text == "p") {
            if (!x) r.fail(key, line.number, "space X must be declared first");
            if (p) r.fail(key, line.number, "p given twice");
            r.expect_equals(line, 1);
            p = r.masses(line, 2, *x, "p");
        } else {
            r.fail(key, line.number, "unknown key '" + std::string(key.text) + "'");
        }
    }
    if (!x) r.fail_at_end("missing 'space X'");
    if (!p) r.fail_at_end("missing 'p'");
    return *p;
}

std::string serialize_distribution(const FiniteDistribution& p) {
    return "kernelflow distribution 1\n" + space_line("X", p.space()) + "p =" + mass_list(p) + '\n';
}

ForecastLog parse_forecast_log(std::string_view text, const std::string& source) {
    const Reader r(text, source);
    r.expect_header("forecasts");
    if (r.lines().size() < 2) r.fail_at_end("missing 'outcomes' line");
    const Line& header = r.lines()[1];
    if (header.tokens.front().text != "outcomes" || header.tokens.size() < 2) {
        r.fail(header.tokens.front(), header.number, "expected 'outcomes a b ...'");
    }
    std::vector<std::string> labels;
    std::set<std::string_view> seen;
    for (std::size_t i = 1; i < header.tokens.size(); ++i) {
        const Token& t = header.tokens[i];
        if (!seen.insert(t.text).second) r.fail(t, header.number, "duplicate outcome '" + std::string(t.text) + "'");
        labels.emplace_back(t.text);
    }
    ForecastLog log{FiniteSpace(std::move(labels)), {}};
    const std::size_t width = 3 + log.outcomes.size();
    std::set<std::pair<long, std::string_view>> keys;
    for (std::size_t li = 2; li < r.lines().size(); ++li) {
        const Line& line = r.lines()[li];
        if (line.tokens.size() != width) {
            const Token& at = line.tokens.size() > width ? line.tokens[width] : line.tokens.back();
            r.fail(at, line.number, "expected " + std::to_string(width) + " columns (round forecaster label and " +
                                        std::to_string(log.outcomes.size()) + " masses), got " +
                                        std::to_string(line.tokens.size()));
        }
        const Token& round_token = line.tokens[0];
        long round = 0;
        const auto [end, ec] = std::from_chars(round_token.text.data(), round_token.text.data() + round_token.text.size(), round);
        if (ec != std::errc{} || end != round_token.text.data() + round_token.text.size()) {
            r.fail(round_token, line.number, "round must be an integer, got '" + std::string(round_token.text) + "'");
        }
        if (!keys.insert({round, line.tokens[1].text}).second) {
            r.fail(round_token, line.number, "round " + std::to_string(round) + " repeats for forecaster '" +
                                                 std::string(line.tokens[1].text) + "'");
        }
        std::vector<Rational> masses;
        Rational total;
        for (std::size_t i = 3; i < width; ++i) {
            masses.push_back(r.fraction(line.tokens[i], line.number));
            total += masses.back();
        }
        if (!total.is_one()) r.fail(line.tokens[3], line.number, "forecast sums to " + total.to_string() + ", expected 1");
        log.rows.push_back({round, std::string(line.tokens[1].text), std::string(line.tokens[2].text),
                            FiniteDistribution(log.outcomes, std::move(masses)), line.number,
                            line.tokens[2].column});
    }
    return log;
}

std::vector<borel::Piece> parse_density(std::string_view text, const std::string& source) {
    const Reader r(text, source);
    r.expect_header("density");
    std::vector<borel::Piece> pieces;
    Rational p_total, q_total;
    std::optional<Rational> previous_hi;
    for (std::size_t li = 1; li < r.lines().size(); ++li) {
        const Line& line = r.lines()[li];
        const auto& t = line.tokens;
        if (t.front().text != "piece") r.fail(t.front(), line.number, "expected 'piece lo hi p_mass q_mass'");
        if (t.size() != 5) r.fail(t.back(), line.number, "expected 'piece lo hi p_mass q_mass'");
        const Rational lo = r.fraction(t[1], line.number, true);
        const Rational hi = r.fraction(t[2], line.number, true);
        const Rational p = r.fraction(t[3], line.number);
        const Rational q = r.fraction(t[4], line.number);
        if (!(lo < hi)) r.fail(t[2], line.number, "piece needs lo < hi");
        if (previous_hi && lo != *previous_hi) r.fail(t[1], line.number, "piece does not start where the previous one ends");
        if (p.is_positive() && q.is_zero()) r.fail(t[4], line.number, "p mass on a piece with no q mass: p is not << q");
        previous_hi = hi;
        p_total += p;
        q_total += q;
        pieces.push_back({lo.to_double(), hi.to_double(), p.to_double(), q.to_double()});
    }
    if (pieces.empty()) r.fail_at_end("no pieces");
    if (!p_total.is_one() || !q_total.is_one()) {
        r.fail_at_end("piece masses sum to p " + p_total.to_string() + ", q " + q_total.to_string() + ", expected 1 and 1");
    }
    return pieces;
}

}  // namespace kernelflow::cli
