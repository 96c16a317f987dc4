#pragma once

// Line-oriented text documents with exact fractions. Blank lines and text
// after '#' are ignored. Every document opens with `kernelflow <kind> 1`.
//
//   kernelflow morphism 1
//   space X = HH HT TH TT
//   space Y = H T
//   p = HH:1/4 HT:1/4 TH:1/4 TT:1/4
//   f = HH:H HT:H TH:T TT:T
//   s[H] = HH:2/3 HT:1/3
//   s[T] = TH:1/3 TT:2/3
//   q = H:1/2 T:1/2              (optional, cross-checked)
//
// Points left out of a mass list have mass 0. The canonical form, produced
// by serialize_morphism, lists every point in declaration order.

#include "kernelflow/borel_approx.hpp"
#include "kernelflow/coherent_pair.hpp"
#include "kernelflow/distribution.hpp"
#include "kernelflow/kernel.hpp"

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace kernelflow::cli {

/// A malformed document. what() reads "source:line:column: message".
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& source, std::size_t line, std::size_t column, const std::string& message);
    [[nodiscard]] std::size_t line() const { return line_; }
    [[nodiscard]] std::size_t column() const { return column_; }

private:
    std::size_t line_;
    std::size_t column_;
};

struct MorphismDocument {
    FiniteSpace x;
    FiniteSpace y;
    FiniteDistribution p;
    PointMap f;
    /// Absent only when parsed with `kernel_optional`.
    std::optional<StochasticKernel> s;
    std::optional<FiniteDistribution> q;

    /// Builds the pair; a stated q that differs from pushforward(p, f) shows
    /// up as a coherence violation. Requires s.
    [[nodiscard]] CoherentPair to_pair() const;
};

MorphismDocument parse_morphism(std::string_view text, const std::string& source = "<input>",
                                bool kernel_optional = false);
std::string serialize_morphism(const MorphismDocument& doc);

/// `kernelflow distribution 1`, then `space X = ...` and `p = ...`.
FiniteDistribution parse_distribution(std::string_view text, const std::string& source = "<input>");
std::string serialize_distribution(const FiniteDistribution& p);

/// `kernelflow forecasts 1`, `outcomes a b ...`, then one row per forecast:
/// `round forecaster label m_a m_b ...`. The label is the realized outcome
/// (or, for conditional scoring, the scenario).
struct ForecastRow {
    long round;
    std::string forecaster;
    std::string label;
    FiniteDistribution forecast;
    std::size_t line;
    std::size_t label_column;
};

struct ForecastLog {
    FiniteSpace outcomes;
    std::vector<ForecastRow> rows;
};

ForecastLog parse_forecast_log(std::string_view text, const std::string& source = "<input>");

/// `kernelflow density 1`, then adjacent pieces `piece lo hi p_mass q_mass`.
/// Both mass columns must sum to exactly 1.
std::vector<borel::Piece> parse_density(std::string_view text, const std::string& source = "<input>");

}  // namespace kernelflow::cli
