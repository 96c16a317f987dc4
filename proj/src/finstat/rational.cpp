#include "kernelflow/rational.hpp"

#include "kernelflow/errors.hpp"

#include <cmath>
#include <numbers>

namespace kernelflow {

namespace {

bool is_integer_literal(std::string_view s, bool allow_sign) {
    if (s.empty()) return false;
    std::size_t i = 0;
    if (allow_sign && (s[0] == '-' || s[0] == '+')) i = 1;
    if (i == s.size()) return false;
    for (; i < s.size(); ++i) {
        if (s[i] < '0' || s[i] > '9') return false;
    }
    return true;
}

}  // namespace

Rational::Rational(long num, long den) {
    if (den == 0) throw DomainError("rational with zero denominator");
    value_ = mpq_class(num, den);
    value_.canonicalize();
}

Rational::Rational(mpq_class value) : value_(std::move(value)) { value_.canonicalize(); }

Rational Rational::parse(std::string_view text) {
    const auto slash = text.find('/');
    const std::string_view num = text.substr(0, slash);
    const std::string_view den = slash == std::string_view::npos ? std::string_view{"1"}
                                                                 : text.substr(slash + 1);
    if (!is_integer_literal(num, true) || !is_integer_literal(den, false)) {
        throw DomainError("malformed fraction '" + std::string(text) + "'");
    }
    mpz_class n(std::string(num[0] == '+' ? num.substr(1) : num));
    mpz_class d{std::string(den)};
    if (d == 0) throw DomainError("fraction '" + std::string(text) + "' has zero denominator");
    mpq_class q(n, d);
    q.canonicalize();
    return Rational(std::move(q));
}

std::string Rational::to_string() const { return value_.get_str(); }

double Rational::to_double() const { return value_.get_d(); }

double Rational::log() const {
    if (sgn(value_) <= 0) throw DomainError("logarithm of a non-positive rational");
    if (value_ == 1) return 0.0;
    // Near 1 the increment (num - den) / den is exact, so log1p keeps full
    // relative precision.
    if (value_ >= mpq_class(1, 2) && value_ <= 2) {
        const mpq_class delta = value_ - 1;
        return std::log1p(delta.get_d());
    }
    long exp_num = 0;
    long exp_den = 0;
    const double mant_num = mpz_get_d_2exp(&exp_num, value_.get_num_mpz_t());
    const double mant_den = mpz_get_d_2exp(&exp_den, value_.get_den_mpz_t());
    return std::log(mant_num / mant_den) +
           static_cast<double>(exp_num - exp_den) * std::numbers::ln2;
}

Rational& Rational::operator+=(const Rational& rhs) {
    value_ += rhs.value_;
    return *this;
}

Rational& Rational::operator-=(const Rational& rhs) {
    value_ -= rhs.value_;
    return *this;
}

Rational& Rational::operator*=(const Rational& rhs) {
    value_ *= rhs.value_;
    return *this;
}

Rational& Rational::operator/=(const Rational& rhs) {
    if (rhs.is_zero()) throw DomainError("rational division by zero");
    value_ /= rhs.value_;
    return *this;
}

}  // namespace kernelflow
