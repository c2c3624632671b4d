#include "slitkit/rational.hpp"

#include <cctype>
#include <cmath>
#include <stdexcept>
#include <string>

namespace slitkit {
namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

BigInt parse_integer(std::string_view s) {
    s = trim(s);
    if (s.empty()) throw std::invalid_argument("empty integer literal");
    bool negative = false;
    if (s.front() == '+' || s.front() == '-') {
        negative = s.front() == '-';
        s.remove_prefix(1);
    }
    if (s.empty()) throw std::invalid_argument("sign without digits");
    BigInt value = 0;
    for (char c : s) {
        if (!std::isdigit(static_cast<unsigned char>(c)))
            throw std::invalid_argument("bad digit in integer literal '" + std::string(s) + "'");
        value = value * 10 + (c - '0');
    }
    return negative ? BigInt(-value) : value;
}

BigInt pow10(int e) {
    BigInt p = 1;
    for (int i = 0; i < e; ++i) p *= 10;
    return p;
}

Rational parse_decimal(std::string_view s) {
    int exponent = 0;
    if (auto epos = s.find_first_of("eE"); epos != std::string_view::npos) {
        exponent = static_cast<int>(parse_integer(s.substr(epos + 1)));
        s = s.substr(0, epos);
    }
    bool negative = false;
    if (!s.empty() && (s.front() == '+' || s.front() == '-')) {
        negative = s.front() == '-';
        s.remove_prefix(1);
    }
    std::string digits;
    int fraction_digits = 0;
    bool seen_point = false;
    for (char c : s) {
        if (c == '.') {
            if (seen_point) throw std::invalid_argument("two decimal points");
            seen_point = true;
        } else if (std::isdigit(static_cast<unsigned char>(c))) {
            digits.push_back(c);
            if (seen_point) ++fraction_digits;
        } else {
            throw std::invalid_argument("bad character in decimal literal");
        }
    }
    if (digits.empty()) throw std::invalid_argument("decimal literal without digits");
    Rational value(parse_integer(digits));
    exponent -= fraction_digits;
    if (exponent >= 0) value *= Rational(pow10(exponent));
    else value /= Rational(pow10(-exponent));
    return negative ? Rational(-value) : value;
}

}  // namespace

Rational parse_rational(std::string_view text) {
    text = trim(text);
    if (auto slash = text.find('/'); slash != std::string_view::npos) {
        BigInt den = parse_integer(text.substr(slash + 1));
        if (den == 0) throw std::invalid_argument("zero denominator in '" + std::string(text) + "'");
        return Rational(parse_integer(text.substr(0, slash)), den);
    }
    if (text.find_first_of(".eE") != std::string_view::npos) return parse_decimal(text);
    return Rational(parse_integer(text));
}

std::string to_string(const Rational& value) {
    auto num = boost::multiprecision::numerator(value);
    auto den = boost::multiprecision::denominator(value);
    if (den == 1) return num.str();
    return num.str() + "/" + den.str();
}

Rational rational_from_double(double value) {
    if (!std::isfinite(value)) throw std::invalid_argument("non-finite double has no rational value");
    if (value == 0.0) return 0;
    int exp2 = 0;
    const double mantissa = std::frexp(value, &exp2);  // value = mantissa * 2^exp2
    const auto scaled = static_cast<long long>(std::ldexp(mantissa, 53));
    Rational result(scaled);
    const int shift = exp2 - 53;
    BigInt two_pow = 1;
    two_pow <<= std::abs(shift);
    if (shift >= 0) result *= Rational(two_pow);
    else result /= Rational(two_pow);
    return result;
}

}  // namespace slitkit
