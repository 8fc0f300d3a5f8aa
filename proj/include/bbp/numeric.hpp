#pragma once

#include <cctype>
#include <cmath>
#include <cstdio>
#include <string>
#include <string_view>
#include <type_traits>

#include <boost/multiprecision/gmp.hpp>

#include "error.hpp"

namespace bbp {

//! Arbitrary-precision rational used by every exact oracle.
using Rational = boost::multiprecision::number<boost::multiprecision::gmp_rational,
                                               boost::multiprecision::et_off>;

enum class NumericMode
{
    Exact,
    Float
};

template<class T>
inline constexpr bool is_exact_v = std::is_same_v<T, Rational>;

template<class T>
concept Scalar = std::is_same_v<T, Rational> || std::is_same_v<T, double>;

template<Scalar T>
inline constexpr NumericMode mode_of = is_exact_v<T> ? NumericMode::Exact : NumericMode::Float;

inline char const* to_string(NumericMode mode)
{
    return mode == NumericMode::Exact ? "exact" : "float";
}

template<Scalar T>
T ratio(long long num, long long den)
{
    detail::require(den != 0, ErrorCode::InvalidArgument, "zero denominator");
    return T(num) / T(den);
}

inline double to_double(double x) { return x; }
inline double to_double(Rational const& x) { return x.convert_to<double>(); }

template<Scalar T>
T from_double(double x)
{
    if constexpr (is_exact_v<T>)
        return Rational(x);  // exact binary expansion of x
    else
        return x;
}

namespace detail {

inline Rational pow10(int e)
{
    Rational r(1);
    for (int i = 0; i < e; ++i)
        r *= 10;
    return r;
}

//! Decimal literal ("-0.125", "3e-2") to an exact rational.
inline Rational parse_decimal_exact(std::string_view text)
{
    std::size_t pos = 0;
    bool negative = false;
    if (pos < text.size() && (text[pos] == '+' || text[pos] == '-'))
        negative = text[pos++] == '-';

    boost::multiprecision::mpz_int digits = 0;
    int frac_digits = 0;
    bool seen_digit = false;
    bool seen_point = false;
    for (; pos < text.size(); ++pos)
    {
        char c = text[pos];
        if (c >= '0' && c <= '9')
        {
            digits = digits * 10 + (c - '0');
            seen_digit = true;
            if (seen_point)
                ++frac_digits;
        }
        else if (c == '.' && !seen_point)
        {
            seen_point = true;
        }
        else
        {
            break;
        }
    }
    require(seen_digit, ErrorCode::ParseError, "not a number: '" + std::string(text) + "'");

    int exponent = 0;
    if (pos < text.size() && (text[pos] == 'e' || text[pos] == 'E'))
    {
        ++pos;
        std::string rest(text.substr(pos));
        require(!rest.empty(), ErrorCode::ParseError, "bad exponent in '" + std::string(text) + "'");
        std::size_t used = 0;
        try
        {
            exponent = std::stoi(rest, &used);
        }
        catch (std::exception const&)
        {
            fail(ErrorCode::ParseError, "bad exponent in '" + std::string(text) + "'");
        }
        pos += used;
    }
    require(pos == text.size(), ErrorCode::ParseError, "trailing characters in '" + std::string(text) + "'");

    Rational value(digits);
    int shift = exponent - frac_digits;
    if (shift >= 0)
        value *= pow10(shift);
    else
        value /= pow10(-shift);
    return negative ? Rational(-value) : value;
}

}  // namespace detail

//! Parse "a/b", an integer, or a decimal literal. Exact mode keeps decimals exact.
template<Scalar T>
T parse_scalar(std::string_view text)
{
    while (!text.empty() && std::isspace(static_cast<unsigned char>(text.front())))
        text.remove_prefix(1);
    while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back())))
        text.remove_suffix(1);
    detail::require(!text.empty(), ErrorCode::ParseError, "empty number");

    if (auto slash = text.find('/'); slash != std::string_view::npos)
    {
        Rational num = detail::parse_decimal_exact(text.substr(0, slash));
        Rational den = detail::parse_decimal_exact(text.substr(slash + 1));
        detail::require(den != 0, ErrorCode::ParseError, "zero denominator in '" + std::string(text) + "'");
        Rational r = num / den;
        if constexpr (is_exact_v<T>)
            return r;
        else
            return to_double(r);
    }
    if constexpr (is_exact_v<T>)
    {
        return detail::parse_decimal_exact(text);
    }
    else
    {
        std::string s(text);
        char* end = nullptr;
        double v = std::strtod(s.c_str(), &end);
        detail::require(end == s.c_str() + s.size(), ErrorCode::ParseError, "not a number: '" + s + "'");
        return v;
    }
}

inline std::string format_scalar(Rational const& x)
{
    return x.str();
}

inline std::string format_scalar(double x)
{
    if (std::isinf(x))
        return x > 0 ? "inf" : "-inf";
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

}  // namespace bbp
