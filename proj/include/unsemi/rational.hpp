#ifndef UNSEMI_RATIONAL_HPP
#define UNSEMI_RATIONAL_HPP

#include <boost/multiprecision/cpp_int.hpp>

#include <optional>
#include <stdexcept>
#include <string>

namespace unsemi {

using Integer = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

inline double to_double(const Rational& q) { return q.convert_to<double>(); }

inline std::string to_string(const Rational& q) {
    if (denominator(q) == 1) return numerator(q).str();
    return numerator(q).str() + "/" + denominator(q).str();
}

/// Parse "a" or "a/b" (optional leading '-'). Throws std::invalid_argument.
inline Rational parse_rational(const std::string& s) {
    auto slash = s.find('/');
    try {
        if (slash == std::string::npos) return Rational(Integer(s));
        Integer num(s.substr(0, slash));
        Integer den(s.substr(slash + 1));
        if (den == 0) throw std::invalid_argument("zero denominator");
        return Rational(num, den);
    } catch (const std::runtime_error& e) {
        throw std::invalid_argument("bad rational '" + s + "': " + e.what());
    }
}

/// Exact square root when q is a perfect square of a rational, else nullopt.
inline std::optional<Rational> exact_sqrt(const Rational& q) {
    if (q < 0) return std::nullopt;
    if (q == 0) return Rational(0);
    Integer n = numerator(q), d = denominator(q);
    Integer rn = boost::multiprecision::sqrt(n);
    Integer rd = boost::multiprecision::sqrt(d);
    if (rn * rn != n || rd * rd != d) return std::nullopt;
    return Rational(rn, rd);
}

inline Rational abs(const Rational& q) { return q < 0 ? Rational(-q) : q; }

} // namespace unsemi

#endif // UNSEMI_RATIONAL_HPP
