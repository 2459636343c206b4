#pragma once

#include <boost/rational.hpp>

#include <cstdint>
#include <cstdlib>
#include <stdexcept>
#include <string>

namespace multigroup {

// Exact arithmetic used by the counterexample fixtures. All fixture
// probabilities are small fractions, so 64-bit numerators/denominators are
// ample; boost::rational throws on overflow rather than wrapping.
using Rat = boost::rational<long long>;

inline double to_double(const Rat& r) {
    return static_cast<double>(r.numerator()) / static_cast<double>(r.denominator());
}

inline std::string to_string(const Rat& r) {
    if (r.denominator() == 1) return std::to_string(r.numerator());
    return std::to_string(r.numerator()) + "/" + std::to_string(r.denominator());
}

// Parses "p/q", an integer, or a short decimal such as "0.25" (at most nine
// fractional digits). Throws std::invalid_argument on anything else.
inline Rat rat_from_string(const std::string& text) {
    if (text.empty()) throw std::invalid_argument("rational: empty string");
    const auto slash = text.find('/');
    try {
        if (slash != std::string::npos) {
            const long long num = std::stoll(text.substr(0, slash));
            const long long den = std::stoll(text.substr(slash + 1));
            return Rat(num, den);  // throws bad_rational on den == 0
        }
        const auto dot = text.find('.');
        if (dot == std::string::npos) return Rat(std::stoll(text));
        const std::string head = text.substr(0, dot);
        const std::string frac = text.substr(dot + 1);
        if (frac.empty() || frac.size() > 9 ||
            frac.find_first_not_of("0123456789") != std::string::npos) {
            throw std::invalid_argument("rational: bad fractional part");
        }
        long long den = 1;
        for (std::size_t i = 0; i < frac.size(); ++i) den *= 10;
        const bool negative = !head.empty() && head[0] == '-';
        const long long whole = head.empty() || head == "-" ? 0 : std::stoll(head);
        const long long frac_num = std::stoll(frac);
        const Rat magnitude = Rat(std::abs(whole)) + Rat(frac_num, den);
        return negative ? -magnitude : magnitude;
    } catch (const std::exception&) {
        throw std::invalid_argument("rational: cannot parse '" + text + "'");
    }
}

}  // namespace multigroup
