#pragma once

#include <gmpxx.h>

#include <string>
#include <vector>

#include "keanemix/errors.hpp"

namespace keanemix {

// All geometry in the library is exact. Rational is GMP's canonicalizing
// mpq_class: denominator > 0 and gcd(|num|, den) = 1 always hold.
using Rational = mpq_class;
using BigInt = mpz_class;

// Canonical "p/q" form ("p" when q = 1, matching GMP).
inline std::string rat_str(const Rational& r) {
    Rational c = r; // materialize in case an expression template sneaks in
    return c.get_str();
}

inline std::string int_str(const BigInt& z) { return z.get_str(); }

// Accepts "p/q" or "p".
inline Rational rat_parse(const std::string& s) {
    Rational r;
    if (r.set_str(s, 10) != 0)
        throw DomainError("malformed rational: '" + s + "'");
    r.canonicalize();
    if (r.get_den() <= 0) throw DomainError("rational with nonpositive denominator: '" + s + "'");
    return r;
}

inline BigInt int_parse(const std::string& s) {
    BigInt z;
    if (z.set_str(s, 10) != 0)
        throw DomainError("malformed integer: '" + s + "'");
    return z;
}

// Least common multiple of the denominators, i.e. the scale that clears all
// fractions at once.
inline BigInt common_denominator(const std::vector<Rational>& xs) {
    BigInt q = 1;
    for (const auto& x : xs) {
        BigInt d = x.get_den();
        mpz_lcm(q.get_mpz_t(), q.get_mpz_t(), d.get_mpz_t());
    }
    return q;
}

} // namespace keanemix
