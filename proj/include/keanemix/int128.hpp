#pragma once

#include <string>

#include "keanemix/rational.hpp"

namespace keanemix {

using i128 = __int128;

// Width budget for the fixed-width fast path; anything wider falls back to
// arbitrary precision (or refuses, for the tower engines).
inline constexpr int kInt128Bits = 120;

inline std::string i128_str(i128 v) {
    if (v == 0) return "0";
    bool neg = v < 0;
    unsigned __int128 u = neg ? -static_cast<unsigned __int128>(v) : static_cast<unsigned __int128>(v);
    std::string s;
    while (u) {
        s.push_back(char('0' + int(u % 10)));
        u /= 10;
    }
    if (neg) s.push_back('-');
    return {s.rbegin(), s.rend()};
}

inline bool fits_i128(const BigInt& z) {
    return mpz_sizeinbase(z.get_mpz_t(), 2) <= kInt128Bits;
}

inline i128 to_i128(const BigInt& z) {
    if (!fits_i128(z)) throw DomainError("integer exceeds 128-bit fast-path width: " + z.get_str());
    bool neg = z < 0;
    BigInt a = neg ? BigInt(-z) : z;
    i128 r = 0;
    // export via two 64-bit limbs
    BigInt hi = a >> 64;
    BigInt lo = a - (hi << 64);
    r = (i128(hi.get_ui()) << 64) | i128(lo.get_ui());
    if (mpz_sizeinbase(hi.get_mpz_t(), 2) > 64) throw DomainError("int128 conversion overflow");
    return neg ? -r : r;
}

inline BigInt from_i128(i128 v) {
    bool neg = v < 0;
    unsigned __int128 u = neg ? -static_cast<unsigned __int128>(v) : static_cast<unsigned __int128>(v);
    BigInt hi(static_cast<unsigned long>(u >> 64));
    BigInt lo(static_cast<unsigned long>(u & ~0ULL));
    BigInt r = (hi << 64) + lo;
    return neg ? BigInt(-r) : r;
}

} // namespace keanemix
