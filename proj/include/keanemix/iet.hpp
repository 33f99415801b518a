#pragma once

#include <vector>

#include "keanemix/interval_set.hpp"
#include "keanemix/permutation.hpp"
#include "keanemix/rational.hpp"

namespace keanemix {

// Interval exchange transformation on [lo, lo + Σ lengths), exact rational
// data. For x in I_j:  T(x) = x − Σ_{k<j} l_k + Σ_{π(k')<π(j)} l_{k'},
// i.e. a rigid translation per interval; the image intervals tile the domain.
class Iet {
public:
    Iet(std::vector<Rational> lengths, Permutation perm, Rational lo = Rational(0));

    int size() const { return int(lengths_.size()); }
    const Rational& lo() const { return lo_; }
    const Rational& hi() const { return hi_; }
    Rational total() const { return Rational(hi_ - lo_); }
    const std::vector<Rational>& lengths() const { return lengths_; }
    const Permutation& permutation() const { return perm_; }

    // 0-based interval index; absolute endpoints
    const Rational& left(int j) const { return left_.at(size_t(j)); }
    Rational right(int j) const { return Rational(left_.at(size_t(j)) + lengths_.at(size_t(j))); }
    const Rational& offset(int j) const { return offset_.at(size_t(j)); }
    Interval interval(int j) const { return {left(j), right(j)}; }

    int locate(const Rational& x) const; // 0-based index of I_j containing x
    Rational apply(const Rational& x) const;
    Rational apply_inverse(const Rational& y) const;
    std::vector<Rational> orbit(const Rational& x, long long n) const; // x, Tx, ..., T^n x

private:
    Rational lo_, hi_;
    std::vector<Rational> lengths_;
    Permutation perm_;
    std::vector<Rational> left_;   // absolute left endpoint of I_j
    std::vector<Rational> offset_; // translation applied on I_j
    // image order: 0-based interval indices sorted by image position
    std::vector<int> image_order_;
    std::vector<Rational> image_left_; // absolute, aligned with image_order_
    friend class IntegerIet;
};

// Integer-scaled mirror: L_i = l_i·Q with Q the least common denominator.
// Conjugacy: Q·T(p/Q + lo) = Q·lo + apply(p) for 0 <= p < Q.
class IntegerIet {
public:
    explicit IntegerIet(const Iet& T);

    const BigInt& scale() const { return Q_; }
    const std::vector<BigInt>& lengths() const { return L_; }
    const Permutation& permutation() const { return perm_; }
    const BigInt& left(int j) const { return left_.at(size_t(j)); }
    const BigInt& offset(int j) const { return offset_.at(size_t(j)); }
    // true when everything fits the 128-bit fast-path width
    bool fits_fast_path() const { return fast_; }

    int locate(const BigInt& p) const; // p in [0, Q)
    BigInt apply(const BigInt& p) const;
    BigInt apply_inverse(const BigInt& p) const;

private:
    BigInt Q_;
    std::vector<BigInt> L_, left_, offset_;
    Permutation perm_;
    std::vector<int> image_order_;
    std::vector<BigInt> image_left_;
    bool fast_ = false;
};

inline IntegerIet rescale_to_integer(const Iet& T) { return IntegerIet(T); }

} // namespace keanemix
