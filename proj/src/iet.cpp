#include "keanemix/iet.hpp"

#include <algorithm>

#include "keanemix/int128.hpp"

namespace keanemix {

Iet::Iet(std::vector<Rational> lengths, Permutation perm, Rational lo)
    : lo_(std::move(lo)), lengths_(std::move(lengths)), perm_(std::move(perm)) {
    const int n = int(lengths_.size());
    if (n != perm_.size()) throw DomainError("length count does not match permutation size");
    // exact comparisons below require canonical rationals
    lo_.canonicalize();
    for (auto& l : lengths_) {
        l.canonicalize();
        if (l <= 0) throw DomainError("nonpositive interval length");
    }

    left_.reserve(size_t(n));
    Rational acc = lo_;
    for (const auto& l : lengths_) {
        left_.push_back(acc);
        acc += l;
    }
    hi_ = acc;

    // image left endpoints in placement order
    std::vector<Rational> img_left(static_cast<size_t>(n));
    acc = lo_;
    for (int slot = 1; slot <= n; ++slot) {
        int j = perm_.placed(slot); // 1-based interval placed at this slot
        img_left[size_t(j - 1)] = acc;
        acc += lengths_[size_t(j - 1)];
    }
    if (acc != hi_) throw DomainError("image does not tile the domain");

    offset_.reserve(size_t(n));
    for (int j = 0; j < n; ++j) offset_.push_back(Rational(img_left[size_t(j)] - left_[size_t(j)]));

    image_order_.resize(size_t(n));
    for (int slot = 1; slot <= n; ++slot) image_order_[size_t(slot - 1)] = perm_.placed(slot) - 1;
    image_left_.reserve(size_t(n));
    for (int k = 0; k < n; ++k) image_left_.push_back(img_left[size_t(image_order_[size_t(k)])]);
}

int Iet::locate(const Rational& x) const {
    if (x < lo_ || x >= hi_) throw DomainError("point outside domain: " + rat_str(x));
    // binary search over left endpoints
    int lo = 0, hi = size() - 1;
    while (lo < hi) {
        int mid = (lo + hi + 1) / 2;
        if (left_[size_t(mid)] <= x)
            lo = mid;
        else
            hi = mid - 1;
    }
    return lo;
}

Rational Iet::apply(const Rational& x) const {
    return Rational(x + offset_[size_t(locate(x))]);
}

Rational Iet::apply_inverse(const Rational& y) const {
    if (y < lo_ || y >= hi_) throw DomainError("point outside domain: " + rat_str(y));
    int lo = 0, hi = size() - 1;
    while (lo < hi) {
        int mid = (lo + hi + 1) / 2;
        if (image_left_[size_t(mid)] <= y)
            lo = mid;
        else
            hi = mid - 1;
    }
    int j = image_order_[size_t(lo)];
    return Rational(y - offset_[size_t(j)]);
}

std::vector<Rational> Iet::orbit(const Rational& x, long long n) const {
    if (n < 0) throw DomainError("negative orbit length");
    std::vector<Rational> out;
    out.reserve(size_t(n + 1));
    out.push_back(x);
    Rational cur = x;
    for (long long i = 0; i < n; ++i) {
        cur = apply(cur);
        out.push_back(cur);
    }
    return out;
}

IntegerIet::IntegerIet(const Iet& T) : perm_(T.permutation()) {
    std::vector<Rational> rel;
    rel.reserve(size_t(T.size()));
    for (const auto& l : T.lengths()) rel.push_back(l);
    Q_ = common_denominator(rel);
    BigInt total = 0;
    for (const auto& l : T.lengths()) {
        Rational s = l * Q_;
        L_.push_back(BigInt(s.get_num()));
        total += L_.back();
    }
    // Q_ is the lcm of length denominators, so total = (hi-lo)·Q_
    BigInt acc = 0;
    for (const auto& l : L_) {
        left_.push_back(acc);
        acc += l;
    }
    std::vector<BigInt> img_left(size_t(T.size()));
    acc = 0;
    for (int slot = 1; slot <= perm_.size(); ++slot) {
        int j = perm_.placed(slot);
        img_left[size_t(j - 1)] = acc;
        acc += L_[size_t(j - 1)];
    }
    for (int j = 0; j < T.size(); ++j) offset_.push_back(BigInt(img_left[size_t(j)] - left_[size_t(j)]));
    image_order_.resize(size_t(T.size()));
    for (int slot = 1; slot <= perm_.size(); ++slot)
        image_order_[size_t(slot - 1)] = perm_.placed(slot) - 1;
    for (int k = 0; k < T.size(); ++k) image_left_.push_back(img_left[size_t(image_order_[size_t(k)])]);
    // note: scale() is total/(hi-lo); conjugacy statements use coordinates
    // relative to lo. Fast path applies when the total fits 128 bits.
    Q_ = total;
    fast_ = fits_i128(total);
}

int IntegerIet::locate(const BigInt& p) const {
    if (p < 0 || p >= Q_) throw DomainError("integer point outside [0,Q)");
    int lo = 0, hi = int(L_.size()) - 1;
    while (lo < hi) {
        int mid = (lo + hi + 1) / 2;
        if (left_[size_t(mid)] <= p)
            lo = mid;
        else
            hi = mid - 1;
    }
    return lo;
}

BigInt IntegerIet::apply(const BigInt& p) const {
    return BigInt(p + offset_[size_t(locate(p))]);
}

BigInt IntegerIet::apply_inverse(const BigInt& p) const {
    if (p < 0 || p >= Q_) throw DomainError("integer point outside [0,Q)");
    int lo = 0, hi = int(L_.size()) - 1;
    while (lo < hi) {
        int mid = (lo + hi + 1) / 2;
        if (image_left_[size_t(mid)] <= p)
            lo = mid;
        else
            hi = mid - 1;
    }
    int j = image_order_[size_t(lo)];
    return BigInt(p - offset_[size_t(j)]);
}

} // namespace keanemix
