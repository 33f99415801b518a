#pragma once

#include <vector>

#include "keanemix/rational.hpp"

namespace keanemix {

// Half-open interval [lo, hi). Every discontinuity belongs to the interval on
// its right, everywhere in the library.
struct Interval {
    Rational lo, hi;
    Rational length() const { return Rational(hi - lo); }
    bool contains(const Rational& x) const { return lo <= x && x < hi; }
};

class Iet; // iet.hpp

// Sorted union of disjoint half-open intervals with exact endpoints.
// Abutting pieces are merged eagerly; overlapping input is unioned.
class IntervalSet {
public:
    IntervalSet() = default;
    explicit IntervalSet(std::vector<Interval> pieces); // normalizes
    static IntervalSet interval(const Rational& lo, const Rational& hi);

    bool empty() const { return pieces_.empty(); }
    size_t piece_count() const { return pieces_.size(); }
    const std::vector<Interval>& pieces() const { return pieces_; }
    Rational measure() const;

    // Positive-length overlap (interiors meet); endpoint touching is not an
    // intersection, matching the open-set reading of mixing.
    bool intersects(const IntervalSet& other) const;
    IntervalSet intersect(const IntervalSet& other) const;
    IntervalSet unite(const IntervalSet& other) const;
    bool contains(const IntervalSet& other) const; // other ⊆ this
    bool contains_point(const Rational& x) const;

private:
    std::vector<Interval> pieces_;
};

// One exact forward image T(S).
IntervalSet image_step(const Iet& T, const IntervalSet& S);

struct IterateImageResult {
    std::vector<bool> hits;              // hits[i] = T^{i+1}(S) meets probe (when probe given)
    std::vector<long long> piece_counts; // after each step
    IntervalSet final_set;
    long long peak_pieces = 0;
};

// n forward images with optional per-step probe intersection flags.
IterateImageResult iterate_image(const Iet& T, IntervalSet S, long long n,
                                 const IntervalSet* probe = nullptr,
                                 const Budget& budget = {});

} // namespace keanemix
