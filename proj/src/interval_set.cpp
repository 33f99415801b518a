#include "keanemix/interval_set.hpp"

#include <algorithm>

#include "keanemix/iet.hpp"

namespace keanemix {

IntervalSet::IntervalSet(std::vector<Interval> pieces) : pieces_(std::move(pieces)) {
    for (const auto& p : pieces_)
        if (!(p.lo < p.hi)) throw DomainError("empty or inverted interval piece");
    std::sort(pieces_.begin(), pieces_.end(),
              [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
    std::vector<Interval> merged;
    for (auto& p : pieces_) {
        if (!merged.empty() && p.lo <= merged.back().hi) {
            if (p.hi > merged.back().hi) merged.back().hi = p.hi;
        } else {
            merged.push_back(std::move(p));
        }
    }
    pieces_ = std::move(merged);
}

IntervalSet IntervalSet::interval(const Rational& lo, const Rational& hi) {
    return IntervalSet({Interval{lo, hi}});
}

Rational IntervalSet::measure() const {
    Rational m = 0;
    for (const auto& p : pieces_) m += p.hi - p.lo;
    return m;
}

bool IntervalSet::intersects(const IntervalSet& other) const {
    size_t i = 0, j = 0;
    while (i < pieces_.size() && j < other.pieces_.size()) {
        const auto& a = pieces_[i];
        const auto& b = other.pieces_[j];
        if (a.lo < b.hi && b.lo < a.hi) return true;
        if (a.hi < b.hi)
            ++i;
        else
            ++j;
    }
    return false;
}

IntervalSet IntervalSet::intersect(const IntervalSet& other) const {
    std::vector<Interval> out;
    size_t i = 0, j = 0;
    while (i < pieces_.size() && j < other.pieces_.size()) {
        const auto& a = pieces_[i];
        const auto& b = other.pieces_[j];
        Rational lo = std::max(a.lo, b.lo);
        Rational hi = std::min(a.hi, b.hi);
        if (lo < hi) out.push_back(Interval{lo, hi});
        if (a.hi < b.hi)
            ++i;
        else
            ++j;
    }
    IntervalSet r;
    r.pieces_ = std::move(out); // already sorted, disjoint, nonempty
    return r;
}

IntervalSet IntervalSet::unite(const IntervalSet& other) const {
    std::vector<Interval> all = pieces_;
    all.insert(all.end(), other.pieces_.begin(), other.pieces_.end());
    return IntervalSet(std::move(all));
}

bool IntervalSet::contains(const IntervalSet& other) const {
    return intersect(other).measure() == other.measure();
}

bool IntervalSet::contains_point(const Rational& x) const {
    for (const auto& p : pieces_)
        if (p.contains(x)) return true;
    return false;
}

IntervalSet image_step(const Iet& T, const IntervalSet& S) {
    std::vector<Interval> out;
    out.reserve(S.piece_count() + size_t(T.size()));
    for (const auto& p : S.pieces()) {
        Rational x = p.lo;
        while (x < p.hi) {
            int j = T.locate(x);
            Rational cut = std::min(p.hi, T.right(j));
            out.push_back(Interval{Rational(x + T.offset(j)), Rational(cut + T.offset(j))});
            x = cut;
        }
    }
    return IntervalSet(std::move(out));
}

IterateImageResult iterate_image(const Iet& T, IntervalSet S, long long n,
                                 const IntervalSet* probe, const Budget& budget) {
    if (n < 0) throw DomainError("negative iteration count");
    IterateImageResult res;
    res.hits.reserve(size_t(n));
    res.piece_counts.reserve(size_t(n));
    res.peak_pieces = (long long)S.piece_count();
    for (long long i = 0; i < n; ++i) {
        if (i >= budget.max_steps)
            throw BudgetError("iterate_image step budget exceeded", i);
        S = image_step(T, S);
        res.peak_pieces = std::max(res.peak_pieces, (long long)S.piece_count());
        if ((long long)S.piece_count() > budget.max_pieces)
            throw BudgetError("iterate_image piece budget exceeded", i + 1);
        res.piece_counts.push_back((long long)S.piece_count());
        if (probe) res.hits.push_back(S.intersects(*probe));
    }
    res.final_set = std::move(S);
    return res;
}

} // namespace keanemix
