#include "keanemix/induction.hpp"

#include <algorithm>
#include <map>

namespace keanemix {

namespace {

struct ActivePiece {
    Rational cur_lo, cur_hi; // current position
    Rational org_lo;         // left endpoint of the originating slice of J
    long long steps;
    Rational cum_offset;
    std::vector<int> itinerary;
};

struct DonePiece {
    Rational org_lo, org_hi;
    long long steps;
    Rational cum_offset;
    std::vector<int> itinerary;
};

} // namespace

InducedMap first_return_map(const Iet& T, const Interval& J, long long max_steps) {
    if (!(T.lo() <= J.lo && J.lo < J.hi && J.hi <= T.hi()))
        throw DomainError("induction interval not inside the IET domain");

    std::vector<ActivePiece> active;
    active.push_back({J.lo, J.hi, J.lo, 0, Rational(0), {}});
    std::vector<DonePiece> done;
    long long budget = max_steps;

    while (!active.empty()) {
        ActivePiece p = std::move(active.back());
        active.pop_back();
        // split [cur_lo, cur_hi) at T's discontinuities, advance each part
        Rational x = p.cur_lo;
        while (x < p.cur_hi) {
            int j = T.locate(x);
            Rational cut = std::min(p.cur_hi, T.right(j));
            if (--budget < 0) throw BudgetError("first_return_map step budget exceeded", max_steps);
            Rational nl = x + T.offset(j);
            Rational nh = cut + T.offset(j);
            Rational base_ol = p.org_lo + (x - p.cur_lo);
            std::vector<int> nit = p.itinerary;
            nit.push_back(j);
            // split the image at J's endpoints
            std::vector<Rational> pts{nl};
            if (nl < J.lo && J.lo < nh) pts.push_back(J.lo);
            if (nl < J.hi && J.hi < nh) pts.push_back(J.hi);
            pts.push_back(nh);
            for (size_t s = 0; s + 1 < pts.size(); ++s) {
                const Rational& sl = pts[s];
                const Rational& sh = pts[s + 1];
                if (!(sl < sh)) continue;
                Rational o2 = base_ol + (sl - nl);
                if (J.lo <= sl && sh <= J.hi) {
                    done.push_back({o2, Rational(o2 + (sh - sl)), p.steps + 1,
                                    Rational(p.cum_offset + T.offset(j)), nit});
                } else {
                    active.push_back({sl, sh, o2, p.steps + 1,
                                      Rational(p.cum_offset + T.offset(j)), nit});
                }
            }
            x = cut;
        }
    }

    std::sort(done.begin(), done.end(),
              [](const DonePiece& a, const DonePiece& b) { return a.org_lo < b.org_lo; });
    // merge adjacent pieces with identical travel
    std::vector<DonePiece> merged;
    for (auto& d : done) {
        if (!merged.empty() && merged.back().org_hi == d.org_lo &&
            merged.back().steps == d.steps && merged.back().cum_offset == d.cum_offset &&
            merged.back().itinerary == d.itinerary) {
            merged.back().org_hi = d.org_hi;
        } else {
            merged.push_back(std::move(d));
        }
    }

    InducedMap ind;
    ind.domain = J;
    ind.visitation.assign(size_t(T.size()), std::vector<long long>(merged.size(), 0));
    for (size_t t = 0; t < merged.size(); ++t) {
        const auto& m = merged[t];
        Tower tw;
        tw.base = {m.org_lo, m.org_hi};
        tw.return_time = m.steps;
        tw.itinerary = m.itinerary;
        tw.level_lo.reserve(size_t(m.steps));
        Rational c = m.org_lo;
        for (long long i = 0; i < m.steps; ++i) {
            tw.level_lo.push_back(c);
            c += T.offset(m.itinerary[size_t(i)]);
        }
        // level i sits inside original interval itinerary[i]
        for (int orig : m.itinerary) ind.visitation[size_t(orig)][t] += 1;
        ind.towers.push_back(std::move(tw));
    }
    ind.extra_pieces = int(merged.size()) > T.size();

    // induced IET: lengths in base order; placement = order of images
    std::vector<Rational> lengths;
    std::vector<size_t> order(merged.size());
    for (size_t t = 0; t < merged.size(); ++t) {
        lengths.push_back(Rational(merged[t].org_hi - merged[t].org_lo));
        order[t] = t;
    }
    std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
        return Rational(merged[a].org_lo + merged[a].cum_offset) <
               Rational(merged[b].org_lo + merged[b].cum_offset);
    });
    std::vector<int> word(merged.size());
    for (size_t slot = 0; slot < merged.size(); ++slot) word[slot] = int(order[slot]) + 1;
    ind.sub_ = std::make_shared<Iet>(lengths, Permutation(word), J.lo);

    // level lookup index
    for (size_t t = 0; t < ind.towers.size(); ++t)
        for (size_t i = 0; i < ind.towers[t].level_lo.size(); ++i)
            ind.level_index_.emplace_back(ind.towers[t].level_lo[i], int(t), (long long)i);
    std::sort(ind.level_index_.begin(), ind.level_index_.end(),
              [](const auto& a, const auto& b) { return std::get<0>(a) < std::get<0>(b); });
    return ind;
}

std::pair<int, long long> InducedMap::locate(const Rational& x) const {
    // binary search for the last level starting at or before x
    size_t lo = 0, hi = level_index_.size();
    while (lo + 1 < hi) {
        size_t mid = (lo + hi) / 2;
        if (std::get<0>(level_index_[mid]) <= x)
            lo = mid;
        else
            hi = mid;
    }
    const auto& [llo, t, i] = level_index_[lo];
    Interval lev = towers[size_t(t)].level(i);
    if (!lev.contains(x)) throw DomainError("point not covered by any tower level");
    return {t, i};
}

void InducedMap::verify_tiling(const Iet& parent) const {
    std::vector<Interval> levels;
    for (const auto& tw : towers)
        for (size_t i = 0; i < tw.level_lo.size(); ++i) levels.push_back(tw.level((long long)i));
    std::sort(levels.begin(), levels.end(),
              [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
    Rational edge = parent.lo();
    for (const auto& lv : levels) {
        if (lv.lo != edge) throw DomainError("tower levels do not tile: gap or overlap");
        edge = lv.hi;
    }
    if (edge != parent.hi()) throw DomainError("tower levels do not tile: wrong total");
}

FourthInduction induce_on_fourth(const Iet& T, bool flipped, long long max_steps) {
    if (T.size() != 4) throw DomainError("induce_on_fourth needs a 4-interval IET");
    if (T.permutation() != (flipped ? Permutation::parse("4213").reflected()
                                    : Permutation::parse("4213")))
        throw DomainError("input IET does not carry the (4213) shape");

    // interval named 4 sits leftmost when names run right-to-left
    int pos4 = named_position(4, flipped);
    Interval J = T.interval(pos4);

    FourthInduction out;
    out.parent_flipped = flipped;
    out.child_flipped = !flipped;
    out.ind = first_return_map(T, J, max_steps);
    if (out.ind.piece_count() != 4)
        throw DomainError("induction on the fourth interval did not yield 4 pieces");

    out.pre_rename_word = out.ind.sub_iet().permutation();
    out.named_word = out.child_flipped ? out.pre_rename_word.reflected() : out.pre_rename_word;
    if (out.named_word != Permutation::parse("4213"))
        throw DomainError("induced map is not (4213) after renaming: input outside the Keane cone");

    for (int i = 1; i <= 4; ++i) {
        int pi = named_position(i, flipped);
        for (int j = 1; j <= 4; ++j) {
            int pj = named_position(j, out.child_flipped);
            out.named_visitation[size_t(i - 1)][size_t(j - 1)] =
                out.ind.visitation[size_t(pi)][size_t(pj)];
        }
    }
    for (int j = 1; j <= 4; ++j)
        out.named_return_times[size_t(j - 1)] =
            out.ind.return_time(named_position(j, out.child_flipped));
    return out;
}

} // namespace keanemix
