#include "keanemix/hierarchy.hpp"

#include <algorithm>
#include <limits>
#include <optional>
#include <tuple>

namespace keanemix {

namespace {

// itinerary arena: persistent backward-linked chains so BFS splits share
// prefixes instead of copying
struct Arena {
    std::vector<std::pair<int64_t, int32_t>> nodes; // (prev index, symbol)
    int64_t push(int64_t prev, int32_t c) {
        nodes.emplace_back(prev, c);
        return int64_t(nodes.size()) - 1;
    }
    std::vector<int32_t> walk(int64_t idx) const {
        std::vector<int32_t> out;
        while (idx >= 0) {
            out.push_back(nodes[size_t(idx)].second);
            idx = nodes[size_t(idx)].first;
        }
        std::reverse(out.begin(), out.end());
        return out;
    }
    bool equal_chains(int64_t a, int64_t b) const {
        while (a != b) {
            if (a < 0 || b < 0) return false;
            if (nodes[size_t(a)].second != nodes[size_t(b)].second) return false;
            a = nodes[size_t(a)].first;
            b = nodes[size_t(b)].first;
        }
        return true;
    }
};

// a 4-interval integer translation map, the common shape of T and its
// induced maps in engine coordinates
struct IntMap4 {
    i128 lo[4], hi[4], off[4];
    i128 dom_lo, dom_hi;
    int locate(i128 x) const {
        for (int c = 0; c < 4; ++c)
            if (lo[c] <= x && x < hi[c]) return c;
        throw DomainError("integer point outside map domain");
    }
};

struct BfsPiece {
    i128 org_lo, org_hi;
    long long steps;
    i128 cum_off;
    int64_t itin; // arena chain
};

// first-return BFS of `M` on [a,b) ⊆ its domain
std::vector<BfsPiece> bfs_induce(const IntMap4& M, i128 a, i128 b, Arena& arena,
                                 const Budget& budget) {
    struct Active {
        i128 cur_lo, cur_hi, org_lo;
        long long steps;
        i128 cum_off;
        int64_t itin;
    };
    std::vector<Active> active{{a, b, a, 0, 0, -1}};
    std::vector<BfsPiece> done;
    long long steps_left = budget.max_steps;
    while (!active.empty()) {
        Active p = active.back();
        active.pop_back();
        i128 x = p.cur_lo;
        while (x < p.cur_hi) {
            int c = M.locate(x);
            i128 cut = std::min(p.cur_hi, M.hi[c]);
            if (--steps_left < 0)
                throw BudgetError("induction step budget exceeded", budget.max_steps);
            i128 d = M.off[c];
            i128 nl = x + d, nh = cut + d;
            i128 base_ol = p.org_lo + (x - p.cur_lo);
            int64_t nit = arena.push(p.itin, c);
            i128 pts[4];
            int np = 0;
            pts[np++] = nl;
            if (nl < a && a < nh) pts[np++] = a;
            if (nl < b && b < nh) pts[np++] = b;
            pts[np++] = nh;
            for (int s = 0; s + 1 < np; ++s) {
                i128 sl = pts[s], sh = pts[s + 1];
                if (sh <= sl) continue;
                i128 o2 = base_ol + (sl - nl);
                if (a <= sl && sh <= b)
                    done.push_back({o2, o2 + (sh - sl), p.steps + 1, p.cum_off + d, nit});
                else
                    active.push_back({sl, sh, o2, p.steps + 1, p.cum_off + d, nit});
            }
            x = cut;
        }
    }
    std::sort(done.begin(), done.end(),
              [](const BfsPiece& x, const BfsPiece& y) { return x.org_lo < y.org_lo; });
    std::vector<BfsPiece> merged;
    for (auto& d : done) {
        if (!merged.empty() && merged.back().org_hi == d.org_lo &&
            merged.back().steps == d.steps && merged.back().cum_off == d.cum_off &&
            arena.equal_chains(merged.back().itin, d.itin)) {
            merged.back().org_hi = d.org_hi;
        } else {
            merged.push_back(d);
        }
    }
    return merged;
}

} // namespace

KeaneHierarchy::KeaneHierarchy(const StageParams& p, int depth, const Budget& budget)
    : params_(p), depth_(depth) {
    if (depth < 3) throw DomainError("tower engines need depth >= 3");
    table_ = return_table(p, depth);

    Iet T = build_iet(p, depth);
    IntegerIet TI(T);
    if (!TI.fits_fast_path())
        throw BudgetError("integer scale exceeds the 128-bit engine width; "
                          "depth too large for the tower engines");
    Qz_ = TI.scale();
    Q_ = to_i128(Qz_);
    for (int j = 0; j < 4; ++j) {
        left_[size_t(j)] = to_i128(TI.left(j));
        len_[size_t(j)] = to_i128(TI.lengths()[size_t(j)]);
        offset_[size_t(j)] = to_i128(TI.offset(j));
    }
    {
        std::array<std::pair<i128, int>, 4> img;
        for (int j = 0; j < 4; ++j) img[size_t(j)] = {left_[size_t(j)] + offset_[size_t(j)], j};
        std::sort(img.begin(), img.end());
        for (int k = 0; k < 4; ++k) {
            img_left_[size_t(k)] = img[size_t(k)].first;
            img_order_[size_t(k)] = img[size_t(k)].second;
        }
    }

    // stage 1: induce on I_4 (names flip)
    s1_ = induce_enumerated(left_[3], Q_, true, budget);
    // stage 2: induce on I^{(2)} = the stage-1 interval named 4 (names flip back)
    int p4 = s1_.pos(4);
    s2_ = induce_enumerated(s1_.base_lo[size_t(p4)], s1_.base_hi[size_t(p4)], false, budget);

    for (int name = 1; name <= 4; ++name) {
        if (BigInt((long)s1_.ret[size_t(s1_.pos(name))]) != table_.at(1, name) ||
            BigInt((long)s2_.ret[size_t(s2_.pos(name))]) != table_.at(2, name))
            throw DomainError("tower return times disagree with the return table");
    }

    // stage 3: induce the stage-2 first-return map S2 on the stage-2 interval
    // named 4, recording flights in S2-steps
    s3_.flipped = true;
    IntMap4 S2;
    for (int c = 0; c < 4; ++c) {
        S2.lo[c] = s2_.base_lo[size_t(c)];
        S2.hi[c] = s2_.base_hi[size_t(c)];
        S2.off[c] = s2_.offset[size_t(c)];
    }
    S2.dom_lo = s2_.dom_lo;
    S2.dom_hi = s2_.dom_hi;
    int q4 = s2_.pos(4);
    s3_.dom_lo = s2_.base_lo[size_t(q4)];
    s3_.dom_hi = s2_.base_hi[size_t(q4)];
    Arena arena;
    auto pieces = bfs_induce(S2, s3_.dom_lo, s3_.dom_hi, arena, budget);
    if (pieces.size() != 4) throw DomainError("third-stage induction did not yield 4 pieces");
    for (int t = 0; t < 4; ++t) {
        const auto& pc = pieces[size_t(t)];
        s3_.base_lo[size_t(t)] = pc.org_lo;
        s3_.base_hi[size_t(t)] = pc.org_hi;
        s3_.offset[size_t(t)] = pc.cum_off;
        s3_.ret_S[size_t(t)] = pc.steps;
        auto itin = arena.walk(pc.itin);
        auto& ell = s3_.ell[size_t(t)];
        auto& pos = s3_.pos_at[size_t(t)];
        auto& cum = s3_.cum[size_t(t)];
        ell.reserve(itin.size() + 1);
        pos.reserve(itin.size());
        cum.reserve(itin.size());
        long long tt = 0;
        i128 cc = 0;
        for (int32_t c : itin) {
            ell.push_back(tt);
            pos.push_back(uint8_t(c));
            cum.push_back(cc);
            tt += s2_.ret[size_t(c)];
            cc += s2_.offset[size_t(c)];
        }
        ell.push_back(tt); // sentinel: total T-return time
        s3_.ret_T[size_t(t)] = tt;
    }
    for (int name = 1; name <= 4; ++name)
        if (BigInt((long)s3_.ret_T[size_t(s3_.pos(name))]) != table_.at(3, name))
            throw DomainError("third-stage return times disagree with the return table");
}

EnumeratedStage KeaneHierarchy::induce_enumerated(i128 a, i128 b, bool flipped,
                                                  const Budget& budget) const {
    IntMap4 M;
    for (int j = 0; j < 4; ++j) {
        M.lo[j] = left_[size_t(j)];
        M.hi[j] = left_[size_t(j)] + len_[size_t(j)];
        M.off[j] = offset_[size_t(j)];
    }
    M.dom_lo = 0;
    M.dom_hi = Q_;
    Arena arena;
    auto pieces = bfs_induce(M, a, b, arena, budget);
    if (pieces.size() != 4) throw DomainError("induction did not yield 4 pieces");
    EnumeratedStage st;
    st.flipped = flipped;
    st.dom_lo = a;
    st.dom_hi = b;
    i128 level_total = 0;
    for (int t = 0; t < 4; ++t) {
        const auto& pc = pieces[size_t(t)];
        st.base_lo[size_t(t)] = pc.org_lo;
        st.base_hi[size_t(t)] = pc.org_hi;
        st.offset[size_t(t)] = pc.cum_off;
        st.ret[size_t(t)] = pc.steps;
        auto itin = arena.walk(pc.itin);
        auto& lv = st.level_lo[size_t(t)];
        lv.reserve(itin.size());
        i128 c = pc.org_lo;
        for (int32_t j : itin) {
            lv.push_back(c);
            c += offset_[size_t(j)];
        }
        level_total += (pc.org_hi - pc.org_lo) * i128(pc.steps);
    }
    if (level_total != Q_) throw DomainError("tower levels do not tile the space");
    return st;
}

namespace {

// Per stage-3 tower: flight steps t >= 1 indexed by cumulative S2-offset, so a
// whole flight can be asked "which step first touches [a,b)" in O(log).
struct CumIndex {
    std::vector<i128> val;                // sorted cum values, steps 1..len-1
    std::vector<int32_t> tmin;            // segment tree of step indices
    int n = 0;
    void build(const std::vector<i128>& cum) {
        std::vector<std::pair<i128, int32_t>> v;
        v.reserve(cum.size());
        for (size_t t = 1; t < cum.size(); ++t) v.push_back({cum[t], int32_t(t)});
        std::sort(v.begin(), v.end());
        n = int(v.size());
        val.resize(size_t(n));
        tmin.assign(size_t(2 * n), INT32_MAX);
        for (int i = 0; i < n; ++i) {
            val[size_t(i)] = v[size_t(i)].first;
            tmin[size_t(n + i)] = v[size_t(i)].second;
        }
        for (int i = n - 1; i >= 1; --i)
            tmin[size_t(i)] = std::min(tmin[size_t(2 * i)], tmin[size_t(2 * i + 1)]);
    }
    // earliest flight step with cum value in [lo,hi), or -1
    int32_t first(i128 lo, i128 hi) const {
        int l = int(std::lower_bound(val.begin(), val.end(), lo) - val.begin());
        int r = int(std::lower_bound(val.begin(), val.end(), hi) - val.begin());
        int32_t best = INT32_MAX;
        for (l += n, r += n; l < r; l /= 2, r /= 2) {
            if (l & 1) best = std::min(best, tmin[size_t(l++)]);
            if (r & 1) best = std::min(best, tmin[size_t(--r)]);
        }
        return best == INT32_MAX ? -1 : best;
    }
};

} // namespace

SubInduction induce_stage2_on(const KeaneHierarchy& H, i128 a, i128 b, const Budget& budget) {
    const EnumeratedStage& s2 = H.stage2();
    const ComposedStage& s3 = H.stage3();
    if (a < s2.dom_lo || b > s2.dom_hi || a >= b)
        throw DomainError("induce_stage2_on needs [a,b) inside the stage-2 base");
    // Return times here reach ~10^13 T-steps, so candidate pieces are walked
    // forward as rigid intervals, whole stage-3 flights (~10^5 S2-steps) at a
    // time, with indexed in-flight queries for the first step that touches
    // [a,b). Whenever a boundary would slice the moving piece, the event is
    // pulled back to a new cut point and the piece is split, so the walk
    // itself certifies that every emitted piece translates rigidly until its
    // first return.
    std::array<CumIndex, 4> cidx;
    for (int p = 0; p < 4; ++p) cidx[size_t(p)].build(s3.cum[size_t(p)]);
    const int q4 = s2.pos(4);

    struct Flight {
        i128 lo, hi; // sub-interval of [a,b)
        i128 steps_S, steps_T;
        i128 off;
    };
    std::vector<Flight> done;
    // a moving piece: T^(steps)([lo,hi)) currently sits at [x, x+(hi-lo))
    struct Walk {
        i128 lo, hi, x;
        i128 steps_S, steps_T;
    };
    std::vector<Walk> work;
    {
        std::vector<i128> cuts{a, b};
        for (int c = 0; c < 4; ++c) {
            i128 bd = s2.base_lo[size_t(c)];
            if (a < bd && bd < b) cuts.push_back(bd);
        }
        std::sort(cuts.begin(), cuts.end());
        cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
        for (size_t i = 0; i + 1 < cuts.size(); ++i)
            work.push_back({cuts[i], cuts[i + 1], cuts[i], 0, 0});
    }
    long long ops = 0;
    while (!work.empty()) {
        Walk w = work.back();
        work.pop_back();
        while (true) {
            if (++ops > budget.max_steps)
                throw BudgetError("first-return walk budget exceeded", ops);
            i128 len = w.hi - w.lo;
            // does the moving piece [x, x+len) touch [a,b)?
            if (w.steps_S > 0 && w.x < b && w.x + len > a) {
                if (a <= w.x && w.x + len <= b) {
                    done.push_back({w.lo, w.hi, w.steps_S, w.steps_T, w.x - w.lo});
                    break;
                }
                // partial contact: the parts inside [a,b) have returned, the
                // rest keeps walking with the same elapsed counts
                i128 in_lo = std::max(w.x, a), in_hi = std::min(w.x + len, b);
                done.push_back({w.lo + (in_lo - w.x), w.lo + (in_hi - w.x), w.steps_S,
                                w.steps_T, w.x - w.lo});
                if (w.x < a)
                    work.push_back({w.lo, w.lo + (a - w.x), w.x, w.steps_S, w.steps_T});
                if (w.x + len > b) {
                    work.push_back({w.lo + (b - w.x), w.hi, b, w.steps_S, w.steps_T});
                }
                break;
            }
            int c = -1;
            for (int t = 0; t < 4; ++t)
                if (s2.base_lo[size_t(t)] <= w.x && w.x < s2.base_hi[size_t(t)]) {
                    c = t;
                    break;
                }
            if (c < 0) throw DomainError("piece left the stage-2 base");
            if (w.x + len > s2.base_hi[size_t(c)]) {
                // a discontinuity of S2 inside the piece: split and continue
                i128 bd = s2.base_hi[size_t(c)];
                work.push_back({w.lo + (bd - w.x), w.hi, bd, w.steps_S, w.steps_T});
                w.hi = w.lo + (bd - w.x);
                len = w.hi - w.lo;
            }
            // inside the third-stage base: split at its piece boundaries so the
            // walk always jumps whole flights from here; otherwise single-step
            int p = -1;
            if (c == q4) {
                for (int t = 0; t < 4; ++t)
                    if (s3.base_lo[size_t(t)] <= w.x && w.x < s3.base_hi[size_t(t)]) {
                        p = t;
                        break;
                    }
                if (w.x + len > s3.base_hi[size_t(p)]) {
                    i128 bd = s3.base_hi[size_t(p)];
                    work.push_back({w.lo + (bd - w.x), w.hi, bd, w.steps_S, w.steps_T});
                    w.hi = w.lo + (bd - w.x);
                    len = w.hi - w.lo;
                }
            }
            if (p >= 0) {
                const i128 A = a - w.x - len + 1, B = b - w.x;
                int32_t t3 = cidx[size_t(p)].first(A, B);
                if (t3 >= 0) { // first in-flight contact with [a,b)
                    w.steps_S += t3;
                    w.steps_T += s3.ell[size_t(p)][size_t(t3)];
                    w.x += s3.cum[size_t(p)][size_t(t3)];
                } else {
                    // The piece creeps through this tower's base by a constant
                    // offset per flight, so long runs of the same flight are
                    // jumped in one go: k flights are safe when the piece stays
                    // in the base and no in-flight or landing position can
                    // touch [a,b) during them (conservative interval bound).
                    const i128 off3 = s3.offset[size_t(p)];
                    i128 k = 1;
                    const auto& val = cidx[size_t(p)].val;
                    if (off3 > 0) {
                        k = (s3.base_hi[size_t(p)] - (w.x + len)) / off3 + 1;
                        auto it = std::lower_bound(val.begin(), val.end(), A);
                        if (it != val.begin())
                            k = std::min(k, (A - *(it - 1) - 1) / off3 + 1);
                        if (A > 0) k = std::min(k, (A - 1) / off3 + 1);
                    } else if (off3 < 0) {
                        const i128 g = -off3;
                        k = (w.x - s3.base_lo[size_t(p)]) / g + 1;
                        auto it = std::lower_bound(val.begin(), val.end(), B);
                        if (it != val.end()) k = std::min(k, (*it - B) / g + 1);
                        if (B <= 0) k = std::min(k, (-B) / g + 1);
                    }
                    // off3 == 0 keeps k = 1: the landing (same position) is
                    // checked at the top of the loop, and a contact there is
                    // guaranteed eventually because every point's S2-orbit is
                    // a cycle through its own start in [a,b)
                    w.steps_S += k * i128(s3.ret_S[size_t(p)]);
                    w.steps_T += k * i128(s3.ret_T[size_t(p)]);
                    w.x += k * off3;
                }
            } else {
                w.steps_S += 1;
                w.steps_T += i128(s2.ret[size_t(c)]);
                w.x += s2.offset[size_t(c)];
            }
        }
    }
    std::sort(done.begin(), done.end(),
              [](const Flight& u, const Flight& v) { return u.lo < v.lo; });

    SubInduction out;
    i128 tile_S = 0, tile_T = 0;
    for (const auto& f : done) {
        out.pieces.push_back({f.lo, f.hi, f.steps_S, f.steps_T, f.off});
        tile_S += (f.hi - f.lo) * i128(f.steps_S);
        tile_T += (f.hi - f.lo) * f.steps_T;
    }
    // The flights are disjoint, so they fit inside the stage-2 base in S2-time
    // and inside [0,Q) in T-time (strictly inside when some orbits of the
    // finite integer model miss [a,b)), and the return map must be a bijection
    // of [a,b): its images tile [a,b) exactly.
    if (tile_S > s2.dom_hi - s2.dom_lo || tile_T > H.Q())
        throw DomainError("return pieces overlap");
    std::vector<std::pair<i128, i128>> img;
    for (const auto& pc : out.pieces) img.push_back({pc.org_lo + pc.off, pc.org_hi + pc.off});
    std::sort(img.begin(), img.end());
    i128 at = a;
    for (const auto& [l2, h2] : img) {
        if (l2 != at) throw DomainError("return images do not tile [a,b)");
        at = h2;
    }
    if (at != b) throw DomainError("return images do not tile [a,b)");
    return out;
}

std::vector<TowerCell> advance_cells(const KeaneHierarchy& H, std::vector<TowerCell> in,
                                     i128 delta, const Budget& budget) {
    if (delta < 0) throw DomainError("advance_cells needs delta >= 0");
    const EnumeratedStage& s2 = H.stage2();
    const ComposedStage& s3 = H.stage3();
    const int q4 = s2.pos(4);
    struct Item {
        TowerCell cell;
        i128 rem;
    };
    std::vector<Item> work;
    work.reserve(in.size());
    for (const auto& cell : in) {
        if (cell.c < 0 || cell.c >= 4 || cell.h < 0 || cell.h >= s2.ret[size_t(cell.c)] ||
            cell.lo < s2.base_lo[size_t(cell.c)] || cell.hi > s2.base_hi[size_t(cell.c)] ||
            cell.lo >= cell.hi)
            throw DomainError("advance_cells: malformed tower cell");
        work.push_back({cell, delta});
    }
    std::vector<TowerCell> out;
    long long ops = 0;
    auto guard = [&] {
        if (++ops > budget.max_steps) throw BudgetError("piece jump budget exceeded", ops);
    };
    while (!work.empty()) {
        auto [cell, rem] = work.back();
        work.pop_back();
        int c = cell.c;
        long long h = cell.h;
        i128 lo = cell.lo, hi = cell.hi;
        while (true) {
            guard();
            if (c == q4 && h == 0) {
                // [lo,hi) sits in the third-stage base: split at its pieces,
                // then jump whole flights or descend into the last partial one
                for (int p = 0; p < 4; ++p) {
                    i128 bd = s3.base_lo[size_t(p)];
                    if (lo < bd && bd < hi) {
                        work.push_back({{q4, 0, bd, hi}, rem});
                        hi = bd;
                    }
                }
                int p = -1;
                for (int t = 0; t < 4; ++t)
                    if (s3.base_lo[size_t(t)] <= lo && lo < s3.base_hi[size_t(t)]) {
                        p = t;
                        break;
                    }
                if (p < 0) throw DomainError("point outside the third-stage base");
                if (rem >= i128(s3.ret_T[size_t(p)])) {
                    // jump whole flights; runs of the same flight collapse to
                    // one arithmetic step while the cell stays in this base
                    const i128 off3 = s3.offset[size_t(p)];
                    i128 k = rem / i128(s3.ret_T[size_t(p)]);
                    if (off3 > 0)
                        k = std::min(k, (s3.base_hi[size_t(p)] - hi) / off3 + 1);
                    else if (off3 < 0)
                        k = std::min(k, (lo - s3.base_lo[size_t(p)]) / (-off3) + 1);
                    rem -= k * i128(s3.ret_T[size_t(p)]);
                    lo += k * off3;
                    hi += k * off3;
                    continue; // the flight lands back in the third-stage base
                }
                const auto& ell = s3.ell[size_t(p)];
                size_t t3 = size_t(std::upper_bound(ell.begin(), ell.end(), (long long)rem) -
                                   ell.begin()) - 1;
                out.push_back({int(s3.pos_at[size_t(p)][t3]), (long long)rem - ell[t3],
                               lo + s3.cum[size_t(p)][t3], hi + s3.cum[size_t(p)][t3]});
                break;
            }
            i128 to_top = i128(s2.ret[size_t(c)]) - i128(h);
            if (rem < to_top) {
                out.push_back({c, h + (long long)rem, lo, hi});
                break;
            }
            rem -= to_top;
            lo += s2.offset[size_t(c)];
            hi += s2.offset[size_t(c)];
            h = 0;
            // land in the stage-2 base; split at tower boundaries
            for (int t = 0; t < 4; ++t) {
                i128 bd = s2.base_lo[size_t(t)];
                if (lo < bd && bd < hi) {
                    int tc = -1;
                    for (int u = 0; u < 4; ++u)
                        if (s2.base_lo[size_t(u)] <= bd && bd < s2.base_hi[size_t(u)]) {
                            tc = u;
                            break;
                        }
                    work.push_back({{tc, 0, bd, hi}, rem});
                    hi = bd;
                }
            }
            c = -1;
            for (int t = 0; t < 4; ++t)
                if (s2.base_lo[size_t(t)] <= lo && lo < s2.base_hi[size_t(t)]) {
                    c = t;
                    break;
                }
            if (c < 0) throw DomainError("point outside the stage-2 base");
        }
    }
    std::sort(out.begin(), out.end(), [](const TowerCell& x, const TowerCell& y) {
        return std::tie(x.c, x.h, x.lo) < std::tie(y.c, y.h, y.lo);
    });
    std::vector<TowerCell> merged;
    for (const auto& cell : out) {
        if (!merged.empty() && merged.back().c == cell.c && merged.back().h == cell.h &&
            merged.back().hi == cell.lo)
            merged.back().hi = cell.hi;
        else
            merged.push_back(cell);
    }
    return merged;
}

int KeaneHierarchy::locate(i128 x) const {
    for (int j = 0; j < 4; ++j)
        if (left_[size_t(j)] <= x && x < left_[size_t(j)] + len_[size_t(j)]) return j;
    throw DomainError("integer point outside [0,Q)");
}

i128 KeaneHierarchy::apply(i128 x) const { return x + offset_[size_t(locate(x))]; }

i128 KeaneHierarchy::apply_inverse(i128 x) const {
    for (int k = 3; k >= 0; --k)
        if (img_left_[size_t(k)] <= x) return x - offset_[size_t(img_order_[size_t(k)])];
    throw DomainError("integer point outside [0,Q)");
}

} // namespace keanemix
