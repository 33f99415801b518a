#include "keanemix/mixing.hpp"

#include <algorithm>
#include <chrono>
#include <deque>
#include <future>
#include <map>
#include <random>

namespace keanemix {

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// ---- integer interval sets (fast path for the naive checker) ----

using ISeg = std::pair<i128, i128>;

struct IntSetI {
    std::vector<ISeg> ps; // sorted disjoint

    static IntSetI normalize(std::vector<ISeg> v) {
        std::sort(v.begin(), v.end());
        IntSetI out;
        for (auto& s : v) {
            if (s.second <= s.first) continue;
            if (!out.ps.empty() && s.first <= out.ps.back().second)
                out.ps.back().second = std::max(out.ps.back().second, s.second);
            else
                out.ps.push_back(s);
        }
        return out;
    }
    bool intersects(const IntSetI& o) const {
        size_t i = 0, j = 0;
        while (i < ps.size() && j < o.ps.size()) {
            if (ps[i].first < o.ps[j].second && o.ps[j].first < ps[i].second) return true;
            if (ps[i].second < o.ps[j].second)
                ++i;
            else
                ++j;
        }
        return false;
    }
    bool subset_of(const IntSetI& o) const {
        size_t j = 0;
        for (const auto& a : ps) {
            while (j < o.ps.size() && o.ps[j].second <= a.first) ++j;
            if (j >= o.ps.size() || !(o.ps[j].first <= a.first && a.second <= o.ps[j].second))
                return false;
        }
        return true;
    }
};

struct IntIet4 {
    i128 lo[4], hi[4], off[4], Q;
    int locate(i128 x) const {
        for (int c = 0; c < 4; ++c)
            if (lo[c] <= x && x < hi[c]) return c;
        throw DomainError("integer point outside map");
    }
};

// ---- stage-2 slot/ring engine (the [c_k, d_k] windows) ----

struct Stage2Engine {
    const KeaneHierarchy& H;
    const EnumeratedStage& s2;
    int n_towers = 4;
    std::array<long long, 4> R{};
    std::array<i128, 4> BL{}, BH{}, OFF{};

    int probe_tower;                       // stage-1 position holding the targets
    std::vector<i128> probe_lo;            // by level index (height order)
    i128 probe_len = 0;
    int n_probes = 0;
    // probe cell per stage-2 level, -1 when outside the probe tower
    std::array<std::vector<int>, 4> probe_map{};

    static constexpr long long RING = 8192;
    std::vector<long long> stamps;         // [probe][t % RING]
    struct Wit {
        int c = -1;
        long long t0 = 0;
        i128 lo = 0;
    };
    std::vector<Wit> wit;

    struct Seg {
        long long t0;
        i128 lo, hi;
    };
    std::array<std::deque<Seg>, 4> q;      // FIFO per tower, return order
    long long alive = 0, peak = 0, events = 0, insertions = 0;

    explicit Stage2Engine(const KeaneHierarchy& h) : H(h), s2(h.stage2()) {
        for (int c = 0; c < 4; ++c) {
            R[size_t(c)] = s2.ret[size_t(c)];
            BL[size_t(c)] = s2.base_lo[size_t(c)];
            BH[size_t(c)] = s2.base_hi[size_t(c)];
            OFF[size_t(c)] = s2.offset[size_t(c)];
        }
        const auto& s1 = H.stage1();
        probe_tower = s1.pos(2);
        probe_lo = s1.level_lo[size_t(probe_tower)];
        probe_len = s1.base_len(probe_tower);
        n_probes = int(probe_lo.size());

        // sorted view of probe levels for containment lookups
        std::vector<std::pair<i128, int>> sorted_probe;
        for (int qd = 0; qd < n_probes; ++qd) sorted_probe.push_back({probe_lo[size_t(qd)], qd});
        std::sort(sorted_probe.begin(), sorted_probe.end());
        for (int c = 0; c < 4; ++c) {
            i128 len = BH[size_t(c)] - BL[size_t(c)];
            auto& pm = probe_map[size_t(c)];
            pm.reserve(s2.level_lo[size_t(c)].size());
            for (i128 lo : s2.level_lo[size_t(c)]) {
                // last probe starting at or before lo
                size_t a = 0, b = sorted_probe.size();
                while (a + 1 < b) {
                    size_t mid = (a + b) / 2;
                    if (sorted_probe[mid].first <= lo)
                        a = mid;
                    else
                        b = mid;
                }
                int cell = -1;
                i128 plo = sorted_probe[a].first;
                if (plo <= lo && lo + len <= plo + probe_len)
                    cell = sorted_probe[a].second;
                else if (lo < plo + probe_len && plo < lo + len)
                    throw DomainError("stage-2 level straddles a target level");
                pm.push_back(cell);
            }
        }
        stamps.assign(size_t(n_probes) * RING, -1);
        wit.assign(size_t(n_probes) * RING, {});
    }

    void mark(int c, long long t0, i128 lo) {
        const auto& pm = probe_map[size_t(c)];
        for (long long i = 0; i < R[size_t(c)]; ++i) {
            int cell = pm[size_t(i)];
            if (cell < 0) continue;
            long long t = t0 + i;
            if (t < 0) continue;
            size_t idx = size_t(cell) * RING + size_t(t % RING);
            stamps[idx] = t;
            wit[idx] = {c, t0, lo};
        }
    }

    void insert(int c, long long t0, i128 lo, i128 hi) {
        q[size_t(c)].push_back({t0, lo, hi});
        ++alive;
        peak = std::max(peak, alive);
        ++insertions;
        mark(c, t0, lo);
    }

    // seed with the full base of `tower`, shifted by -level (so time n of the
    // engine is time n of T applied to level `level` of that tower)
    void seed_level(int tower, long long level) { insert(tower, -level, BL[size_t(tower)], BH[size_t(tower)]); }

    long long next_event() const {
        long long best = -1;
        for (int c = 0; c < 4; ++c)
            if (!q[size_t(c)].empty()) {
                long long rt = q[size_t(c)].front().t0 + R[size_t(c)];
                if (best < 0 || rt < best) best = rt;
            }
        return best;
    }

    // process every return at time exactly `rt`
    void step(long long rt, const Budget& budget) {
        std::vector<ISeg> incoming;
        for (int c = 0; c < 4; ++c) {
            auto& qc = q[size_t(c)];
            while (!qc.empty() && qc.front().t0 + R[size_t(c)] == rt) {
                incoming.push_back({qc.front().lo + OFF[size_t(c)], qc.front().hi + OFF[size_t(c)]});
                qc.pop_front();
                --alive;
            }
        }
        ++events;
        if (events > budget.max_steps) throw BudgetError("window engine event budget exceeded", rt);
        IntSetI merged = IntSetI::normalize(std::move(incoming));
        for (const auto& [lo, hi] : merged.ps) {
            i128 x = lo;
            while (x < hi) {
                int c = 0;
                while (!(BL[size_t(c)] <= x && x < BH[size_t(c)])) ++c;
                i128 cut = std::min(hi, BH[size_t(c)]);
                insert(c, rt, x, cut);
                x = cut;
            }
        }
        if (alive > budget.max_pieces) throw BudgetError("window engine piece budget exceeded", rt);
    }

    bool all_probes_hit(long long n) const {
        for (int cell = 0; cell < n_probes; ++cell)
            if (stamps[size_t(cell) * RING + size_t(n % RING)] != n) return false;
        return true;
    }
    bool probe_hit(long long n, int cell) const {
        return stamps[size_t(cell) * RING + size_t(n % RING)] == n;
    }
};

// ---- stage-3 FIFO event engine (the [d_k, c_{k+1}] windows, snapshots) ----

struct Stage3Engine {
    const KeaneHierarchy& H;
    const ComposedStage& s3;
    std::array<long long, 4> B{};      // T-return times
    std::array<i128, 4> BL{}, BH{}, OFF{};

    struct Seg {
        long long t0;
        i128 lo, hi;
    };
    std::array<std::deque<Seg>, 4> q;
    long long now = -1;                // all returns <= now processed
    long long alive = 0, peak = 0, events = 0, insertions = 0;

    // marking hook: called once per inserted piece
    virtual void on_insert(int p, long long t0) { (void)p, (void)t0; }
    virtual ~Stage3Engine() = default;

    explicit Stage3Engine(const KeaneHierarchy& h) : H(h), s3(h.stage3()) {
        for (int p = 0; p < 4; ++p) {
            B[size_t(p)] = s3.ret_T[size_t(p)];
            BL[size_t(p)] = s3.base_lo[size_t(p)];
            BH[size_t(p)] = s3.base_hi[size_t(p)];
            OFF[size_t(p)] = s3.offset[size_t(p)];
        }
    }

    void insert(int p, long long t0, i128 lo, i128 hi) {
        q[size_t(p)].push_back({t0, lo, hi});
        ++alive;
        peak = std::max(peak, alive);
        ++insertions;
        on_insert(p, t0);
    }

    // decompose the full base of the stage-2 tower at position `src` into its
    // flight pieces: time n of the engine is time n of T on that base
    void seed_stage2_base(int src) {
        struct Init {
            long long rt;
            int p;
            long long t0;
        };
        std::vector<Init> inits;
        for (int p = 0; p < 4; ++p)
            for (size_t t = 0; t < s3.pos_at[size_t(p)].size(); ++t)
                if (int(s3.pos_at[size_t(p)][t]) == src) {
                    long long t0 = -s3.ell[size_t(p)][t];
                    inits.push_back({t0 + B[size_t(p)], p, t0});
                }
        std::sort(inits.begin(), inits.end(),
                  [](const Init& a, const Init& b) { return a.rt < b.rt; });
        for (const auto& in : inits) insert(in.p, in.t0, BL[size_t(in.p)], BH[size_t(in.p)]);
    }

    long long next_event() const {
        long long best = -1;
        for (int p = 0; p < 4; ++p)
            if (!q[size_t(p)].empty()) {
                long long rt = q[size_t(p)].front().t0 + B[size_t(p)];
                if (best < 0 || rt < best) best = rt;
            }
        return best;
    }

    void run_until(long long n_target, const Budget& budget) {
        while (true) {
            long long rt = next_event();
            if (rt < 0 || rt > n_target) break;
            std::vector<ISeg> incoming;
            for (int p = 0; p < 4; ++p) {
                auto& qp = q[size_t(p)];
                while (!qp.empty() && qp.front().t0 + B[size_t(p)] == rt) {
                    incoming.push_back({qp.front().lo + OFF[size_t(p)], qp.front().hi + OFF[size_t(p)]});
                    qp.pop_front();
                    --alive;
                }
            }
            ++events;
            if (events > budget.max_steps)
                throw BudgetError("event engine budget exceeded", rt);
            IntSetI merged = IntSetI::normalize(std::move(incoming));
            for (const auto& [lo, hi] : merged.ps) {
                i128 x = lo;
                while (x < hi) {
                    int p = 0;
                    while (!(BL[size_t(p)] <= x && x < BH[size_t(p)])) ++p;
                    i128 cut = std::min(hi, BH[size_t(p)]);
                    insert(p, rt, x, cut);
                    x = cut;
                }
            }
            if (alive > budget.max_pieces)
                throw BudgetError("event engine piece budget exceeded", rt);
        }
        now = n_target;
    }

    // location of a live piece at time n: (stage-2 position, height, absolute
    // interval within the stage base I^{(2)})
    struct Cell {
        int c;
        long long h;
        i128 lo, hi;
    };
    std::vector<Cell> snapshot(long long n) const {
        std::vector<Cell> out;
        for (int p = 0; p < 4; ++p)
            for (const auto& sgm : q[size_t(p)]) {
                long long e = n - sgm.t0; // elapsed T-time, in [0, B[p])
                const auto& ell = s3.ell[size_t(p)];
                size_t a = 0, b = ell.size() - 1; // last step with ell <= e
                while (a + 1 < b) {
                    size_t mid = (a + b) / 2;
                    if (ell[mid] <= e)
                        a = mid;
                    else
                        b = mid;
                }
                int c = int(s3.pos_at[size_t(p)][a]);
                long long h = e - ell[a];
                i128 shift = s3.cum[size_t(p)][a];
                out.push_back({c, h, sgm.lo + shift, sgm.hi + shift});
            }
        return out;
    }
};

// marking variant: records entry times into one stage-2 tower base,
// restricted to an allowed family of time windows
struct CoverEngine : Stage3Engine {
    int target;                             // stage-2 position being tracked
    std::array<std::vector<long long>, 4> mark_ell;  // entry offsets per tower
    std::array<std::vector<std::pair<long long, int>>, 4> mark_mod; // (ell mod stride, idx), sorted
    std::vector<uint64_t> cover;            // bit per T-time
    long long horizon = 0;
    long long prefix_end = -1;              // mark everything up to here
    long long sample_first = -1, sample_stride = 0, sample_last = -1, win = 0;

    CoverEngine(const KeaneHierarchy& h, int target_pos) : Stage3Engine(h), target(target_pos) {
        for (int p = 0; p < 4; ++p)
            for (size_t t = 0; t < s3.pos_at[size_t(p)].size(); ++t)
                if (int(s3.pos_at[size_t(p)][t]) == target)
                    mark_ell[size_t(p)].push_back(s3.ell[size_t(p)][t]);
    }

    void configure(long long horizon_, long long prefix_end_, long long sample_first_,
                   long long sample_stride_, long long sample_last_, long long win_) {
        horizon = horizon_;
        prefix_end = prefix_end_;
        sample_first = sample_first_;
        sample_stride = sample_stride_;
        sample_last = sample_last_;
        win = win_;
        cover.assign(size_t(horizon / 64 + 2), 0);
        if (sample_stride > 0)
            for (int p = 0; p < 4; ++p) {
                auto& mm = mark_mod[size_t(p)];
                const auto& me = mark_ell[size_t(p)];
                for (size_t i = 0; i < me.size(); ++i)
                    mm.push_back({me[i] % sample_stride, int(i)});
                std::sort(mm.begin(), mm.end());
            }
    }

    void set_time(long long t) {
        if (t >= 0 && t <= horizon) cover[size_t(t >> 6)] |= uint64_t(1) << (t & 63);
    }

    void on_insert(int p, long long t0) override {
        const auto& me = mark_ell[size_t(p)];
        if (me.empty()) return;
        // prefix region: every mark with t0 + ell <= prefix_end
        if (t0 <= prefix_end) {
            auto it = std::lower_bound(me.begin(), me.end(), -t0);
            for (; it != me.end() && t0 + *it <= prefix_end; ++it) set_time(t0 + *it);
        }
        // sampled windows [s - win, s], s = sample_first + q·stride: a mark at
        // t = t0 + ell falls in one iff (t - (sample_first - win)) mod stride <= win
        if (sample_stride > 0 && sample_last >= sample_first) {
            long long base = sample_first - win;
            // want (ell + t0 - base) mod stride in [0, win]: one or two
            // contiguous residue ranges in the mod-sorted entry table
            long long r0 = ((base - t0) % sample_stride + sample_stride) % sample_stride;
            const auto& mm = mark_mod[size_t(p)];
            auto scan = [&](long long rlo, long long rhi) {
                auto it = std::lower_bound(mm.begin(), mm.end(), std::make_pair(rlo, -1));
                for (; it != mm.end() && it->first <= rhi; ++it) {
                    long long t = t0 + me[size_t(it->second)];
                    if (t >= base && t <= sample_last && t >= 0) set_time(t);
                }
            };
            if (r0 + win < sample_stride) {
                scan(r0, r0 + win);
            } else {
                scan(r0, sample_stride - 1);
                scan(0, (r0 + win) % sample_stride);
            }
        }
    }

    bool covered(long long t) const {
        return t >= 0 && t <= horizon &&
               (cover[size_t(t >> 6)] >> (t & 63)) & 1;
    }
    // every height of the target tower reached at time n
    bool full_column(long long n, long long height) const {
        for (long long h = 0; h < height; ++h)
            if (!covered(n - h)) return false;
        return true;
    }
};

long long ll_from(const BigInt& z, const char* what) {
    if (!z.fits_slong_p()) throw BudgetError(std::string(what) + " exceeds 64-bit window arithmetic");
    return z.get_si();
}

void require_engine_scale(int k) {
    if (k != 0)
        throw BudgetError("tower engines are only enumerable at k = 0 for these parameters "
                          "(deeper stages exceed memory and 128-bit scale)");
}

} // namespace

// ---- naive ground-truth window check ----

MixingWindowResult mixing_window_check(const Iet& T, const IntervalSet& J1,
                                       const IntervalSet& J2, long long n_lo, long long n_hi,
                                       WindowMode mode, long long stride, const Budget& budget) {
    if (J1.empty() || J2.empty()) throw DomainError("mixing_window_check needs nonempty sets");
    if (n_lo < 0 || n_hi < n_lo) throw DomainError("bad window");
    if (mode == WindowMode::Sampled && stride < 1) throw DomainError("bad stride");
    auto t_start = std::chrono::steady_clock::now();

    MixingWindowResult res;
    res.n_lo = n_lo;
    res.n_hi = n_hi;
    res.mode = mode;
    res.stride = mode == WindowMode::Sampled ? stride : 1;

    // integer fast path when everything is commensurable and fits
    IntegerIet TI(T);
    bool fast = TI.fits_fast_path() && T.lo() == 0;
    IntIet4 M{};
    IntSetI S, P;
    if (fast && T.size() <= 4) {
        i128 Q = to_i128(TI.scale());
        M.Q = Q;
        for (int j = 0; j < T.size(); ++j) {
            M.lo[j] = to_i128(TI.left(j));
            M.hi[j] = M.lo[j] + to_i128(TI.lengths()[size_t(j)]);
            M.off[j] = to_i128(TI.offset(j));
        }
        for (int j = T.size(); j < 4; ++j) { // pad: unreachable slots
            M.lo[j] = M.hi[j] = M.off[j] = 0;
        }
        auto scale_set = [&](const IntervalSet& s, IntSetI& out) -> bool {
            std::vector<ISeg> v;
            for (const auto& pc : s.pieces()) {
                Rational a = pc.lo * TI.scale(), b = pc.hi * TI.scale();
                if (a.get_den() != 1 || b.get_den() != 1) return false;
                v.push_back({to_i128(BigInt(a.get_num())), to_i128(BigInt(b.get_num()))});
            }
            out = IntSetI::normalize(std::move(v));
            return true;
        };
        fast = scale_set(J1, S) && scale_set(J2, P);
    } else {
        fast = false;
    }
    res.integer_fast_path = fast;

    long long steps_done = 0;
    auto want = [&](long long n) {
        return n >= n_lo && (mode == WindowMode::Exhaustive || (n - n_lo) % stride == 0);
    };
    auto record = [&](long long n, bool hit, long long pieces) {
        res.ns.push_back(n);
        res.hits.push_back(hit ? 1 : 0);
        res.piece_counts.push_back(pieces);
        if (!hit) {
            ++res.miss_count;
            if (!res.first_miss) res.first_miss = n;
        }
    };

    if (fast) {
        for (long long n = 1; n <= n_hi; ++n) {
            if (++steps_done > budget.max_steps)
                throw BudgetError("mixing_window_check step budget exceeded", n - 1);
            std::vector<ISeg> nxt;
            nxt.reserve(S.ps.size() + 4);
            for (const auto& [lo, hi] : S.ps) {
                i128 x = lo;
                while (x < hi) {
                    int c = M.locate(x);
                    i128 cut = std::min(hi, M.hi[c]);
                    nxt.push_back({x + M.off[c], cut + M.off[c]});
                    x = cut;
                }
            }
            S = IntSetI::normalize(std::move(nxt));
            res.peak_pieces = std::max(res.peak_pieces, (long long)S.ps.size());
            if ((long long)S.ps.size() > budget.max_pieces)
                throw BudgetError("mixing_window_check piece budget exceeded", n);
            if (want(n)) record(n, S.intersects(P), (long long)S.ps.size());
        }
    } else {
        IntervalSet cur = J1;
        for (long long n = 1; n <= n_hi; ++n) {
            if (++steps_done > budget.max_steps)
                throw BudgetError("mixing_window_check step budget exceeded", n - 1);
            cur = image_step(T, cur);
            res.peak_pieces = std::max(res.peak_pieces, (long long)cur.piece_count());
            if ((long long)cur.piece_count() > budget.max_pieces)
                throw BudgetError("mixing_window_check piece budget exceeded", n);
            if (want(n)) record(n, cur.intersects(J2), (long long)cur.piece_count());
        }
    }
    res.wall_seconds = seconds_since(t_start);
    return res;
}

// ---- the [c_k, d_k] window ----

namespace {

struct Lemma2Core {
    Lemma2Report rep;
    // runs the engine; probe_cell < 0 means "every level must be hit"
    Lemma2Core(const KeaneHierarchy& H, long long n_lo, long long n_hi, long long src_level,
               int probe_cell, const Lemma2Options& opt, const Budget& budget) {
        Stage2Engine eng(H);
        const auto& s2 = H.stage2();
        int src = s2.pos(3);
        if (src_level < 0 || src_level >= s2.ret[size_t(src)])
            throw DomainError("source level index out of range");
        eng.seed_level(src, src_level);

        rep.window.n_lo = n_lo;
        rep.window.n_hi = n_hi;
        rep.window.mode = WindowMode::Exhaustive;
        rep.window.integer_fast_path = true;
        rep.target_levels = probe_cell < 0 ? eng.n_probes : 1;
        rep.source_level = src_level;

        std::mt19937_64 rng(opt.rng_seed);
        std::vector<long long> spot_ns;
        if (opt.spot_checks > 0 && probe_cell < 0 && n_hi >= n_lo) {
            std::uniform_int_distribution<long long> dist(n_lo, n_hi);
            for (int i = 0; i < opt.spot_checks; ++i) spot_ns.push_back(dist(rng));
            std::sort(spot_ns.begin(), spot_ns.end());
            spot_ns.erase(std::unique(spot_ns.begin(), spot_ns.end()), spot_ns.end());
        }
        size_t spot_idx = 0;
        struct PendingSpot {
            long long n;
            int cell;
            i128 y;
        };
        std::vector<PendingSpot> pending;

        auto t_start = std::chrono::steady_clock::now();
        long long evaluated = n_lo - 1;
        auto evaluate_to = [&](long long up) {
            up = std::min(up, n_hi);
            for (long long n = evaluated + 1; n <= up; ++n) {
                bool hit = probe_cell < 0 ? eng.all_probes_hit(n) : eng.probe_hit(n, probe_cell);
                rep.window.ns.push_back(n);
                rep.window.hits.push_back(hit ? 1 : 0);
                rep.window.piece_counts.push_back(eng.alive);
                if (!hit) {
                    ++rep.window.miss_count;
                    if (!rep.window.first_miss) rep.window.first_miss = n;
                }
                while (spot_idx < spot_ns.size() && spot_ns[spot_idx] == n) {
                    if (hit) {
                        int cell = int(rng() % uint64_t(eng.n_probes));
                        const auto& w = eng.wit[size_t(cell) * Stage2Engine::RING +
                                                size_t(n % Stage2Engine::RING)];
                        i128 y = (w.lo - eng.BL[size_t(w.c)]) +
                                 s2.level_lo[size_t(w.c)][size_t(n - w.t0)];
                        pending.push_back({n, cell, y});
                    }
                    ++spot_idx;
                }
            }
            evaluated = std::max(evaluated, up);
        };

        while (true) {
            long long rt = eng.next_event();
            if (rt < 0 || rt > n_hi) break;
            evaluate_to(rt - 1);
            eng.step(rt, budget);
            evaluate_to(rt);
        }
        evaluate_to(n_hi);

        rep.window.peak_pieces = eng.peak;
        rep.events = eng.events;

        // independent pointwise certificates: pull the witness point back to
        // time 0 with the plain integer inverse and confirm it lies in J'
        i128 jlo = s2.level_lo[size_t(src)][size_t(src_level)];
        i128 jhi = jlo + s2.base_len(src);
        for (const auto& ps : pending) {
            SpotCheck sc;
            sc.n = ps.n;
            sc.probe = ps.cell;
            i128 x = ps.y;
            for (long long i = 0; i < ps.n; ++i) x = H.apply_inverse(x);
            sc.x = i128_str(x) + "/" + int_str(H.scale());
            // y must sit in the probe level; x must sit in J'
            const auto& s1 = H.stage1();
            i128 plo = s1.level_lo[size_t(eng.probe_tower)][size_t(ps.cell)];
            bool y_ok = plo <= ps.y && ps.y < plo + eng.probe_len;
            sc.verified = y_ok && jlo <= x && x < jhi;
            rep.spot_checks_ok = rep.spot_checks_ok && sc.verified;
            rep.spot_checks.push_back(sc);
        }
        rep.window.wall_seconds = seconds_since(t_start);
    }
};

} // namespace

Lemma2Report lemma2_check(const StageParams& p, int k, int depth, const Lemma2Options& opt,
                          const Budget& budget) {
    if (depth < k + 3) throw DomainError("lemma2_check needs depth >= k+3");
    require_engine_scale(k);
    KeaneHierarchy H(p, depth, budget);
    long long n_lo = ll_from(H.table().c(k), "c_k");
    long long n_hi = ll_from(H.table().d(k), "d_k");
    if (opt.n_hi_override) n_hi = std::min(n_hi, *opt.n_hi_override);
    Lemma2Core core(H, n_lo, n_hi, opt.level_index, -1, opt, budget);
    core.rep.containment_note =
        "deep-orbit containment tested against the stage-(k+2) name-3 tower orbit; "
        "see insertion_delay_steps";
    return core.rep;
}

// ---- the [d_k, c_{k+1}] window ----

namespace {

struct Lemma3Core {
    Lemma3Report rep;
    // tgt_height_index < 0: meets *every* level of the target tower
    Lemma3Core(const KeaneHierarchy& H, long long n_lo, long long n_hi, long long src_level,
               long long tgt_height_index, const Lemma3Options& opt, const Budget& budget) {
        const auto& s2 = H.stage2();
        int src = s2.pos(2), tgt = s2.pos(3);
        long long height = s2.ret[size_t(tgt)];
        if (src_level < 0 || src_level >= s2.ret[size_t(src)])
            throw DomainError("source level index out of range");
        rep.target_levels = tgt_height_index < 0 ? height : 1;

        // engine time is T-time on the source tower *base*; requested time n
        // corresponds to engine time n + src_level
        long long shift = src_level;
        long long prefix_hi = std::min(n_hi, n_lo + opt.exhaustive_span);
        long long stride = std::max<long long>(1, opt.stride);
        long long sample_first = prefix_hi + stride - ((prefix_hi - n_lo) % stride);
        // marks needed down to n - height + 1
        CoverEngine eng(H, tgt);
        eng.configure(n_hi + shift + 1, prefix_hi + shift, sample_first + shift, stride,
                      n_hi + shift, height - 1);
        auto t_start = std::chrono::steady_clock::now();
        eng.seed_stage2_base(src);
        eng.run_until(n_hi + shift, budget);

        auto hit_at = [&](long long n) {
            long long en = n + shift;
            if (tgt_height_index >= 0) return eng.covered(en - tgt_height_index);
            return eng.full_column(en, height);
        };
        auto fill = [&](MixingWindowResult& w, long long lo, long long hi, WindowMode mode,
                        long long st) {
            w.n_lo = lo;
            w.n_hi = hi;
            w.mode = mode;
            w.stride = st;
            w.integer_fast_path = true;
            for (long long n = lo; n <= hi; n += st) {
                bool h = hit_at(n);
                w.ns.push_back(n);
                w.hits.push_back(h ? 1 : 0);
                if (!h) {
                    ++w.miss_count;
                    if (!w.first_miss) w.first_miss = n;
                }
            }
            w.peak_pieces = eng.peak;
        };
        fill(rep.exhaustive, n_lo, prefix_hi, WindowMode::Exhaustive, 1);
        if (sample_first <= n_hi)
            fill(rep.sampled, sample_first, n_hi, WindowMode::Sampled, stride);
        else {
            rep.sampled.n_lo = sample_first;
            rep.sampled.n_hi = n_hi;
            rep.sampled.mode = WindowMode::Sampled;
            rep.sampled.stride = stride;
        }
        rep.events = eng.events;
        rep.peak_pieces = eng.peak;

        // insertion-time progression: longest run of marks spaced b[k+2][2]
        // apart inside the exhaustive prefix, scanning start offsets
        long long step = s2.ret[size_t(s2.pos(2))];
        long long lim = prefix_hi + shift;
        for (long long i = 0; i < std::min<long long>(2 * step + 200, lim); ++i) {
            long long j = 0;
            while (i + j * step <= lim && eng.covered(i + j * step)) ++j;
            if (j > rep.progression_len) {
                rep.progression_len = j;
                rep.progression_start = i;
            }
        }
        rep.exhaustive.wall_seconds = seconds_since(t_start);
        rep.sampled.wall_seconds = rep.exhaustive.wall_seconds;
    }
};

} // namespace

Lemma3Report lemma3_check(const StageParams& p, int k, int depth, const Lemma3Options& opt,
                          const Budget& budget) {
    if (depth < k + 3) throw DomainError("lemma3_check needs depth >= k+3");
    require_engine_scale(k);
    Budget b = budget;
    if (b.max_steps < 1'000'000'000) b.max_steps = 1'000'000'000;
    KeaneHierarchy H(p, depth, b);
    long long n_lo = ll_from(H.table().d(k), "d_k");
    long long n_hi = ll_from(H.table().c(k + 1), "c_{k+1}");
    if (opt.n_hi_override) n_hi = std::min(n_hi, *opt.n_hi_override);
    Lemma3Core core(H, n_lo, n_hi, opt.level_index, -1, opt, b);
    return core.rep;
}

// ---- stitched driver ----

Theorem1Report theorem1_check(const StageParams& p, int k0, int depth, const Theorem1Options& opt,
                              const Budget& budget) {
    if (depth < k0 + 4) throw DomainError("theorem1_check needs depth >= k0+4");
    require_engine_scale(k0);
    Budget b = budget;
    if (b.max_steps < 1'000'000'000) b.max_steps = 1'000'000'000;
    KeaneHierarchy H(p, depth, b);
    Iet T = build_iet(p, depth);
    Interval J1 = opt.J1.value_or(T.interval(1));
    Interval J2 = opt.J2.value_or(T.interval(1));

    const auto& s1 = H.stage1();
    const auto& s2 = H.stage2();
    const BigInt& Q = H.scale();
    auto level_inside = [&](const std::vector<i128>& lvls, i128 len,
                            const Interval& J) -> long long {
        for (size_t i = 0; i < lvls.size(); ++i) {
            Rational lo(from_i128(lvls[i]), Q), hi(from_i128(lvls[i] + len), Q);
            lo.canonicalize();
            hi.canonicalize();
            if (J.lo <= lo && hi <= J.hi) return (long long)i;
        }
        return -1;
    };
    int s2t3 = s2.pos(3), s2t2 = s2.pos(2), s1t2 = s1.pos(2);
    long long a_lvl = level_inside(s2.level_lo[size_t(s2t3)], s2.base_len(s2t3), J1);
    long long b_lvl = level_inside(s1.level_lo[size_t(s1t2)], s1.base_len(s1t2), J2);
    long long c_lvl = level_inside(s2.level_lo[size_t(s2t2)], s2.base_len(s2t2), J1);
    long long d_lvl = level_inside(s2.level_lo[size_t(s2t3)], s2.base_len(s2t3), J2);
    if (a_lvl < 0 || b_lvl < 0 || c_lvl < 0 || d_lvl < 0)
        throw DomainError("J1/J2 do not contain the required tower levels; "
                          "choose larger intervals (or a deeper start)");

    Theorem1Report rep;
    rep.j1_level = "stage-2 name-3 tower level " + std::to_string(a_lvl);
    rep.j2_level_first = "stage-1 name-2 tower level " + std::to_string(b_lvl);
    rep.j1_level_second = "stage-2 name-2 tower level " + std::to_string(c_lvl);
    rep.j2_level_second = "stage-2 name-3 tower level " + std::to_string(d_lvl);

    long long c_k = ll_from(H.table().c(k0), "c_k");
    long long d_k = ll_from(H.table().d(k0), "d_k");
    long long c_k1 = ll_from(H.table().c(k0 + 1), "c_{k+1}");
    if (opt.n_hi_override) c_k1 = std::min(c_k1, *opt.n_hi_override);

    Lemma2Options l2o;
    l2o.spot_checks = 0;
    Lemma3Options l3o;
    l3o.exhaustive_span = opt.exhaustive_span;
    l3o.stride = opt.stride;
    if (opt.threads >= 2) {
        auto fut = std::async(std::launch::async, [&] {
            return Lemma2Core(H, c_k, d_k, a_lvl, b_lvl, l2o, b).rep;
        });
        rep.second_window = Lemma3Core(H, d_k, c_k1, c_lvl, d_lvl, l3o, b).rep;
        rep.first_window = fut.get();
    } else {
        rep.first_window = Lemma2Core(H, c_k, d_k, a_lvl, b_lvl, l2o, b).rep;
        rep.second_window = Lemma3Core(H, d_k, c_k1, c_lvl, d_lvl, l3o, b).rep;
    }

    rep.covered_lo = c_k;
    rep.covered_hi = c_k1;
    rep.certified_prefix = rep.first_window.window.all_hit() &&
                           rep.first_window.window.mode == WindowMode::Exhaustive;
    return rep;
}

// ---- the non-mixing obstruction ----

ObstructionResult obstruction_check(const Iet& T, const Interval& V, long long l,
                                    const std::vector<long long>& thresholds,
                                    const IntervalSet& J, const IntervalSet& Jprime,
                                    const Budget& budget) {
    if (J.intersects(Jprime)) throw DomainError("J and J' must be disjoint");
    auto t_start = std::chrono::steady_clock::now();
    ObstructionResult res;
    res.V = V;
    res.J = J;
    res.Jprime = Jprime;

    InducedMap over_V = first_return_map(T, V, budget.max_steps);
    res.s = over_V.piece_count();
    for (int i = 0; i < res.s; ++i) {
        InducedMap over_U = first_return_map(T, over_V.towers[size_t(i)].base, budget.max_steps);
        res.s_i.push_back(over_U.piece_count());
        for (int j = 0; j < over_U.piece_count(); ++j) {
            res.r.push_back(over_U.return_time(j));
            res.r_index.push_back({i, j});
        }
    }
    res.min_r = *std::min_element(res.r.begin(), res.r.end());
    long long need = l;
    for (long long t : thresholds) need = std::max(need, t);
    res.r_above_threshold = res.min_r > need;
    if (!res.r_above_threshold)
        throw DomainError("witness interval does not qualify: some first return is too short");

    std::vector<i128> rs = res.r;
    std::sort(rs.begin(), rs.end());
    rs.erase(std::unique(rs.begin(), rs.end()), rs.end());
    IntervalSet cur = J;
    bool have = false;
    IntervalSet X;
    i128 done = 0;
    for (i128 r : rs) {
        auto it = iterate_image(T, cur, (long long)(r - done), nullptr, budget);
        cur = it.final_set;
        done = r;
        X = have ? X.intersect(cur) : cur;
        have = true;
        res.snapshot_piece_counts.push_back((long long)cur.piece_count());
    }
    res.X = X;
    res.x_subset_of_J = J.contains(X);
    res.x_meets_Jprime = X.intersects(Jprime);
    res.verdict = res.x_subset_of_J && !res.x_meets_Jprime;
    res.wall_seconds = seconds_since(t_start);
    return res;
}

ObstructionResult keane_obstruction_check(const StageParams& p, int depth,
                                          const KeaneObstructionOptions& opt,
                                          const Budget& budget) {
    if (depth < 3) throw DomainError("keane_obstruction_check needs depth >= 3");
    Budget b = budget;
    if (b.max_steps < 1'000'000'000) b.max_steps = 1'000'000'000;
    auto t_start = std::chrono::steady_clock::now();
    KeaneHierarchy H(p, depth, b);
    const auto& s2 = H.stage2();
    const BigInt& Q = H.scale();
    auto to_rat = [&](i128 v) {
        Rational r(from_i128(v), Q);
        r.canonicalize();
        return r;
    };

    ObstructionResult res;
    res.V = {to_rat(s2.dom_lo), to_rat(s2.dom_hi)};
    res.s = 4;

    // r_{i,j}: exact first-return times of the double induction, summed from
    // the stage-2 return times along second-level flights
    for (int i = 0; i < 4; ++i) {
        auto sub = induce_stage2_on(H, s2.base_lo[size_t(i)], s2.base_hi[size_t(i)], b);
        res.s_i.push_back(int(sub.pieces.size()));
        for (size_t j = 0; j < sub.pieces.size(); ++j) {
            res.r.push_back(sub.pieces[j].steps_T);
            res.r_index.push_back({i, int(j)});
        }
    }
    res.min_r = *std::min_element(res.r.begin(), res.r.end());
    long long need = opt.l;
    for (long long t : opt.thresholds) need = std::max(need, t);
    res.r_above_threshold = res.min_r > need;
    if (!res.r_above_threshold)
        throw DomainError("V = I^{(2)} does not clear the requested return-time threshold");

    // J, J': levels of the stage-2 tower named 1
    int jt = s2.pos(1);
    long long h_J = opt.J_level, h_Jp = opt.Jprime_level;
    if (h_J == h_Jp || h_J < 0 || h_Jp < 0 || h_J >= s2.ret[size_t(jt)] ||
        h_Jp >= s2.ret[size_t(jt)])
        throw DomainError("J and J' must be distinct levels of the name-1 tower");
    i128 jlen = s2.base_len(jt);
    res.J = IntervalSet::interval(to_rat(s2.level_lo[size_t(jt)][size_t(h_J)]),
                                  to_rat(s2.level_lo[size_t(jt)][size_t(h_J)] + jlen));
    res.Jprime = IntervalSet::interval(to_rat(s2.level_lo[size_t(jt)][size_t(h_Jp)]),
                                       to_rat(s2.level_lo[size_t(jt)][size_t(h_Jp)] + jlen));

    // X = ⋂ T^{r}(J) computed without ever materializing T^{n}(J) for large n
    // (that set has Θ(n) pieces): with r1 = min r and δ = r − r1,
    //   X = T^{r1}( J ∩ ⋂_δ T^{δ}(J) ),
    // and each T^{δ}(J) is reached by jumping J through the towers, whole
    // stage-3 flights at a time. J is tiny, so pieces split only at the rare
    // returns that straddle a base boundary.
    std::vector<i128> rs = res.r;
    std::sort(rs.begin(), rs.end());
    rs.erase(std::unique(rs.begin(), rs.end()), rs.end());
    i128 r1 = rs.front();

    // Z = J ∩ ⋂_δ T^{δ}(J), as horizontal subsets of the J cell
    IntSetI Z;
    Z.ps.push_back({s2.base_lo[size_t(jt)], s2.base_hi[size_t(jt)]});
    for (size_t t = 1; t < rs.size(); ++t) {
        i128 delta = rs[t] - r1;
        auto moved = advance_cells(
            H, {{jt, h_J, s2.base_lo[size_t(jt)], s2.base_hi[size_t(jt)]}}, delta, b);
        res.snapshot_piece_counts.push_back((long long)moved.size());
        std::vector<ISeg> in_cell;
        for (const auto& pc : moved)
            if (pc.c == jt && pc.h == h_J) in_cell.push_back({pc.lo, pc.hi});
        IntSetI F = IntSetI::normalize(std::move(in_cell));
        std::vector<ISeg> inter;
        size_t a2 = 0, c2 = 0;
        while (a2 < Z.ps.size() && c2 < F.ps.size()) {
            i128 lo = std::max(Z.ps[a2].first, F.ps[c2].first);
            i128 hi = std::min(Z.ps[a2].second, F.ps[c2].second);
            if (lo < hi) inter.push_back({lo, hi});
            if (Z.ps[a2].second < F.ps[c2].second)
                ++a2;
            else
                ++c2;
        }
        Z = IntSetI::normalize(std::move(inter));
        if (Z.ps.empty()) break;
    }

    // X = T^{r1}(Z); the containment claim is that every piece lands back in
    // the J cell exactly
    std::vector<TowerCell> zc;
    for (const auto& [lo, hi] : Z.ps) zc.push_back({jt, h_J, lo, hi});
    auto xc = advance_cells(H, std::move(zc), r1, b);
    res.snapshot_piece_counts.push_back((long long)xc.size());
    res.x_subset_of_J = true;
    std::vector<Interval> xs;
    for (const auto& pc : xc) {
        if (pc.c != jt || pc.h != h_J) res.x_subset_of_J = false;
        i128 lvl = s2.level_lo[size_t(pc.c)][size_t(pc.h)];
        i128 base = s2.base_lo[size_t(pc.c)];
        xs.push_back({to_rat(lvl + (pc.lo - base)), to_rat(lvl + (pc.hi - base))});
    }
    res.X = IntervalSet(std::move(xs));
    res.x_meets_Jprime = res.X.intersects(res.Jprime);
    res.verdict = res.x_subset_of_J && !res.x_meets_Jprime;
    res.wall_seconds = seconds_since(t_start);
    return res;
}

// ---- insertion-delay containment (deep-orbit reading) ----

long long insertion_delay_steps(const StageParams& p, int k, int depth, const Budget& budget) {
    if (k < 1 || k > 2) throw DomainError("insertion delay measured at stages 1 and 2 only");
    if (depth < k + 2) throw DomainError("insertion_delay_steps needs depth >= k+2");
    KeaneHierarchy H(p, depth, budget);
    const EnumeratedStage& st = k == 1 ? H.stage1() : H.stage2();
    int t2 = st.pos(2), t3 = st.pos(3);

    IntIet4 M{};
    for (int j = 0; j < 4; ++j) {
        M.lo[j] = H.left(j);
        M.hi[j] = H.left(j) + H.length(j);
        M.off[j] = H.apply(H.left(j)) - H.left(j);
    }
    M.Q = H.Q();

    // orbit region of the name-3 tower
    std::vector<ISeg> lv;
    i128 len3 = st.base_len(t3);
    for (i128 lo : st.level_lo[size_t(t3)]) lv.push_back({lo, lo + len3});
    IntSetI orbit3 = IntSetI::normalize(std::move(lv));

    // push the name-2 base through its full climb, keep what lands in I_3
    IntSetI cur;
    cur.ps.push_back({st.base_lo[size_t(t2)], st.base_hi[size_t(t2)]});
    auto step = [&](IntSetI& s) {
        std::vector<ISeg> nxt;
        for (const auto& [lo, hi] : s.ps) {
            i128 x = lo;
            while (x < hi) {
                int c = M.locate(x);
                i128 cut = std::min(hi, M.hi[c]);
                nxt.push_back({x + M.off[c], cut + M.off[c]});
                x = cut;
            }
        }
        s = IntSetI::normalize(std::move(nxt));
    };
    for (long long i = 0; i < st.ret[size_t(t2)]; ++i) step(cur);
    std::vector<ISeg> in3;
    IntSetI base3;
    base3.ps.push_back({st.base_lo[size_t(t3)], st.base_hi[size_t(t3)]});
    {
        size_t a = 0, c = 0;
        while (a < cur.ps.size() && c < base3.ps.size()) {
            i128 lo = std::max(cur.ps[a].first, base3.ps[c].first);
            i128 hi = std::min(cur.ps[a].second, base3.ps[c].second);
            if (lo < hi) in3.push_back({lo, hi});
            if (cur.ps[a].second < base3.ps[c].second)
                ++a;
            else
                ++c;
        }
    }
    if (in3.empty()) return 0;
    IntSetI X = IntSetI::normalize(std::move(in3));
    long long contained = 0;
    long long cap = 4 * ll_from(BigInt(p.stages[size_t(k)].second * H.table().at(k, 3)),
                                "containment cap");
    while (contained < cap) {
        if (!X.subset_of(orbit3)) break;
        ++contained;
        step(X);
        if (contained > budget.max_steps) throw BudgetError("insertion delay budget", contained);
    }
    return contained;
}

} // namespace keanemix
