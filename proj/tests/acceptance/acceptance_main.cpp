// End-to-end acceptance gate. Each criterion prints exactly one PASS/FAIL
// line with its key measurements; the process exits nonzero if any fail.

#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "keanemix/mixing.hpp"
#include "keanemix/serialize.hpp"

using namespace keanemix;
using Clock = std::chrono::steady_clock;

namespace {

int g_failures = 0;

void criterion(const std::string& name, const std::function<std::string()>& body) {
    auto t0 = Clock::now();
    std::string detail;
    bool ok = true;
    try {
        detail = body();
    } catch (const std::exception& e) {
        ok = false;
        detail = std::string("exception: ") + e.what();
    }
    double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    std::printf("%s  %s (%s; %.1fs)\n", ok ? "PASS" : "FAIL", name.c_str(), detail.c_str(),
                secs);
    std::fflush(stdout);
    if (!ok) ++g_failures;
}

struct CheckFail : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void require(bool cond, const std::string& what) {
    if (!cond) throw CheckFail(what);
}

Iet rotation(const Rational& alpha) {
    return Iet({Rational(1 - alpha), Rational(alpha)}, Permutation::parse("21"));
}

Iet random_iet(std::mt19937_64& rng, int n_max = 6) {
    std::uniform_int_distribution<int> nd(2, n_max);
    int n = nd(rng);
    std::uniform_int_distribution<long> num(1, 12), den(1, 12);
    std::vector<Rational> lens;
    for (int i = 0; i < n; ++i) lens.emplace_back(num(rng), den(rng));
    std::vector<int> word(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) word[size_t(i)] = i + 1;
    std::shuffle(word.begin(), word.end(), rng);
    return Iet(std::move(lens), Permutation(std::move(word)));
}

Rational random_point(std::mt19937_64& rng, const Iet& T) {
    std::uniform_int_distribution<long> num(0, 1'000'000'006);
    Rational t(num(rng), 1'000'000'007);
    Rational x = T.lo() + t * T.total();
    x.canonicalize();
    return x;
}

const Budget kBig{1'000'000'000'000LL, 200'000'000LL};

} // namespace

int main() {
    criterion("three successive renaming inductions reproduce the landing matrices", [] {
        auto t0 = Clock::now();
        StageParams p = search_stages(3);
        Iet T = build_iet(p, 3);
        bool flipped = false;
        for (size_t k = 0; k < 3; ++k) {
            FourthInduction f = induce_on_fourth(T, flipped, kBig.max_steps);
            LandingMatrix A = matrix_A(p.stages[k].first, p.stages[k].second);
            for (int i = 1; i <= 4; ++i)
                for (int j = 1; j <= 4; ++j)
                    require(BigInt(long(f.named_visitation[size_t(i - 1)][size_t(j - 1)])) ==
                                A.at(i, j),
                            "visitation matrix mismatch at stage " + std::to_string(k));
            require(f.named_word == Permutation::parse("4213"), "induced word is not (4213)");
            T = f.ind.sub_iet();
            flipped = f.child_flipped;
        }
        double secs = std::chrono::duration<double>(Clock::now() - t0).count();
        require(secs < 60.0, "exceeded the 60s limit");
        return std::string("3 stages, 48 matrix entries exact");
    });

    criterion("depth-1 lengths match the closed form [2, 2m-1, 4n-1, 4]/(2m+4n+4)", [] {
        std::mt19937_64 rng(101);
        for (int it = 0; it < 20; ++it) {
            BigInt m = 2 + long(rng() % 2000), n = 1 + long(rng() % 2000);
            StageParams p;
            p.stages.emplace_back(m, n);
            auto lens = lengths_from_params(p, 1);
            BigInt D = 2 * m + 4 * n + 4;
            std::array<BigInt, 4> nums = {BigInt(2), BigInt(2 * m - 1), BigInt(4 * n - 1),
                                          BigInt(4)};
            for (int j = 0; j < 4; ++j) {
                Rational e(nums[size_t(j)], D);
                e.canonicalize();
                require(lens[size_t(j)] == e, "length mismatch");
            }
        }
        return std::string("20 random (m, n) pairs exact");
    });

    criterion("return table equals matrix-product column sums at random depths <= 6", [] {
        std::mt19937_64 rng(102);
        for (int it = 0; it < 50; ++it) {
            int depth = 1 + int(rng() % 6);
            StageParams p;
            for (int k = 0; k < depth; ++k)
                p.stages.emplace_back(BigInt(2 + long(rng() % 400)), BigInt(1 + long(rng() % 400)));
            ReturnTable t = return_table(p, depth);
            LandingMatrix prod = matrix_A(p.stages[0].first, p.stages[0].second);
            for (int k = 1; k <= depth; ++k) {
                auto cs = prod.column_sums();
                for (int j = 1; j <= 4; ++j)
                    require(t.at(k, j) == cs[size_t(j - 1)], "column-sum mismatch");
                if (k < depth)
                    prod = prod * matrix_A(p.stages[size_t(k)].first, p.stages[size_t(k)].second);
            }
        }
        return std::string("50 random parameter sequences agree");
    });

    criterion("two-stage parameter search lands on the published values", [] {
        StageParams p = search_stages(2);
        require(p.stages.size() == 2, "wrong stage count");
        require(p.stages[0].first == 13 && p.stages[0].second == 3, "stage 0 != (13, 3)");
        require(p.stages[1].first == 112 && p.stages[1].second == 22, "stage 1 != (112, 22)");
        ReturnTable t = return_table(p, 2);
        require(t.at(1, 2) == 17, "b[1][2] != 17");
        require(t.at(2, 2) == 1997, "b[2][2] != 1997");
        require(t.at(2, 3) == 105, "b[2][3] != 105");
        require(t.c(0) == 2004, "c_0 != 2004");
        require(t.d(0) == 211682, "d_0 != 211682");
        require(check_conditions(p, 2).all_ok, "conditions 1-5 fail on the searched values");
        return std::string("(13,3),(112,22); b, c_0, d_0 all exact");
    });

    criterion("first mixing window certified exhaustively on [2004, 211682] at depth 4", [] {
        StageParams p = search_stages(4);
        Lemma2Report r = lemma2_check(p, 0, 4, {}, kBig);
        require(r.window.mode == WindowMode::Exhaustive, "window not exhaustive");
        require(r.window.n_lo == 2004 && r.window.n_hi == 211682, "window bounds wrong");
        require(r.window.miss_count == 0, "missed " + std::to_string(r.window.miss_count) +
                                              " values of n");
        require(r.spot_checks_ok, "pointwise certificates failed");
        std::ostringstream os;
        os << "0 misses over " << (r.window.n_hi - r.window.n_lo + 1)
           << " values, peak pieces " << r.window.peak_pieces << ", " << r.spot_checks.size()
           << " pointwise certificates";
        return os.str();
    });

    criterion("second mixing window: exhaustive span plus labeled sampling up to c_1", [] {
        StageParams p = search_stages(4);
        Lemma3Options opt;
        opt.exhaustive_span = 10'000;
        opt.stride = 10'000;
        Lemma3Report r = lemma3_check(p, 0, 4, opt, kBig);
        require(r.exhaustive.mode == WindowMode::Exhaustive, "prefix not exhaustive");
        require(r.exhaustive.n_lo == 211682 && r.exhaustive.n_hi == 221682,
                "exhaustive span bounds wrong");
        require(r.exhaustive.miss_count == 0, "exhaustive prefix missed");
        require(r.sampled.mode == WindowMode::Sampled, "tail not labeled as sampled");
        require(r.sampled.n_hi == 427324445, "sampled tail does not reach c_1");
        require(r.sampled.stride <= 10'000, "stride too coarse");
        require(r.sampled.miss_count == 0, "sampled tail missed");
        std::ostringstream os;
        os << "exhaustive [211682, 221682] 0 misses; sampled stride " << r.sampled.stride
           << " to 427324445, " << r.sampled.ns.size() << " samples, 0 misses";
        return os.str();
    });

    criterion("return-time obstruction on the constructed map at depth 4", [] {
        auto t0 = Clock::now();
        StageParams p = search_stages(4);
        KeaneObstructionOptions opt;
        opt.l = 100;
        opt.thresholds = {100};
        ObstructionResult r = keane_obstruction_check(p, 4, opt, kBig);
        require(r.r_above_threshold, "some return time at or below the threshold");
        require(r.min_r > 100, "min return too small");
        require(r.x_subset_of_J, "intersection escapes J");
        require(!r.x_meets_Jprime, "intersection meets J'");
        require(r.verdict, "verdict false");
        double secs = std::chrono::duration<double>(Clock::now() - t0).count();
        require(secs < 300.0, "exceeded the 300s limit");
        std::ostringstream os;
        os << r.r.size() << " return times, min " << i128_str(r.min_r)
           << ", intersection inside J and off J'";
        return os.str();
    });

    criterion("negative controls: half rotation and identity fail the window check", [] {
        Iet half = rotation(Rational(1, 2));
        IntervalSet J = IntervalSet::interval(Rational(0), Rational(1, 2));
        MixingWindowResult w1 = mixing_window_check(half, J, J, 1, 20);
        require(w1.miss_count == 10, "half rotation should miss every odd n");
        require(w1.first_miss && *w1.first_miss == 1, "first miss should be n = 1");
        Iet id({Rational(1, 2), Rational(1, 2)}, Permutation::identity(2));
        IntervalSet A = IntervalSet::interval(Rational(0), Rational(1, 4));
        IntervalSet B = IntervalSet::interval(Rational(1, 2), Rational(3, 4));
        MixingWindowResult w2 = mixing_window_check(id, A, B, 1, 20);
        require(w2.miss_count == 20, "identity should miss every n");
        return std::string("half rotation misses 10/20, identity misses 20/20");
    });

    criterion("two-interval control: obstruction intersection is nonempty only inside J", [] {
        Iet T = rotation(Rational(3, 7));
        IntervalSet J = IntervalSet::interval(Rational(1, 7), Rational(2, 7));
        IntervalSet Jp = IntervalSet::interval(Rational(3, 7), Rational(4, 7));
        ObstructionResult r =
            obstruction_check(T, {Rational(0), Rational(1, 7)}, 1, {2, 3}, J, Jp);
        require(!r.X.empty(), "intersection unexpectedly empty");
        require(r.J.contains(r.X) && r.X.contains(r.J), "intersection != J");
        require(!r.x_meets_Jprime, "intersection meets J'");
        require(r.verdict, "verdict false");
        return std::string("X = J exactly, disjoint from J'");
    });

    criterion("1000-case property suites over random interval exchanges", [] {
        std::mt19937_64 rng(103);
        for (int it = 0; it < 1000; ++it) {
            Iet T = random_iet(rng);
            // bijectivity: interval images tile the domain
            std::vector<Interval> images;
            for (int j = 0; j < T.size(); ++j)
                images.push_back(
                    {T.apply(T.left(j)), Rational(T.apply(T.left(j)) + T.lengths()[size_t(j)])});
            IntervalSet u(std::move(images));
            require(u.piece_count() == 1 && u.measure() == T.total(),
                    "interval images do not tile");
            // measure preservation of one image step
            Rational a = random_point(rng, T), b = random_point(rng, T);
            if (b < a) std::swap(a, b);
            if (a < b) {
                IntervalSet S = IntervalSet::interval(a, b);
                require(image_step(T, S).measure() == S.measure(), "measure not preserved");
            }
            // inverse round-trip
            Rational x = random_point(rng, T);
            require(T.apply_inverse(T.apply(x)) == x, "inverse round-trip failed");
            // integer conjugacy on a grid point
            IntegerIet TI(T);
            BigInt pnum = BigInt(long(rng() % 1'000'000'007)) % TI.scale();
            Rational gx = T.lo() + Rational(pnum) / Rational(TI.scale()) * T.total();
            gx.canonicalize();
            Rational gy = (T.apply(gx) - T.lo()) / T.total() * Rational(TI.scale());
            gy.canonicalize();
            require(gy.get_den() == 1 && BigInt(gy.get_num()) == TI.apply(pnum),
                    "integer conjugacy failed");
        }
        // tower tiling on the constructed map, where minimality guarantees it
        StageParams p = search_stages(2);
        Iet T = build_iet(p, 2);
        FourthInduction f = induce_on_fourth(T);
        f.ind.verify_tiling(T);
        return std::string("4000 random checks plus one full tower tiling");
    });

    if (g_failures) {
        std::printf("%d criterion(s) failed\n", g_failures);
        return 1;
    }
    return 0;
}
