#include <doctest.h>

#include <random>

#include "keanemix/induction.hpp"
#include "keanemix/keane.hpp"

using namespace keanemix;

namespace {

Iet rotation(const Rational& alpha) {
    // x -> x + alpha mod 1 as a 2-interval exchange
    return Iet({Rational(1 - alpha), Rational(alpha)}, Permutation::parse("21"));
}

} // namespace

TEST_CASE("first-return map of a rational rotation: towers and return times") {
    Iet T = rotation(Rational(3, 7));
    InducedMap ind = first_return_map(T, {Rational(0), Rational(1, 7)});
    // steps of the orbit are multiples of 1/7, so [0,1/7) is hit only when
    // 3n = 0 mod 7: every point first returns after exactly 7 steps
    REQUIRE(ind.piece_count() == 1);
    CHECK(ind.return_time(0) == 7);
    CHECK(ind.towers[0].base.lo == Rational(0));
    CHECK(ind.towers[0].base.hi == Rational(1, 7));
    // the tower levels tile the whole circle
    ind.verify_tiling(T);
    // the induced map is the identity on J
    CHECK(ind.sub_iet().apply(Rational(1, 14)) == Rational(1, 14));
    // locate: T^3(J) = [2/7, 3/7)
    auto [tw, lvl] = ind.locate(Rational(5, 14));
    CHECK(tw == 0);
    CHECK(lvl == 3);
}

TEST_CASE("first-return map of the golden-like rotation on a misaligned window") {
    Iet T = rotation(Rational(5, 13));
    InducedMap ind = first_return_map(T, {Rational(1, 3), Rational(1, 2)});
    ind.verify_tiling(T);
    // Kac: the level measures of all towers sum to the full circle
    Rational total = 0;
    for (const auto& tw : ind.towers) total += tw.base.length() * Rational(long(tw.return_time));
    CHECK(total == 1);
    // itinerary entries match the levels' containing intervals
    for (const auto& tw : ind.towers)
        for (size_t i = 0; i < size_t(tw.return_time); ++i)
            CHECK(T.locate(tw.level_lo[i]) == tw.itinerary[i]);
}

TEST_CASE("tower tiling holds for random IETs and windows") {
    std::mt19937_64 rng(21);
    for (int it = 0; it < 50; ++it) {
        std::uniform_int_distribution<long> num(1, 9);
        std::vector<Rational> lens;
        for (int i = 0; i < 4; ++i) lens.emplace_back(num(rng), 10 + long(rng() % 7));
        std::vector<int> word{1, 2, 3, 4};
        std::shuffle(word.begin(), word.end(), rng);
        Iet T(lens, Permutation(word));
        // a pointwise-fixed interval outside J would trap pieces forever
        bool has_fixed = false;
        for (int j = 0; j < 4; ++j)
            if (T.offset(j) == 0) has_fixed = true;
        if (has_fixed) continue;
        Rational a = T.lo() + T.total() / Rational(3 + long(rng() % 5));
        Rational b = a + T.total() / Rational(7 + long(rng() % 9));
        a.canonicalize();
        b.canonicalize();
        InducedMap ind = first_return_map(T, {a, b});
        // levels may not cover the whole domain (orbits of a non-minimal map
        // can avoid the window), but they must be pairwise disjoint ...
        std::vector<Interval> levels;
        for (const auto& tw : ind.towers)
            for (size_t i = 0; i < tw.level_lo.size(); ++i) levels.push_back(tw.level((long long)i));
        std::sort(levels.begin(), levels.end(),
                  [](const Interval& x, const Interval& y) { return x.lo < y.lo; });
        for (size_t i = 1; i < levels.size(); ++i) REQUIRE(levels[i].lo >= levels[i - 1].hi);
        // ... and the tower bases must tile the window itself
        Rational base_total = 0;
        for (const auto& tw : ind.towers) base_total += tw.base.length();
        REQUIRE(base_total == b - a);
        // return times check out under plain iteration from each base midpoint
        for (const auto& tw : ind.towers) {
            Rational x = (tw.base.lo + tw.base.hi) / 2;
            x.canonicalize();
            Rational y = x;
            for (long long s = 0; s < tw.return_time; ++s) {
                y = T.apply(y);
                if (s + 1 < tw.return_time) REQUIRE((y < a || y >= b));
            }
            REQUIRE(a <= y);
            REQUIRE(y < b);
            REQUIRE(y == ind.sub_iet().apply(x));
        }
    }
}

TEST_CASE("renaming induction: placement word returns to (4213) with flip") {
    StageParams p = search_stages(1);
    Iet T = build_iet(p, 1);
    REQUIRE(T.permutation() == Permutation::parse("4213"));
    FourthInduction fi = induce_on_fourth(T);
    CHECK(fi.child_flipped != fi.parent_flipped);
    CHECK(fi.named_word == Permutation::parse("4213"));
    // the visitation counts by name reproduce the landing matrix exactly
    LandingMatrix A = matrix_A(p.stages[0].first, p.stages[0].second);
    for (int i = 1; i <= 4; ++i)
        for (int j = 1; j <= 4; ++j)
            CHECK(BigInt(long(fi.named_visitation[size_t(i - 1)][size_t(j - 1)])) == A.at(i, j));
    // named return times are the column sums of the landing matrix
    auto cs = A.column_sums();
    for (int j = 0; j < 4; ++j)
        CHECK(BigInt(long(fi.named_return_times[size_t(j)])) == cs[size_t(j)]);
}

TEST_CASE("two successive renaming inductions peel off one matrix each") {
    StageParams p = search_stages(2);
    Iet T = build_iet(p, 2);
    FourthInduction f1 = induce_on_fourth(T);
    LandingMatrix A0 = matrix_A(p.stages[0].first, p.stages[0].second);
    for (int i = 1; i <= 4; ++i)
        for (int j = 1; j <= 4; ++j)
            CHECK(BigInt(long(f1.named_visitation[size_t(i - 1)][size_t(j - 1)])) == A0.at(i, j));
    FourthInduction f2 = induce_on_fourth(f1.ind.sub_iet(), f1.child_flipped);
    LandingMatrix A1 = matrix_A(p.stages[1].first, p.stages[1].second);
    for (int i = 1; i <= 4; ++i)
        for (int j = 1; j <= 4; ++j)
            CHECK(BigInt(long(f2.named_visitation[size_t(i - 1)][size_t(j - 1)])) == A1.at(i, j));
    CHECK(f2.named_word == Permutation::parse("4213"));
}

TEST_CASE("named_position translates names to left-to-right slots") {
    CHECK(named_position(1, false) == 0);
    CHECK(named_position(4, false) == 3);
    CHECK(named_position(1, true) == 3);
    CHECK(named_position(4, true) == 0);
}

TEST_CASE("first_return_map respects the step budget") {
    Iet T = rotation(Rational(3, 7));
    CHECK_THROWS_AS(first_return_map(T, {Rational(0), Rational(1, 7)}, 3), BudgetError);
}
