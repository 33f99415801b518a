#include <doctest.h>

#include <algorithm>

#include "keanemix/mixing.hpp"

using namespace keanemix;

namespace {

Iet rotation(const Rational& alpha) {
    return Iet({Rational(1 - alpha), Rational(alpha)}, Permutation::parse("21"));
}

} // namespace

TEST_CASE("window check: a half rotation misses on every odd step") {
    Iet T = rotation(Rational(1, 2));
    IntervalSet J1 = IntervalSet::interval(Rational(0), Rational(1, 2));
    IntervalSet J2 = IntervalSet::interval(Rational(0), Rational(1, 2));
    MixingWindowResult w = mixing_window_check(T, J1, J2, 1, 10);
    REQUIRE(w.ns.size() == 10);
    CHECK(w.miss_count == 5);
    CHECK(w.first_miss == 1); // T(J1) = [1/2,1) misses J2
    for (size_t i = 0; i < w.ns.size(); ++i) CHECK(bool(w.hits[i]) == (w.ns[i] % 2 == 0));
}

TEST_CASE("window check: the identity never moves a set onto a disjoint one") {
    Iet T({Rational(1, 2), Rational(1, 2)}, Permutation::identity(2));
    IntervalSet J1 = IntervalSet::interval(Rational(0), Rational(1, 4));
    IntervalSet J2 = IntervalSet::interval(Rational(1, 2), Rational(3, 4));
    MixingWindowResult w = mixing_window_check(T, J1, J2, 1, 25);
    CHECK(w.miss_count == 25);
    CHECK(w.all_hit() == false);
}

TEST_CASE("window check: sampled mode is labeled and strided") {
    Iet T = rotation(Rational(3, 7));
    IntervalSet J = IntervalSet::interval(Rational(0), Rational(5, 7));
    MixingWindowResult w = mixing_window_check(T, J, J, 10, 100, WindowMode::Sampled, 30);
    CHECK(w.mode == WindowMode::Sampled);
    CHECK(w.ns == std::vector<long long>{10, 40, 70, 100});
}

TEST_CASE("direct obstruction on a rational rotation: X nonempty only inside J") {
    // rotation by 3/7; V = [0,1/7) has uniform first return 7, T|_V and its
    // double induction are 1-piece identities, so X = T^7(J) = J exactly
    Iet T = rotation(Rational(3, 7));
    IntervalSet J = IntervalSet::interval(Rational(1, 7), Rational(2, 7));
    IntervalSet Jp = IntervalSet::interval(Rational(3, 7), Rational(4, 7));
    ObstructionResult r =
        obstruction_check(T, {Rational(0), Rational(1, 7)}, 1, {2, 3}, J, Jp);
    CHECK(r.s == 1);
    REQUIRE(r.r.size() == 1);
    CHECK(r.r[0] == 7);
    CHECK(r.min_r == 7);
    CHECK(r.r_above_threshold);
    REQUIRE_FALSE(r.X.empty());
    CHECK(r.J.contains(r.X));
    CHECK(r.X.contains(r.J));
    CHECK(r.x_subset_of_J);
    CHECK_FALSE(r.x_meets_Jprime);
    CHECK(r.verdict);
    // at most d^2 return times for a d-interval exchange
    CHECK(int(r.r.size()) <= 4);
}

TEST_CASE("direct obstruction preconditions: overlapping J and J' are rejected") {
    Iet T = rotation(Rational(3, 7));
    IntervalSet J = IntervalSet::interval(Rational(1, 7), Rational(2, 7));
    IntervalSet Jo = IntervalSet::interval(Rational(3, 14), Rational(5, 14));
    CHECK_THROWS_AS(obstruction_check(T, {Rational(0), Rational(1, 7)}, 1, {}, J, Jo),
                    DomainError);
    // a witness with short first returns does not qualify
    IntervalSet Jp = IntervalSet::interval(Rational(3, 7), Rational(4, 7));
    CHECK_THROWS_AS(obstruction_check(T, {Rational(0), Rational(5, 7)}, 20, {}, J, Jp),
                    DomainError);
}

TEST_CASE("constructed-map obstruction at depth 3: exact return spectrum") {
    StageParams p = search_stages(3);
    Budget b{2'000'000'000, 20'000'000};
    ObstructionResult r = keane_obstruction_check(p, 3, {}, b);
    CHECK(r.s == 4);
    CHECK(r.s_i == std::vector<int>{2, 3, 5, 4});
    CHECK(r.r.size() == 14);
    CHECK(r.min_r == 105);
    // the four base return times and both deep Birkhoff sums appear
    std::vector<i128> rs(r.r.begin(), r.r.end());
    std::sort(rs.begin(), rs.end());
    CHECK(std::binary_search(rs.begin(), rs.end(), i128(105)));
    CHECK(std::binary_search(rs.begin(), rs.end(), i128(1997)));
    CHECK(std::binary_search(rs.begin(), rs.end(), i128(213769)));
    CHECK(std::binary_search(rs.begin(), rs.end(), i128(427440089)));
    CHECK(std::binary_search(rs.begin(), rs.end(), i128(427651966)));
    CHECK(std::binary_search(rs.begin(), rs.end(), i128(641534)));
    CHECK(r.x_subset_of_J);
    CHECK_FALSE(r.x_meets_Jprime);
    CHECK(r.verdict);
    // a threshold at the smallest return must be rejected as unmet
    KeaneObstructionOptions too_high;
    too_high.thresholds = {105};
    CHECK_THROWS_AS(keane_obstruction_check(p, 3, too_high, b), DomainError);
}

TEST_CASE("first mixing window at small depth: exhaustive prefix certifies") {
    StageParams p = search_stages(3);
    Budget b{2'000'000'000, 20'000'000};
    Lemma2Options opt;
    opt.spot_checks = 5;
    opt.n_hi_override = 12'000;
    Lemma2Report r = lemma2_check(p, 0, 3, opt, b);
    CHECK(r.window.n_lo == 2004);
    CHECK(r.window.n_hi == 12'000);
    CHECK(r.window.mode == WindowMode::Exhaustive);
    CHECK(r.window.miss_count == 0);
    CHECK(r.target_levels == 17);
    CHECK(r.spot_checks_ok);
    for (const auto& s : r.spot_checks) CHECK(s.verified);
    CHECK(r.window.integer_fast_path);
}

TEST_CASE("second mixing window at small depth: exhaustive span plus labeled sampling") {
    StageParams p = search_stages(3);
    Budget b{2'000'000'000, 20'000'000};
    Lemma3Options opt;
    opt.exhaustive_span = 2'000;
    opt.n_hi_override = 300'000;
    Lemma3Report r = lemma3_check(p, 0, 3, opt, b);
    CHECK(r.exhaustive.n_lo == 211682);
    CHECK(r.exhaustive.n_hi == 213682);
    CHECK(r.exhaustive.mode == WindowMode::Exhaustive);
    CHECK(r.exhaustive.miss_count == 0);
    CHECK(r.sampled.mode == WindowMode::Sampled);
    CHECK(r.sampled.stride == 10'000);
    CHECK(r.sampled.miss_count == 0);
    CHECK(r.sampled.n_hi == 300'000);
    // hit times recur along an arithmetic progression with gap b[2][2]
    CHECK(r.progression_start == 1997);
    CHECK(r.progression_len >= 100);
}

TEST_CASE("insertion delay equals n_k * b[k][3] on the searched parameters") {
    Budget b{2'000'000'000, 20'000'000};
    StageParams p3 = search_stages(3);
    CHECK(insertion_delay_steps(p3, 1, 3, b) == 88); // 22 * 4
    CHECK_THROWS_AS(insertion_delay_steps(p3, 3, 3, b), DomainError);
}

TEST_CASE("window preconditions: lemma checks need enough depth") {
    StageParams p = search_stages(2);
    CHECK_THROWS_AS(lemma2_check(p, 0, 2), DomainError);
    CHECK_THROWS_AS(lemma3_check(p, 0, 2), DomainError);
    CHECK_THROWS_AS(keane_obstruction_check(p, 2), DomainError);
}
