#include <doctest.h>

#include <algorithm>

#include "keanemix/serialize.hpp"

using namespace keanemix;
using nlohmann::json;

TEST_CASE("rationals and interval sets serialize exactly and round-trip") {
    CHECK(to_json(Rational(3, 6)) == json("1/2"));
    CHECK(to_json(Rational(5)) == json("5"));
    IntervalSet s({{Rational(0), Rational(1, 3)}, {Rational(1, 2), Rational(2, 3)}});
    json j = to_json(s);
    REQUIRE(j.is_array());
    REQUIRE(j.size() == 2);
    CHECK(j[0][0] == "0");
    CHECK(j[0][1] == "1/3");
    IntervalSet back = interval_set_from_json(j);
    CHECK(back.contains(s));
    CHECK(s.contains(back));
}

TEST_CASE("stage parameters round-trip through JSON") {
    StageParams p = search_stages(2);
    p.seed = {Rational(1, 3), Rational(1, 6), Rational(1, 4), Rational(1, 4)};
    json j = to_json(p);
    StageParams q = stage_params_from_json(j);
    REQUIRE(q.stages.size() == p.stages.size());
    for (size_t k = 0; k < p.stages.size(); ++k) {
        CHECK(q.stages[k].first == p.stages[k].first);
        CHECK(q.stages[k].second == p.stages[k].second);
    }
    for (int i = 0; i < 4; ++i) CHECK(q.seed[size_t(i)] == p.seed[size_t(i)]);
    CHECK_THROWS(stage_params_from_json(json{{"bogus", 1}}));
}

TEST_CASE("return table serializes as exact decimal strings") {
    StageParams p = search_stages(2);
    json j = to_json(return_table(p, 2));
    CHECK(j["b"][2][1] == "1997");
    CHECK(j["c"][0] == "2004");
    CHECK(j["d"][0] == "211682");
}

TEST_CASE("IET and landing matrix dumps are exact") {
    StageParams p = search_stages(1);
    json j = to_json(build_iet(p, 1));
    CHECK(j["lengths"][0] == "1/21");
    CHECK(j["lengths"][1] == "25/42");
    CHECK(j["lengths"][2] == "11/42");
    CHECK(j["lengths"][3] == "2/21");
    CHECK(j["permutation"] == json::array({4, 2, 1, 3}));
    json a = to_json(matrix_A(13, 3));
    CHECK(a[1][1] == 13);
}

TEST_CASE("window results flatten to CSV with one row per checked n") {
    Iet T({Rational(1, 2), Rational(1, 2)}, Permutation::parse("21"));
    IntervalSet J = IntervalSet::interval(Rational(0), Rational(1, 2));
    MixingWindowResult w = mixing_window_check(T, J, J, 1, 4);
    std::string csv = window_csv(w);
    CHECK(csv.substr(0, 18) == "n,hit,piece_count\n");
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 5);
}

TEST_CASE("obstruction reports carry return times wider than 64 bits as strings") {
    ObstructionResult r;
    r.V = {Rational(0), Rational(1, 2)};
    r.s = 1;
    r.s_i = {1};
    r.r = {i128(1) << 90};
    r.r_index = {{0, 0}};
    r.min_r = r.r[0];
    json j = to_json(r);
    CHECK(j["min_r"] == "1237940039285380274899124224");
    CHECK(j["r_ij"][0]["r"] == "1237940039285380274899124224");
}
