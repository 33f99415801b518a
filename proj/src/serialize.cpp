#include "keanemix/serialize.hpp"

#include <sstream>

namespace keanemix {

json to_json(const Rational& r) {
    Rational c = r;
    c.canonicalize();
    return rat_str(c);
}

json to_json(const Interval& v) { return json::array({rat_str(v.lo), rat_str(v.hi)}); }

json to_json(const IntervalSet& s) {
    json a = json::array();
    for (const auto& p : s.pieces()) a.push_back(to_json(p));
    return a;
}

json to_json(const Permutation& p) { return json(p.word()); }

json to_json(const Iet& T) {
    json lens = json::array();
    for (const auto& l : T.lengths()) lens.push_back(rat_str(l));
    return json{{"lengths", lens},
                {"permutation", to_json(T.permutation())},
                {"lo", rat_str(T.lo())},
                {"hi", rat_str(T.hi())}};
}

namespace {
// numbers when they round-trip exactly through uint64, strings otherwise
json big_json(const BigInt& z) {
    if (z >= 0 && mpz_sizeinbase(z.get_mpz_t(), 2) <= 53) return json(z.get_ui());
    return json(int_str(z));
}
BigInt big_from_json(const json& j) {
    if (j.is_number_unsigned()) return BigInt(static_cast<unsigned long>(j.get<uint64_t>()));
    if (j.is_number_integer()) return BigInt(static_cast<long>(j.get<int64_t>()));
    return int_parse(j.get<std::string>());
}
} // namespace

json to_json(const LandingMatrix& A) {
    json rows = json::array();
    for (int i = 1; i <= 4; ++i) {
        json row = json::array();
        for (int j = 1; j <= 4; ++j) row.push_back(big_json(A.at(i, j)));
        rows.push_back(row);
    }
    return rows;
}

json to_json(const StageParams& p) {
    json stages = json::array();
    for (const auto& [m, n] : p.stages) stages.push_back(json::array({big_json(m), big_json(n)}));
    json seed = json::array();
    for (const auto& s : p.seed) seed.push_back(rat_str(s));
    return json{{"stages", stages}, {"seed", seed}};
}

StageParams stage_params_from_json(const json& j) {
    StageParams p;
    for (const auto& st : j.at("stages")) {
        if (!st.is_array() || st.size() != 2) throw DomainError("malformed stage pair");
        p.stages.emplace_back(big_from_json(st[0]), big_from_json(st[1]));
    }
    if (j.contains("seed")) {
        const auto& s = j.at("seed");
        if (!s.is_array() || s.size() != 4) throw DomainError("seed must have 4 entries");
        for (int i = 0; i < 4; ++i) p.seed[size_t(i)] = rat_parse(s[size_t(i)].get<std::string>());
    }
    return p;
}

IntervalSet interval_set_from_json(const json& j) {
    std::vector<Interval> ps;
    for (const auto& e : j)
        ps.push_back({rat_parse(e.at(0).get<std::string>()), rat_parse(e.at(1).get<std::string>())});
    return IntervalSet(std::move(ps));
}

json to_json(const ReturnTable& t) {
    json b = json::array();
    for (const auto& row : t.b) {
        json r = json::array();
        for (const auto& v : row) r.push_back(int_str(v));
        b.push_back(r);
    }
    json c = json::array(), d = json::array();
    for (int k = 0; k + 2 <= t.depth(); ++k) {
        c.push_back(int_str(t.c(k)));
        d.push_back(int_str(t.d(k)));
    }
    return json{{"b", b}, {"c", c}, {"d", d}};
}

json to_json(const ConditionReport& r) {
    json entries = json::array();
    for (const auto& e : r.entries)
        entries.push_back(json{{"condition", e.condition},
                               {"k", e.k},
                               {"pass", e.pass},
                               {"witness", e.witness}});
    return json{{"entries", entries},
                {"all_ok", r.all_ok},
                {"units_ratio", rat_str(r.units_ratio)},
                {"any_probable_prime", r.any_probable_prime}};
}

json to_json(const InducedMap& ind) {
    json rt = json::array(), bases = json::array();
    for (const auto& tw : ind.towers) {
        rt.push_back(tw.return_time);
        bases.push_back(to_json(tw.base));
    }
    json vis = json::array(); // row-major
    for (const auto& row : ind.visitation)
        for (long long v : row) vis.push_back(v);
    return json{{"permutation", to_json(ind.sub_iet().permutation())},
                {"return_times", rt},
                {"visitation", vis},
                {"tower_bases", bases},
                {"domain", to_json(ind.domain)},
                {"extra_pieces", ind.extra_pieces}};
}

json to_json(const MixingWindowResult& w) {
    json j{{"window", json::array({w.n_lo, w.n_hi})},
           {"mode", w.mode == WindowMode::Exhaustive ? "exhaustive" : "sampled"},
           {"miss_count", w.miss_count},
           {"peak_pieces", w.peak_pieces},
           {"integer_fast_path", w.integer_fast_path},
           {"all_hit", w.all_hit()}};
    if (w.mode == WindowMode::Sampled) j["stride"] = w.stride;
    if (w.first_miss) j["first_miss"] = *w.first_miss;
    j["checked_points"] = w.ns.size();
    return j;
}

json to_json(const Lemma2Report& r) {
    json spots = json::array();
    for (const auto& s : r.spot_checks)
        spots.push_back(json{{"n", s.n}, {"probe", s.probe}, {"x", s.x}, {"verified", s.verified}});
    return json{{"window", to_json(r.window)},
                {"target_levels", r.target_levels},
                {"source_level", r.source_level},
                {"events", r.events},
                {"spot_checks", spots},
                {"spot_checks_ok", r.spot_checks_ok},
                {"containment_note", r.containment_note}};
}

json to_json(const Lemma3Report& r) {
    return json{{"exhaustive", to_json(r.exhaustive)},
                {"sampled", to_json(r.sampled)},
                {"sampled_region_note",
                 "results in the sampled window are exact at each sampled n only; "
                 "they certify nothing in between"},
                {"target_levels", r.target_levels},
                {"events", r.events},
                {"peak_pieces", r.peak_pieces},
                {"progression_start", r.progression_start},
                {"progression_len", r.progression_len}};
}

json to_json(const Theorem1Report& r) {
    return json{{"j1_level_first", r.j1_level},
                {"j2_level_first", r.j2_level_first},
                {"j1_level_second", r.j1_level_second},
                {"j2_level_second", r.j2_level_second},
                {"first_window", to_json(r.first_window)},
                {"second_window", to_json(r.second_window)},
                {"covered", json::array({r.covered_lo, r.covered_hi})},
                {"certified_prefix", r.certified_prefix}};
}

json to_json(const ObstructionResult& r) {
    json rij = json::array();
    for (size_t t = 0; t < r.r.size(); ++t)
        rij.push_back(json{{"i", r.r_index[t].first},
                           {"j", r.r_index[t].second},
                           {"r", i128_str(r.r[t])}});
    return json{{"V", to_json(r.V)},
                {"s", r.s},
                {"s_i", r.s_i},
                {"r_ij", rij},
                {"min_r", i128_str(r.min_r)},
                {"r_above_threshold", r.r_above_threshold},
                {"J", to_json(r.J)},
                {"Jprime", to_json(r.Jprime)},
                {"X", to_json(r.X)},
                {"snapshot_piece_counts", r.snapshot_piece_counts},
                {"x_subset_of_J", r.x_subset_of_J},
                {"x_meets_Jprime", r.x_meets_Jprime},
                {"verdict", r.verdict}};
}

std::string window_csv(const MixingWindowResult& w) {
    std::ostringstream os;
    os << "n,hit,piece_count\n";
    for (size_t i = 0; i < w.ns.size(); ++i) {
        long long pc = i < w.piece_counts.size() ? w.piece_counts[i] : -1;
        os << w.ns[i] << ',' << int(w.hits[i]) << ',' << pc << '\n';
    }
    return os.str();
}

} // namespace keanemix
