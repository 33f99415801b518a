// keane-mixer: search driving parameters, build the exact IET, check the
// admissibility conditions, verify the mixing windows and the non-mixing
// obstruction, and dump exact internals.
//
// Exit codes: 0 certified, 10 sampled-pass, 20 counterexample,
//             30 budget exceeded, 64 usage/precondition error.

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>

#include "keanemix/induction.hpp"
#include "keanemix/mixing.hpp"
#include "keanemix/serialize.hpp"

using namespace keanemix;
using nlohmann::json;

namespace {

enum Exit { kCertified = 0, kSampledPass = 10, kCounterexample = 20, kBudget = 30, kUsage = 64 };

int log_level() {
    const char* v = std::getenv("KEANE_MIXER_LOG");
    return v ? std::atoi(v) : 0;
}
void info(const std::string& msg) {
    if (log_level() >= 1) std::cerr << "[keane-mixer] " << msg << "\n";
}

struct Common {
    std::string params_file;
    int stages = 0;         // search on the fly when no params file
    std::string seed;       // "p/q,p/q,p/q,p/q"
    long long budget_steps = 0, budget_pieces = 0;
    std::string out;
    int threads = 1;

    void attach(CLI::App* app, bool with_stages = true) {
        app->add_option("--params", params_file, "StageParams JSON file");
        if (with_stages)
            app->add_option("--stages", stages, "search this many stages instead of --params");
        app->add_option("--seed", seed, "seed lengths, four comma-separated rationals");
        app->add_option("--budget-steps", budget_steps, "step/event budget override");
        app->add_option("--budget-pieces", budget_pieces, "piece budget override");
        app->add_option("--out", out, "output file (JSON report)");
        app->add_option("--threads", threads, "worker threads for sub-window jobs");
    }

    Budget budget() const {
        Budget b;
        if (budget_steps > 0) b.max_steps = budget_steps;
        if (budget_pieces > 0) b.max_pieces = budget_pieces;
        return b;
    }

    StageParams load() const {
        StageParams p;
        if (!params_file.empty()) {
            std::ifstream in(params_file);
            if (!in) throw DomainError("cannot open params file: " + params_file);
            json j = json::parse(in);
            p = stage_params_from_json(j);
        } else if (stages > 0) {
            info("no --params given; searching " + std::to_string(stages) + " stages");
            p = search_stages(stages);
        } else {
            throw DomainError("need --params or --stages");
        }
        if (!seed.empty()) {
            std::stringstream ss(seed);
            std::string tok;
            for (int i = 0; i < 4; ++i) {
                if (!std::getline(ss, tok, ',')) throw DomainError("seed needs 4 rationals");
                p.seed[size_t(i)] = rat_parse(tok);
            }
        }
        return p;
    }
};

void write_report(const Common& c, json report, const StageParams& p) {
    report["params"] = to_json(p);
    if (c.out.empty()) {
        std::cout << report.dump(2) << "\n";
    } else {
        std::ofstream out(c.out);
        if (!out) throw DomainError("cannot open output file: " + c.out);
        out << report.dump(2) << "\n";
        info("report written to " + c.out);
    }
}

void write_csv(const Common& c, const MixingWindowResult& w, const std::string& suffix) {
    if (c.out.empty()) return;
    std::string path = c.out + suffix + ".csv";
    std::ofstream out(path);
    out << window_csv(w);
    info("plot data written to " + path);
}

json run_config(const Common& c, int depth, int k) {
    Budget b = c.budget();
    return json{{"depth", depth},
                {"k", k},
                {"budget_steps", b.max_steps},
                {"budget_pieces", b.max_pieces},
                {"threads", c.threads}};
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"exact construction and verification of a topologically mixing "
                 "4-interval exchange"};
    app.require_subcommand(1);

    // ---- search ----
    auto* search = app.add_subcommand("search", "search admissible stage parameters");
    Common sc;
    int search_stages_n = 0;
    long long prime_cap = 0, n_cap = 0;
    search->add_option("--stages", search_stages_n, "number of stages to find")->required();
    search->add_option("--prime-scan-cap", prime_cap, "max m candidates per stage");
    search->add_option("--n-scan-cap", n_cap, "max n candidates per stage");
    sc.attach(search, false);

    // ---- build ----
    auto* build = app.add_subcommand("build", "build the exact IET at a given depth");
    Common bc;
    int build_depth = 1;
    build->add_option("--depth", build_depth, "number of matrices applied to the seed");
    bc.attach(build);

    // ---- check ----
    auto* check = app.add_subcommand("check", "evaluate conditions 1-5 on the parameters");
    Common cc;
    int check_depth = 0;
    check->add_option("--depth", check_depth, "table depth (default: stages + 1)");
    cc.attach(check);

    // ---- verify ----
    auto* verify = app.add_subcommand("verify", "run a mixing-window or obstruction check");
    Common vc;
    std::string kind;
    int v_depth = 3, v_k = 0;
    long long v_stride = 10'000, v_span = 10'000, v_nhi = 0, v_level = 0;
    int v_spots = 100;
    long long v_l = 1;
    std::vector<long long> v_thresholds;
    verify->add_option("kind", kind, "lemma2 | lemma3 | theorem1 | obstruction")->required();
    verify->add_option("--depth", v_depth, "hierarchy depth");
    verify->add_option("--k", v_k, "window index k");
    verify->add_option("--stride", v_stride, "sampling stride for the long window");
    verify->add_option("--exhaustive-span", v_span, "per-n span at the start of the long window");
    verify->add_option("--n-hi", v_nhi, "cap the window upper end (budget runs)");
    verify->add_option("--level", v_level, "source tower level index");
    verify->add_option("--spot-checks", v_spots, "pointwise certificates (lemma2)");
    verify->add_option("--l", v_l, "obstruction order threshold");
    verify->add_option("--threshold", v_thresholds, "extra return-time thresholds (obstruction)");
    vc.attach(verify);

    // ---- inspect ----
    auto* inspect = app.add_subcommand("inspect", "dump exact internals");
    Common ic;
    std::string what;
    int i_depth = 1;
    long long i_m = 0, i_n = 0;
    inspect->add_option("what", what, "lengths | towers | matrix | table")->required();
    inspect->add_option("--depth", i_depth, "depth");
    inspect->add_option("--m", i_m, "matrix parameter m");
    inspect->add_option("--n", i_n, "matrix parameter n");
    ic.attach(inspect);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : kUsage;
    }

    try {
        if (*search) {
            if (search_stages_n < 1) throw DomainError("--stages must be >= 1");
            SearchPolicy pol;
            if (prime_cap > 0) pol.max_prime_scan = prime_cap;
            if (n_cap > 0) pol.max_n_scan = n_cap;
            StageParams found;
            json progress = json::array();
            try {
                for (int k = 0; k < search_stages_n; ++k) {
                    auto [m, n] = search_stage(found, pol);
                    found.stages.emplace_back(m, n);
                    progress.push_back(json::array({int_str(m), int_str(n)}));
                    info("stage " + std::to_string(k) + ": m=" + int_str(m) + " n=" + int_str(n));
                }
            } catch (const BudgetError& e) {
                // save partial progress, then report the budget failure
                json rep{{"error", e.what()}, {"stages_found", progress}};
                write_report(sc, rep, found);
                std::cerr << "search budget exhausted: " << e.what() << "\n";
                return kBudget;
            }
            ReturnTable t = return_table(found, search_stages_n);
            ConditionReport cr = check_conditions(found, search_stages_n);
            json rep = to_json(found);
            rep["table"] = to_json(t);
            rep["conditions"] = to_json(cr);
            rep["config"] = run_config(sc, search_stages_n, -1);
            write_report(sc, rep, found);
            std::cout << "found " << search_stages_n << " stages; units ratio "
                      << rat_str(cr.units_ratio) << (cr.all_ok ? "; conditions pass" : "")
                      << "\n";
            return cr.all_ok ? kCertified : kCounterexample;
        }

        if (*build) {
            StageParams p = bc.load();
            Iet T = build_iet(p, build_depth);
            json rep{{"iet", to_json(T)}, {"config", run_config(bc, build_depth, -1)}};
            IntegerIet TI(T);
            rep["integer_scale"] = int_str(TI.scale());
            write_report(bc, rep, p);
            return kCertified;
        }

        if (*check) {
            StageParams p = cc.load();
            int depth = check_depth > 0 ? check_depth : int(p.stages.size());
            ConditionReport cr = check_conditions(p, depth);
            json rep{{"conditions", to_json(cr)},
                     {"table", to_json(return_table(p, depth))},
                     {"config", run_config(cc, depth, -1)}};
            write_report(cc, rep, p);
            std::cout << (cr.all_ok ? "all conditions pass" : "conditions FAIL") << "\n";
            return cr.all_ok ? kCertified : kCounterexample;
        }

        if (*verify) {
            StageParams p = vc.load();
            json rep{{"kind", kind}, {"config", run_config(vc, v_depth, v_k)}};
            int rc = kCertified;

            if (kind == "lemma2") {
                Lemma2Options opt;
                opt.level_index = v_level;
                opt.spot_checks = v_spots;
                if (v_nhi > 0) opt.n_hi_override = v_nhi;
                Lemma2Report r = lemma2_check(p, v_k, v_depth, opt, vc.budget());
                rep["report"] = to_json(r);
                write_csv(vc, r.window, "");
                bool ok = r.window.all_hit() && r.spot_checks_ok;
                std::cout << (ok ? "exhaustive certificate over [" : "MISS in [")
                          << r.window.n_lo << ", " << r.window.n_hi << "], peak pieces "
                          << r.window.peak_pieces << "\n";
                rc = ok ? kCertified : kCounterexample;
            } else if (kind == "lemma3") {
                Lemma3Options opt;
                opt.level_index = v_level;
                opt.exhaustive_span = v_span;
                opt.stride = v_stride;
                if (v_nhi > 0) opt.n_hi_override = v_nhi;
                Lemma3Report r = lemma3_check(p, v_k, v_depth, opt, vc.budget());
                rep["report"] = to_json(r);
                write_csv(vc, r.exhaustive, ".exhaustive");
                write_csv(vc, r.sampled, ".sampled");
                bool ok = r.exhaustive.all_hit() && r.sampled.all_hit();
                bool sampled = !r.sampled.ns.empty();
                std::cout << (ok ? "no miss" : "MISS") << "; exhaustive [" << r.exhaustive.n_lo
                          << ", " << r.exhaustive.n_hi << "], sampled stride "
                          << r.sampled.stride << " to " << r.sampled.n_hi << "\n";
                rc = !ok ? kCounterexample : (sampled ? kSampledPass : kCertified);
            } else if (kind == "theorem1") {
                Theorem1Options opt;
                opt.exhaustive_span = v_span;
                opt.stride = v_stride;
                opt.threads = vc.threads;
                if (v_nhi > 0) opt.n_hi_override = v_nhi;
                Theorem1Report r = theorem1_check(p, v_k, v_depth, opt, vc.budget());
                rep["report"] = to_json(r);
                write_csv(vc, r.first_window.window, ".first");
                write_csv(vc, r.second_window.exhaustive, ".second.exhaustive");
                write_csv(vc, r.second_window.sampled, ".second.sampled");
                bool ok = r.first_window.window.all_hit() &&
                          r.second_window.exhaustive.all_hit() &&
                          r.second_window.sampled.all_hit();
                bool sampled = !r.second_window.sampled.ns.empty();
                std::cout << (ok ? "windows stitched over [" : "MISS in [") << r.covered_lo
                          << ", " << r.covered_hi << "]\n";
                rc = !ok ? kCounterexample : (sampled ? kSampledPass : kCertified);
            } else if (kind == "obstruction") {
                KeaneObstructionOptions opt;
                opt.l = v_l;
                opt.thresholds = v_thresholds;
                ObstructionResult r = keane_obstruction_check(p, v_depth, opt, vc.budget());
                rep["report"] = to_json(r);
                std::cout << (r.verdict ? "verdict true" : "verdict FALSE") << ": min r = "
                          << i128_str(r.min_r) << ", X "
                          << (r.x_subset_of_J ? "inside J" : "NOT inside J")
                          << ", X " << (r.x_meets_Jprime ? "meets" : "misses") << " J'\n";
                rc = r.verdict ? kCertified : kCounterexample;
            } else {
                throw DomainError("unknown verify kind: " + kind);
            }
            write_report(vc, rep, p);
            return rc;
        }

        if (*inspect) {
            if (what == "matrix") {
                if (i_m < 1 || i_n < 1) throw DomainError("inspect matrix needs --m and --n");
                LandingMatrix A = matrix_A(BigInt(long(i_m)), BigInt(long(i_n)));
                json rep{{"matrix", to_json(A)}};
                json cs = json::array();
                for (const auto& s : A.column_sums()) cs.push_back(int_str(s));
                rep["column_sums"] = cs;
                std::cout << rep.dump(2) << "\n";
                return kCertified;
            }
            StageParams p = ic.load();
            if (what == "lengths") {
                auto lens = lengths_from_params(p, i_depth);
                json rep = json::array();
                std::cout << "[";
                for (int j = 0; j < 4; ++j) {
                    rep.push_back(rat_str(lens[size_t(j)]));
                    std::cout << (j ? ", " : "") << rat_str(lens[size_t(j)]);
                }
                std::cout << "]\n";
                write_report(ic, json{{"lengths", rep}}, p);
            } else if (what == "table") {
                ReturnTable t = return_table(p, i_depth);
                write_report(ic, json{{"table", to_json(t)}}, p);
            } else if (what == "towers") {
                Iet T = build_iet(p, i_depth);
                FourthInduction fi = induce_on_fourth(T);
                json rep{{"towers", to_json(fi.ind)}};
                json vis = json::array();
                for (int i = 1; i <= 4; ++i) {
                    json row = json::array();
                    for (int j = 1; j <= 4; ++j)
                        row.push_back(fi.named_visitation[size_t(i - 1)][size_t(j - 1)]);
                    vis.push_back(row);
                }
                rep["named_visitation"] = vis;
                json rt = json::array();
                for (long long r : fi.named_return_times) rt.push_back(r);
                rep["named_return_times"] = rt;
                write_report(ic, rep, p);
            } else {
                throw DomainError("unknown inspect target: " + what);
            }
            return kCertified;
        }
    } catch (const BudgetError& e) {
        std::cerr << "budget exceeded: " << e.what() << " (reached " << e.reached << ")\n";
        return kBudget;
    } catch (const DomainError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsage;
    }
    return kUsage;
}
