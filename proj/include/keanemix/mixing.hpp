#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "keanemix/hierarchy.hpp"
#include "keanemix/induction.hpp"
#include "keanemix/keane.hpp"

namespace keanemix {

enum class WindowMode { Exhaustive, Sampled };

struct MixingWindowResult {
    long long n_lo = 0, n_hi = 0;
    WindowMode mode = WindowMode::Exhaustive;
    long long stride = 1;                  // sampled mode only
    std::vector<uint8_t> hits;             // per-n (exhaustive) or per-sample
    std::vector<long long> ns;             // the n each entry refers to
    std::vector<long long> piece_counts;   // aligned with hits when tracked
    std::optional<long long> first_miss;
    long long miss_count = 0;
    long long peak_pieces = 0;
    double wall_seconds = 0;
    bool integer_fast_path = false;
    bool all_hit() const { return miss_count == 0; }
};

// Ground truth for T^n(J1) ∩ J2 over a window of n, by direct image
// iteration. Exhaustive mode answers every n in [n_lo, n_hi]; sampled mode
// answers only at n_lo, n_lo+stride, ... and is labeled as such.
MixingWindowResult mixing_window_check(const Iet& T, const IntervalSet& J1,
                                       const IntervalSet& J2, long long n_lo, long long n_hi,
                                       WindowMode mode = WindowMode::Exhaustive,
                                       long long stride = 1, const Budget& budget = {});

struct SpotCheck {
    long long n = 0;
    int probe = 0;            // which target level was certified
    std::string x;            // point of J' (as p/Q) with T^n(x) in that level
    bool verified = false;
};

struct Lemma2Options {
    long long level_index = 0;   // which level of the source tower is J'
    int spot_checks = 100;       // independent pointwise certificates
    uint64_t rng_seed = 1;
    std::optional<long long> n_hi_override; // cap the window (budget runs)
};

struct Lemma2Report {
    MixingWindowResult window;           // hit = meets *every* target level
    long long target_levels = 0;         // tower height of the probe tower
    long long source_level = 0;
    std::vector<SpotCheck> spot_checks;
    bool spot_checks_ok = true;
    long long events = 0;
    std::string containment_note;        // which deep-orbit containment held
};

// For J' a level of the stage-(k+2) tower named 3: T^n(J') meets every level
// of the stage-(k+1) tower named 2, for all n in [c_k, d_k]. Exhaustive.
Lemma2Report lemma2_check(const StageParams& p, int k, int depth,
                          const Lemma2Options& opt = {}, const Budget& budget = {});

struct Lemma3Options {
    long long level_index = 0;           // which level of the stage-(k+2) name-2 tower is J'
    long long exhaustive_span = 10'000;  // [d_k, d_k + span] checked per-n
    long long stride = 10'000;           // sampling stride beyond the span
    std::optional<long long> n_hi_override;
};

struct Lemma3Report {
    MixingWindowResult exhaustive;       // [d_k, d_k + span]
    MixingWindowResult sampled;          // stride over (d_k + span, c_{k+1}]
    long long target_levels = 0;
    long long events = 0;
    long long peak_pieces = 0;
    // insertion-time progression diagnostic: longest run of consecutive j
    // with marks at i + j·b[k+2][2], and its starting i
    long long progression_start = -1;
    long long progression_len = 0;
};

// For J' a level of the stage-(k+2) tower named 2: T^n(J') meets every level
// of the stage-(k+2) tower named 3, for n in [d_k, c_{k+1}].
Lemma3Report lemma3_check(const StageParams& p, int k, int depth,
                          const Lemma3Options& opt = {}, const Budget& budget = {});

struct Theorem1Options {
    std::optional<Interval> J1, J2;      // default: the second original interval
    long long exhaustive_span = 10'000;
    long long stride = 10'000;
    std::optional<long long> n_hi_override;
    int threads = 1;                     // >= 2 runs the two windows concurrently
};

struct Theorem1Report {
    std::string j1_level, j2_level_first, j1_level_second, j2_level_second; // located levels
    Lemma2Report first_window;           // [c_k0, d_k0]
    Lemma3Report second_window;          // [d_k0, c_{k0+1}]
    long long covered_lo = 0, covered_hi = 0;
    bool certified_prefix = true;        // the [c_k0, d_k0] part is exhaustive
};

Theorem1Report theorem1_check(const StageParams& p, int k0, int depth,
                              const Theorem1Options& opt = {}, const Budget& budget = {});

struct ObstructionResult {
    Interval V;
    int s = 0;                                 // pieces of T|_V
    std::vector<int> s_i;                      // pieces of each T|_{U_i}
    std::vector<i128> r;                       // the r_{i,j}, flattened
    std::vector<std::pair<int, int>> r_index;  // (i,j) per entry
    i128 min_r = 0;
    bool r_above_threshold = false;
    IntervalSet J, Jprime, X;                  // X = ⋂ T^{r_{i,j}}(J)
    std::vector<long long> snapshot_piece_counts;
    bool x_subset_of_J = false;
    bool x_meets_Jprime = true;
    bool verdict = false;                      // X ∩ J' = ∅ with X ⊆ J
    double wall_seconds = 0;
};

// Direct form: V explicit, everything by exact IntervalSet iteration.
// Suitable for small return times (controls, shallow witnesses).
ObstructionResult obstruction_check(const Iet& T, const Interval& V, long long l,
                                    const std::vector<long long>& thresholds,
                                    const IntervalSet& J, const IntervalSet& Jprime,
                                    const Budget& budget = {});

struct KeaneObstructionOptions {
    long long l = 1;
    std::vector<long long> thresholds;   // must all be exceeded by every r_{i,j}
    long long J_level = 0;               // levels of the stage-2 tower named 1
    long long Jprime_level = 1;
};

// Accelerated form for the constructed IET with V = the stage-2 base I^{(2)}:
// r_{i,j} from exact return-time sums, T^{r}(J) from tower-coordinate
// snapshots; no orbit of length ~1e8 is ever stepped out.
ObstructionResult keane_obstruction_check(const StageParams& p, int depth,
                                          const KeaneObstructionOptions& opt = {},
                                          const Budget& budget = {});

// Deep-orbit containment: push the stage-k name-2 tower base through its full
// climb, keep the part landing in the name-3 base, and count how many
// consecutive images stay inside the name-3 tower orbit (k = 1 or 2).
long long insertion_delay_steps(const StageParams& p, int k, int depth,
                                const Budget& budget = {});

} // namespace keanemix
