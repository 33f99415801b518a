#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "keanemix/induction.hpp"
#include "keanemix/int128.hpp"
#include "keanemix/keane.hpp"

namespace keanemix {

// Integer-coordinate tower structure of the renaming induction, three stages
// deep, for the long-window engines. Everything lives on [0, Q) with Q the
// integer total of the depth-K IET; all times are plain step counts of T.
//
// Orientation bookkeeping: stage s names run right-to-left when s is odd
// (the renaming flips each time), so named_position() translates between
// interval names (1..4) and left-to-right piece positions.

// One stage with explicitly enumerated levels (feasible for stages 1 and 2).
struct EnumeratedStage {
    bool flipped = false;
    i128 dom_lo = 0, dom_hi = 0;                 // the stage base interval
    std::array<i128, 4> base_lo{}, base_hi{};    // tower bases, position order
    std::array<i128, 4> offset{};                // induced-map translation per tower
    std::array<long long, 4> ret{};              // first-return times under T
    std::array<std::vector<i128>, 4> level_lo{}; // absolute left of T^i(base)
    int pos(int name) const { return named_position(name, flipped); }
    i128 base_len(int p) const { return base_hi[size_t(p)] - base_lo[size_t(p)]; }
};

// The third stage keeps flight tables in steps of the stage-2 induced map S2
// instead of explicit T-levels (there are too many of those).
struct ComposedStage {
    bool flipped = false;
    i128 dom_lo = 0, dom_hi = 0;
    std::array<i128, 4> base_lo{}, base_hi{};
    std::array<i128, 4> offset{};                   // S2-offsets of the induced map
    std::array<long long, 4> ret_T{};               // first-return times under T
    std::array<long long, 4> ret_S{};               // first-return times under S2
    // per tower, per S2-step t: elapsed T-time, stage-2 position entered,
    // cumulative S2-offset (absolute position = base + cum[t])
    std::array<std::vector<long long>, 4> ell{};
    std::array<std::vector<uint8_t>, 4> pos_at{};
    std::array<std::vector<i128>, 4> cum{};
    int pos(int name) const { return named_position(name, flipped); }
    i128 base_len(int p) const { return base_hi[size_t(p)] - base_lo[size_t(p)]; }
};

class KeaneHierarchy {
public:
    // Requires depth >= 3 and an integer scale within the 128-bit budget.
    KeaneHierarchy(const StageParams& p, int depth, const Budget& budget = {});

    const StageParams& params() const { return params_; }
    int depth() const { return depth_; }
    const BigInt& scale() const { return Qz_; }
    i128 Q() const { return Q_; }

    // the ambient integer IET
    int locate(i128 x) const;
    i128 apply(i128 x) const;
    i128 apply_inverse(i128 x) const;
    i128 left(int j) const { return left_[size_t(j)]; }
    i128 length(int j) const { return len_[size_t(j)]; }

    const EnumeratedStage& stage1() const { return s1_; }
    const EnumeratedStage& stage2() const { return s2_; }
    const ComposedStage& stage3() const { return s3_; }

    const ReturnTable& table() const { return table_; }

private:
    StageParams params_;
    int depth_;
    BigInt Qz_;
    i128 Q_ = 0;
    std::array<i128, 4> left_{}, len_{}, offset_{};
    std::array<i128, 4> img_left_{}; // aligned with img_order_
    std::array<int, 4> img_order_{};
    EnumeratedStage s1_, s2_;
    ComposedStage s3_;
    ReturnTable table_;

    EnumeratedStage induce_enumerated(i128 a, i128 b, bool flipped, const Budget& budget) const;
};

// First-return pieces of the stage-2 induced map S2 on [a, b) ⊆ its domain,
// with exact T-step counts (Birkhoff sums of the stage-2 return times).
struct SubInduction {
    struct Piece {
        i128 org_lo = 0, org_hi = 0; // sub-interval of [a, b)
        i128 steps_S = 0;            // first-return time under S2
        i128 steps_T = 0;            // the same flight in steps of T
        i128 off = 0;                // translation applied by the return
    };
    std::vector<Piece> pieces;
};
SubInduction induce_stage2_on(const KeaneHierarchy& H, i128 a, i128 b,
                              const Budget& budget = {});

// A horizontal slice of one stage-2 tower level: the piece T^h([lo,hi)) with
// [lo,hi) inside the base of tower c.
struct TowerCell {
    int c;
    long long h;
    i128 lo, hi;
};

// T^delta applied to tower cells, jumping whole stage-3 flights instead of
// stepping; pieces split only at the return boundaries they actually cross.
std::vector<TowerCell> advance_cells(const KeaneHierarchy& H, std::vector<TowerCell> in,
                                     i128 delta, const Budget& budget = {});

} // namespace keanemix
