#pragma once

#include <array>
#include <memory>
#include <tuple>
#include <utility>
#include <vector>

#include "keanemix/iet.hpp"

namespace keanemix {

// A tower over J: the consecutive images T^0(base), ..., T^{r-1}(base) of one
// induced subinterval before it returns. Levels are pairwise disjoint and the
// levels of all towers over J tile the ambient interval.
struct Tower {
    Interval base;
    long long return_time = 0;
    std::vector<int> itinerary;      // original-interval index per level
    std::vector<Rational> level_lo;  // absolute left endpoint of T^i(base)
    Interval level(long long i) const {
        return {level_lo.at(size_t(i)),
                Rational(level_lo.at(size_t(i)) + (base.hi - base.lo))};
    }
};

class InducedMap {
public:
    Interval domain;                 // J
    std::vector<Tower> towers;       // left-to-right by base position in J
    // visitation[i][j] = number of levels of tower j inside original I_i
    std::vector<std::vector<long long>> visitation;
    // true when J's endpoints cut more pieces than the ambient IET has
    bool extra_pieces = false;

    const Iet& sub_iet() const { return *sub_; }
    int piece_count() const { return int(towers.size()); }
    long long return_time(int j) const { return towers.at(size_t(j)).return_time; }
    Interval tower_level(int j, long long i) const { return towers.at(size_t(j)).level(i); }

    // unique (tower, level) whose level contains x; towers tile the space
    std::pair<int, long long> locate(const Rational& x) const;

    // throws unless the tower levels exactly tile the ambient interval
    void verify_tiling(const Iet& parent) const;

private:
    std::shared_ptr<const Iet> sub_;
    std::vector<std::tuple<Rational, int, long long>> level_index_; // sorted by lo
    friend InducedMap first_return_map(const Iet&, const Interval&, long long);
};

// Exact first-return map of T on J = [a,b): pushes J forward, splitting at
// discontinuities and at J's endpoints, until every piece has returned.
InducedMap first_return_map(const Iet& T, const Interval& J,
                            long long max_steps = 10'000'000);

// One step of the renaming induction: induce on the 4th interval and rename
// the induced subintervals in reverse order so the permutation is (4213)
// again. `flipped` says whether the input IET's own interval names already
// run right-to-left (they alternate down the chain of inductions).
struct FourthInduction {
    InducedMap ind;
    bool parent_flipped = false;
    bool child_flipped = false;             // = !parent_flipped
    Permutation pre_rename_word;            // absolute placement word of the induced map
    Permutation named_word;                 // after reverse naming; (4213) required
    std::array<std::array<long long, 4>, 4> named_visitation{}; // by interval names
    std::array<long long, 4> named_return_times{};
    FourthInduction() : pre_rename_word(Permutation::identity(4)), named_word(Permutation::identity(4)) {}
};

FourthInduction induce_on_fourth(const Iet& T, bool flipped = false,
                                 long long max_steps = 10'000'000);

// position of interval named `name` (1..4) for a given orientation
inline int named_position(int name, bool flipped, int n = 4) {
    return flipped ? n - name : name - 1;
}

} // namespace keanemix
