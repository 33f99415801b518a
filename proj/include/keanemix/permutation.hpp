#pragma once

#include <string>
#include <vector>

#include "keanemix/errors.hpp"

namespace keanemix {

// Placement-word convention: entry j (1-based slot) names which original
// interval is placed j-th in the image. So (4213) means interval 4 comes
// first, then 2, then 1, then 3.
class Permutation {
public:
    explicit Permutation(std::vector<int> word);
    static Permutation identity(int n);
    static Permutation parse(const std::string& digits); // "4213"

    int size() const { return int(word_.size()); }
    // interval placed at 1-based slot j
    int placed(int slot) const { return word_.at(size_t(slot - 1)); }
    // 1-based slot where interval i lands
    int slot_of(int interval) const { return inv_.at(size_t(interval - 1)); }

    bool is_identity() const;
    // Mirror the picture left-right: w'[j] = n+1 - w[n-1-j]. This is what
    // renaming the intervals in reverse order does to the placement word.
    Permutation reflected() const;

    const std::vector<int>& word() const { return word_; }
    std::string to_string() const; // "(4213)" for n <= 9

    bool operator==(const Permutation& o) const { return word_ == o.word_; }
    bool operator!=(const Permutation& o) const { return !(*this == o); }

private:
    std::vector<int> word_;
    std::vector<int> inv_; // inv_[i-1] = slot of interval i
};

} // namespace keanemix
