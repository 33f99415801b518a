#pragma once

#include <array>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "keanemix/iet.hpp"

namespace keanemix {

// The 4x4 landing matrix A_{m,n}:
//   row 1 = (0,   0, 1,   1)
//   row 2 = (m-1, m, 0,   0)
//   row 3 = (n,   n, n-1, n)
//   row 4 = (1,   1, 1,   1)
// Column j records how the j-th renamed subinterval travels through the
// original intervals before first return; row i records how I_i decomposes.
struct LandingMatrix {
    std::array<std::array<BigInt, 4>, 4> a{};
    const BigInt& at(int i, int j) const { return a[size_t(i - 1)][size_t(j - 1)]; } // 1-based
    LandingMatrix operator*(const LandingMatrix& o) const;
    std::array<BigInt, 4> column_sums() const;
    std::array<BigInt, 4> apply(const std::array<BigInt, 4>& v) const; // A·v
};

LandingMatrix matrix_A(const BigInt& m, const BigInt& n);

// The driving parameter sequence (m_k, n_k), k = 0,1,2,..., plus the seed
// length vector for the deepest stage (defaults to uniform).
struct StageParams {
    std::vector<std::pair<BigInt, BigInt>> stages;
    std::array<Rational, 4> seed{Rational(1, 4), Rational(1, 4), Rational(1, 4), Rational(1, 4)};
};

// b[k][j] = first-return time of the j-th named subinterval at stage k to the
// stage-k base (b[0][j] = 1), equal to the column sums of the matrix product
// A_{m_0,n_0}...A_{m_{k-1},n_{k-1}} and satisfying the linear recurrences.
struct ReturnTable {
    std::vector<std::array<BigInt, 4>> b; // b[0..depth], 0-based j = name-1
    int depth() const { return int(b.size()) - 1; }
    const BigInt& at(int k, int j) const { return b[size_t(k)][size_t(j - 1)]; } // 1-based j
    // window bounds, defined for k <= depth-2
    BigInt c(int k) const;
    BigInt d(int k) const;
};

ReturnTable return_table(const StageParams& p, int depth);

// normalize(A_{m_0,n_0}...A_{m_{K-1},n_{K-1}} · seed)
std::array<Rational, 4> lengths_from_params(const StageParams& p, int depth);

struct PrimalityResult {
    bool prime = false;
    bool probable = false; // true when beyond the deterministic witness range
};
PrimalityResult is_prime(const BigInt& x);

struct ConditionEntry {
    int condition; // 1..5
    int k;
    bool pass;
    std::string witness;
};

struct ConditionReport {
    std::vector<ConditionEntry> entries;
    bool all_ok = true;
    Rational units_ratio; // ∏ (1 - 1/b[i][2]) at the deepest stage
    bool any_probable_prime = false;
};

// Conditions, evaluated wherever the table depth allows:
//  1. b[k][2] prime                                   (k = 1..K)
//  2. b[i][2] does not divide b[k][3] for 1 <= i < k  (k = 2..K)
//  3. ∏_{i<=k} (1 - 1/b[i][2]) > 1/2                  (k = 1..K)
//  4. b[k][2]·b[k+1][3] + b[k+1][3] + b[k][4] + b[k-1][4] < m_k·b[k][2],
//     with b[-1][4] := 1                              (stage k = 0..K-1)
//  5. b[k][3]·b[k][2] + b[k][2] < n_k·b[k][3]         (stage k = 0..K-1)
ConditionReport check_conditions(const StageParams& p, int depth);

struct SearchPolicy {
    long long max_prime_scan = 1'000'000; // candidates tried for m_k
    long long max_n_scan = 1'000'000;     // candidates tried for n_k
};

// One stage of the parameter search: scan n_k upward from the condition-5
// minimum until b[k+1][3] lands in a usable unit class mod g = ∏ b[i][2]
// (both [f] and [f + b[k][3] - b[k][1]] units), then scan m_k upward from the
// condition-4 minimum until b[k+1][2] is prime and condition 3 survives.
// Returns (m_k, n_k).
std::pair<BigInt, BigInt> search_stage(const StageParams& prefix, const SearchPolicy& policy = {});

StageParams search_stages(int count, const SearchPolicy& policy = {});

// The stage-`depth` IET itself: permutation (4213), lengths from the params.
Iet build_iet(const StageParams& p, int depth);

} // namespace keanemix
