#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace keanemix {

// Domain/precondition violations: bad input, point outside [0,1), etc.
struct DomainError : std::runtime_error {
    explicit DomainError(const std::string& what) : std::runtime_error(what) {}
};

// A computation hit an explicit resource cap. Never a wrong answer: the
// caller learns how far the computation got and nothing else is claimed.
struct BudgetError : std::runtime_error {
    long long reached;
    explicit BudgetError(const std::string& what, long long reached_ = -1)
        : std::runtime_error(what), reached(reached_) {}
};

// Resource caps threaded through every potentially long-running operation.
struct Budget {
    long long max_steps = 10'000'000;
    long long max_pieces = 20'000'000;
};

} // namespace keanemix
