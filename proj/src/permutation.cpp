#include "keanemix/permutation.hpp"

namespace keanemix {

Permutation::Permutation(std::vector<int> word) : word_(std::move(word)) {
    const int n = int(word_.size());
    if (n == 0) throw DomainError("empty permutation");
    inv_.assign(size_t(n), 0);
    for (int slot = 1; slot <= n; ++slot) {
        int v = word_[size_t(slot - 1)];
        if (v < 1 || v > n) throw DomainError("permutation entry out of range");
        if (inv_[size_t(v - 1)] != 0) throw DomainError("permutation entry repeated");
        inv_[size_t(v - 1)] = slot;
    }
}

Permutation Permutation::identity(int n) {
    std::vector<int> w(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) w[size_t(i)] = i + 1;
    return Permutation(std::move(w));
}

Permutation Permutation::parse(const std::string& digits) {
    std::vector<int> w;
    for (char c : digits) {
        if (c == '(' || c == ')' || c == ' ') continue;
        if (c < '1' || c > '9') throw DomainError("bad permutation digit");
        w.push_back(c - '0');
    }
    return Permutation(std::move(w));
}

bool Permutation::is_identity() const {
    for (int j = 1; j <= size(); ++j)
        if (placed(j) != j) return false;
    return true;
}

Permutation Permutation::reflected() const {
    const int n = size();
    std::vector<int> w(static_cast<size_t>(n));
    for (int j = 0; j < n; ++j) w[size_t(j)] = n + 1 - word_[size_t(n - 1 - j)];
    return Permutation(std::move(w));
}

std::string Permutation::to_string() const {
    std::string s = "(";
    for (int v : word_) {
        if (v > 9) throw DomainError("to_string only for n <= 9");
        s.push_back(char('0' + v));
    }
    s.push_back(')');
    return s;
}

} // namespace keanemix
