#include "keanemix/keane.hpp"

namespace keanemix {

LandingMatrix matrix_A(const BigInt& m, const BigInt& n) {
    if (m < 1 || n < 1) throw DomainError("matrix_A needs m, n >= 1");
    LandingMatrix A;
    A.a = {{{BigInt(0), BigInt(0), BigInt(1), BigInt(1)},
            {BigInt(m - 1), m, BigInt(0), BigInt(0)},
            {n, n, BigInt(n - 1), n},
            {BigInt(1), BigInt(1), BigInt(1), BigInt(1)}}};
    return A;
}

LandingMatrix LandingMatrix::operator*(const LandingMatrix& o) const {
    LandingMatrix r;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) {
            BigInt s = 0;
            for (int t = 0; t < 4; ++t) s += a[size_t(i)][size_t(t)] * o.a[size_t(t)][size_t(j)];
            r.a[size_t(i)][size_t(j)] = s;
        }
    return r;
}

std::array<BigInt, 4> LandingMatrix::column_sums() const {
    std::array<BigInt, 4> s{BigInt(0), BigInt(0), BigInt(0), BigInt(0)};
    for (int j = 0; j < 4; ++j)
        for (int i = 0; i < 4; ++i) s[size_t(j)] += a[size_t(i)][size_t(j)];
    return s;
}

std::array<BigInt, 4> LandingMatrix::apply(const std::array<BigInt, 4>& v) const {
    std::array<BigInt, 4> r{BigInt(0), BigInt(0), BigInt(0), BigInt(0)};
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) r[size_t(i)] += a[size_t(i)][size_t(j)] * v[size_t(j)];
    return r;
}

BigInt ReturnTable::c(int k) const {
    if (k + 2 > depth()) throw DomainError("c_k needs table depth >= k+2");
    return at(k + 1, 2) * at(k + 2, 3) + at(k + 2, 3) + at(k + 2, 4) + at(k + 1, 4);
}

BigInt ReturnTable::d(int k) const {
    if (k + 2 > depth()) throw DomainError("d_k needs table depth >= k+2");
    return at(k + 2, 3) * at(k + 2, 2) + at(k + 2, 2);
}

ReturnTable return_table(const StageParams& p, int depth) {
    if (depth < 0 || depth > int(p.stages.size()))
        throw DomainError("return_table depth out of range");
    ReturnTable t;
    t.b.push_back({BigInt(1), BigInt(1), BigInt(1), BigInt(1)});
    for (int k = 0; k < depth; ++k) {
        const auto& [m, n] = p.stages[size_t(k)];
        const auto& bk = t.b.back();
        std::array<BigInt, 4> nx{
            BigInt((m - 1) * bk[1] + n * bk[2] + bk[3]),
            BigInt(m * bk[1] + n * bk[2] + bk[3]),
            BigInt(bk[0] + (n - 1) * bk[2] + bk[3]),
            BigInt(bk[0] + n * bk[2] + bk[3]),
        };
        t.b.push_back(nx);
    }
    // cross-check the recurrences against column sums of the matrix product
    if (depth >= 1) {
        LandingMatrix P = matrix_A(p.stages[0].first, p.stages[0].second);
        for (int k = 1; k <= depth; ++k) {
            if (k > 1) P = P * matrix_A(p.stages[size_t(k - 1)].first, p.stages[size_t(k - 1)].second);
            auto cs = P.column_sums();
            for (int j = 0; j < 4; ++j)
                if (cs[size_t(j)] != t.b[size_t(k)][size_t(j)])
                    throw DomainError("return-table recurrence/column-sum mismatch");
        }
    }
    return t;
}

std::array<Rational, 4> lengths_from_params(const StageParams& p, int depth) {
    Rational seed_sum = 0;
    for (const auto& s : p.seed) {
        if (s <= 0) throw DomainError("seed lengths must be positive");
        seed_sum += s;
    }
    // seed numerators over a common denominator; the normalization below
    // makes the actual seed scale irrelevant
    std::vector<Rational> sv(p.seed.begin(), p.seed.end());
    BigInt den = common_denominator(sv);
    std::array<BigInt, 4> v;
    for (int i = 0; i < 4; ++i) {
        Rational s = p.seed[size_t(i)] * den;
        v[size_t(i)] = s.get_num();
    }
    if (depth < 0 || depth > int(p.stages.size()))
        throw DomainError("lengths_from_params depth out of range");
    for (int k = depth - 1; k >= 0; --k)
        v = matrix_A(p.stages[size_t(k)].first, p.stages[size_t(k)].second).apply(v);
    BigInt tot = v[0] + v[1] + v[2] + v[3];
    std::array<Rational, 4> out;
    for (int i = 0; i < 4; ++i) {
        out[size_t(i)] = Rational(v[size_t(i)], tot);
        out[size_t(i)].canonicalize();
    }
    return out;
}

PrimalityResult is_prime(const BigInt& x) {
    if (x < 2) throw DomainError("primality test needs x >= 2");
    PrimalityResult r;
    // deterministic for the first 12 prime witnesses below 3.317e24
    static const BigInt kDeterministicBound("3317044064679887385961981");
    r.probable = x >= kDeterministicBound;
    if (x == 2 || x == 3) {
        r.prime = true;
        r.probable = false;
        return r;
    }
    if (mpz_even_p(x.get_mpz_t())) return r;
    BigInt d = x - 1;
    unsigned long s = mpz_scan1(d.get_mpz_t(), 0);
    mpz_tdiv_q_2exp(d.get_mpz_t(), d.get_mpz_t(), s);
    static const int witnesses[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37};
    const BigInt nm1 = x - 1;
    for (int w : witnesses) {
        if (BigInt(w) >= x) continue;
        BigInt a(w), y;
        mpz_powm(y.get_mpz_t(), a.get_mpz_t(), d.get_mpz_t(), x.get_mpz_t());
        if (y == 1 || y == nm1) continue;
        bool composite = true;
        for (unsigned long i = 1; i < s; ++i) {
            mpz_powm_ui(y.get_mpz_t(), y.get_mpz_t(), 2, x.get_mpz_t());
            if (y == nm1) {
                composite = false;
                break;
            }
        }
        if (composite) return r; // prime = false
    }
    // extra random rounds when beyond the deterministic range
    if (r.probable && mpz_probab_prime_p(x.get_mpz_t(), 24) == 0) return r;
    r.prime = true;
    return r;
}

namespace {

Rational units_ratio_of(const std::vector<BigInt>& primes) {
    Rational r(1);
    for (const auto& p : primes) r *= Rational(BigInt(p - 1), p);
    return r;
}

} // namespace

ConditionReport check_conditions(const StageParams& p, int depth) {
    ReturnTable t = return_table(p, depth);
    ConditionReport rep;
    rep.units_ratio = Rational(1);
    std::vector<BigInt> primes;
    auto add = [&](int cond, int k, bool pass, std::string w) {
        rep.entries.push_back({cond, k, pass, std::move(w)});
        rep.all_ok = rep.all_ok && pass;
    };
    for (int k = 1; k <= depth; ++k) {
        PrimalityResult pr = is_prime(t.at(k, 2));
        rep.any_probable_prime = rep.any_probable_prime || (pr.prime && pr.probable);
        add(1, k, pr.prime,
            "b[" + std::to_string(k) + "][2]=" + int_str(t.at(k, 2)) +
                (pr.prime ? (pr.probable ? " probable prime" : " prime") : " composite"));
        primes.push_back(t.at(k, 2));
        for (int i = 1; i < k; ++i) {
            bool divides = mpz_divisible_p(t.at(k, 3).get_mpz_t(), t.at(i, 2).get_mpz_t()) != 0;
            add(2, k, !divides,
                "b[" + std::to_string(i) + "][2]=" + int_str(t.at(i, 2)) +
                    (divides ? " divides " : " does not divide ") + "b[" + std::to_string(k) +
                    "][3]=" + int_str(t.at(k, 3)));
        }
        Rational ur = units_ratio_of(primes);
        add(3, k, ur > Rational(1, 2), "units ratio " + rat_str(ur));
        rep.units_ratio = ur;
    }
    for (int k = 0; k < depth; ++k) {
        const auto& [m, n] = p.stages[size_t(k)];
        BigInt bprev4 = (k >= 1) ? t.at(k - 1, 4) : BigInt(1);
        BigInt lhs4 = t.at(k, 2) * t.at(k + 1, 3) + t.at(k + 1, 3) + t.at(k, 4) + bprev4;
        BigInt rhs4 = m * t.at(k, 2);
        add(4, k, lhs4 < rhs4, int_str(lhs4) + " < " + int_str(rhs4));
        BigInt lhs5 = t.at(k, 3) * t.at(k, 2) + t.at(k, 2);
        BigInt rhs5 = n * t.at(k, 3);
        add(5, k, lhs5 < rhs5, int_str(lhs5) + " < " + int_str(rhs5));
    }
    return rep;
}

std::pair<BigInt, BigInt> search_stage(const StageParams& prefix, const SearchPolicy& policy) {
    const int k = int(prefix.stages.size());
    ReturnTable t = return_table(prefix, k);
    const BigInt bk1 = t.at(k, 1), bk2 = t.at(k, 2), bk3 = t.at(k, 3), bk4 = t.at(k, 4);
    BigInt g = 1;
    for (int i = 1; i <= k; ++i) g *= t.at(i, 2);

    std::vector<BigInt> primes;
    for (int i = 1; i <= k; ++i) primes.push_back(t.at(i, 2));

    // condition-5 minimum for n_k
    BigInt n = (bk3 * bk2 + bk2) / bk3 + 1;
    long long n_tries = 0;
    while (true) {
        if (++n_tries > policy.max_n_scan)
            throw BudgetError("search_stage: no admissible n_k within scan cap", policy.max_n_scan);
        BigInt b13 = bk1 + (n - 1) * bk3 + bk4; // b[k+1][3] candidate
        BigInt f = b13 % g;
        BigInt f2 = (f + bk3 - bk1) % g;
        if (f2 < 0) f2 += g;
        BigInt g1, g2;
        mpz_gcd(g1.get_mpz_t(), f.get_mpz_t(), g.get_mpz_t());
        mpz_gcd(g2.get_mpz_t(), f2.get_mpz_t(), g.get_mpz_t());
        if (g1 == 1 && g2 == 1) {
            // condition-4 minimum for m_k (with b[-1][4] := 1)
            BigInt bprev4 = (k >= 1) ? t.at(k - 1, 4) : BigInt(1);
            BigInt m = (bk2 * b13 + b13 + bk4 + bprev4) / bk2 + 1;
            long long m_tries = 0;
            while (m_tries++ < policy.max_prime_scan) {
                BigInt b12 = m * bk2 + n * bk3 + bk4; // b[k+1][2] candidate
                if (is_prime(b12).prime) {
                    std::vector<BigInt> p2 = primes;
                    p2.push_back(b12);
                    if (units_ratio_of(p2) > Rational(1, 2)) {
                        // post-validate the full condition set
                        StageParams cand = prefix;
                        cand.stages.emplace_back(m, n);
                        if (check_conditions(cand, k + 1).all_ok) return {m, n};
                    }
                }
                m += 1;
            }
            // fall through: try the next n_k
        }
        n += 1;
    }
}

StageParams search_stages(int count, const SearchPolicy& policy) {
    if (count < 1) throw DomainError("search needs at least one stage");
    StageParams p;
    for (int k = 0; k < count; ++k) {
        auto [m, n] = search_stage(p, policy);
        p.stages.emplace_back(m, n);
    }
    return p;
}

Iet build_iet(const StageParams& p, int depth) {
    auto lens = lengths_from_params(p, depth);
    return Iet(std::vector<Rational>(lens.begin(), lens.end()), Permutation::parse("4213"));
}

} // namespace keanemix
