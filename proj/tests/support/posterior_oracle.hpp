// Brute-force reference for the MAP estimator, used only by tests.
#ifndef DFSA_TESTS_POSTERIOR_ORACLE_HPP
#define DFSA_TESTS_POSTERIOR_ORACLE_HPP

#include <cmath>
#include <cstdint>
#include <limits>

namespace oracle {

// Full trinomial posterior including L!/(E!S!C!), with p_c taken as
// 1 - p_e - p_s, all in long double.
inline long double full_log_posterior(std::int64_t k, std::int64_t L, std::int64_t E,
                                      std::int64_t S, std::int64_t C, int M)
{
    const long double x = static_cast<long double>(k) / static_cast<long double>(L);
    const long double pe = std::exp(-x);
    long double head = 0.0L, term = 1.0L;
    for (int j = 1; j <= M; ++j) {
        term *= x / j;
        head += term;
    }
    const long double ps = pe * head;
    const long double pc = 1.0L - pe - ps;
    const long double neg_inf = -std::numeric_limits<long double>::infinity();

    long double v = std::lgamma(static_cast<long double>(L) + 1) -
                    std::lgamma(static_cast<long double>(E) + 1) -
                    std::lgamma(static_cast<long double>(S) + 1) -
                    std::lgamma(static_cast<long double>(C) + 1);
    v += static_cast<long double>(E) * -x;
    if (S > 0) {
        if (ps <= 0)
            return neg_inf;
        v += static_cast<long double>(S) * std::log(ps);
    }
    if (C > 0) {
        if (pc <= 0)
            return neg_inf;
        v += static_cast<long double>(C) * std::log(pc);
    }
    return v;
}

// Exhaustive argmax over [k_lo, k_hi], smallest k on ties.
inline std::int64_t brute_force_argmax(std::int64_t L, std::int64_t E, std::int64_t S,
                                       std::int64_t C, int M, std::int64_t k_lo,
                                       std::int64_t k_hi)
{
    long double best = -std::numeric_limits<long double>::infinity();
    std::int64_t arg = k_lo;
    for (std::int64_t k = k_lo; k <= k_hi; ++k) {
        const long double v = full_log_posterior(k, L, E, S, C, M);
        if (v > best) {
            best = v;
            arg = k;
        }
    }
    return arg;
}

// True when the posterior over [k_lo, k_hi] peaks at k_hi itself (possibly on a
// plateau that long double can no longer resolve): no interior mode exists.
inline bool peaks_at_range_end(std::int64_t L, std::int64_t E, std::int64_t S, std::int64_t C,
                               int M, std::int64_t k_lo, std::int64_t k_hi)
{
    const auto arg = brute_force_argmax(L, E, S, C, M, k_lo, k_hi);
    return full_log_posterior(k_hi, L, E, S, C, M) >= full_log_posterior(arg, L, E, S, C, M);
}

} // namespace oracle

#endif
