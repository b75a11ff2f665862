#include "doctest.h"

#include <cmath>
#include <initializer_list>
#include <stdexcept>
#include <cstdint>
#include <random>

#include "dfsa/prob_model.hpp"
#include "dfsa/protocol_sim.hpp"

using namespace dfsa;

namespace {

// C(n,j) (L-1)^(n-j) / L^n with exact integers; fine for n <= 20, L <= 50.
long double exact_occupancy(int j, int n, int L)
{
    unsigned __int128 choose = 1;
    for (int i = 1; i <= j; ++i)
        choose = choose * static_cast<unsigned>(n - j + i) / static_cast<unsigned>(i);
    unsigned __int128 num = choose;
    for (int i = 0; i < n - j; ++i)
        num *= static_cast<unsigned>(L - 1);
    unsigned __int128 den = 1;
    for (int i = 0; i < n; ++i)
        den *= static_cast<unsigned>(L);
    return static_cast<long double>(num) / static_cast<long double>(den);
}

// Independent evaluation of the success probability, term by term from factorials.
double efficiency_reference(double n, double L, int M)
{
    const double rho = n / L;
    double sum = 0.0;
    double fact = 1.0;
    for (int j = 1; j <= M; ++j) {
        fact *= j;
        sum += std::pow(rho, j) / fact;
    }
    return std::exp(-rho) * sum;
}

} // namespace

TEST_CASE("Load and MprOrder reject invalid values")
{
    CHECK_THROWS_AS(MprOrder(0), std::invalid_argument);
    CHECK_THROWS_AS(Load(-1, 10), std::invalid_argument);
    CHECK_THROWS_AS(Load(10, 0), std::invalid_argument);
    CHECK(Load(30, 12).rho() == 2.5);
}

TEST_CASE("binomial_occupancy")
{
    CHECK(binomial_occupancy(0, Load(0, 10)) == 1.0);
    CHECK(binomial_occupancy(1, Load(1, 1)) == 1.0);
    CHECK(binomial_occupancy(0, Load(3, 1)) == 0.0);

    // 45 * 4^8 / 5^10
    CHECK(exact_occupancy(2, 10, 5) == doctest::Approx(2949120.0 / 9765625.0).epsilon(1e-15));
    CHECK(binomial_occupancy(2, Load(10, 5)) ==
          doctest::Approx(static_cast<double>(exact_occupancy(2, 10, 5))).epsilon(1e-12));

    for (int n = 0; n <= 20; ++n)
        for (int L : {1, 2, 3, 7, 16, 50})
            for (int j = 0; j <= n; ++j)
                CHECK(binomial_occupancy(j, Load(n, L)) ==
                      doctest::Approx(static_cast<double>(exact_occupancy(j, n, L)))
                          .epsilon(1e-11)
                          .scale(1e-300));

    CHECK_THROWS_AS(binomial_occupancy(-1, Load(5, 5)), std::domain_error);
    CHECK_THROWS_AS(binomial_occupancy(6, Load(5, 5)), std::domain_error);

    // large populations stay finite and sum to one
    double total = 0.0;
    const Load big(1'000'000, 500'000);
    for (int j = 0; j <= 60; ++j)
        total += binomial_occupancy(j, big);
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("slot_probabilities")
{
    for (int M = 1; M <= 4; ++M) {
        const auto p = slot_probabilities(Load(0, 17), MprOrder(M));
        CHECK(p.empty == 1.0);
        CHECK(p.success == 0.0);
        CHECK(p.collided == 0.0);
    }

    const auto unit = slot_probabilities(Load(128, 128), MprOrder(1));
    CHECK(unit.empty == doctest::Approx(0.36787944117144233).epsilon(1e-15));
    CHECK(unit.success == doctest::Approx(0.36787944117144233).epsilon(1e-15));
    CHECK(unit.collided == doctest::Approx(0.26424111765711533).epsilon(1e-14));

    // rho = 2, M = 4: e^-2, 6 e^-2, 1 - 7 e^-2 (40-digit reference)
    const auto p = slot_probabilities(Load(100, 50), MprOrder(4));
    CHECK(p.empty == doctest::Approx(0.1353352832366126918939994949724844).epsilon(1e-15));
    CHECK(p.success == doctest::Approx(0.8120116994196761513639969698349064).epsilon(1e-15));
    CHECK(p.collided == doctest::Approx(0.05265301734371115674200353519260918).epsilon(1e-12));
}

TEST_CASE("expected_success_slots and channel_efficiency")
{
    CHECK(expected_success_slots(Load(0, 64), MprOrder(3)) == 0.0);
    CHECK(channel_efficiency(Load(0, 64), MprOrder(3)) == 0.0);
    CHECK(expected_success_slots(Load(77, 77), MprOrder(1)) ==
          doctest::Approx(77.0 * std::exp(-1.0)).epsilon(1e-14));
    CHECK(expected_success_slots(Load(100, 45), MprOrder(4)) ==
          doctest::Approx(36.75197202728860072707900234820306).epsilon(1e-14));
    CHECK(channel_efficiency(Load(350, 350), MprOrder(1)) ==
          doctest::Approx(0.3679).epsilon(1e-4));

    // rounded L* is the global maximum of U over [1, 4n] for n=1000, M=4
    const std::int64_t n = 1000;
    const auto best_L = static_cast<std::int64_t>(std::floor(n / std::pow(24.0, 0.25) + 0.5));
    CHECK(best_L == 452);
    const double at_best = efficiency_reference(n, best_L, 4);
    for (std::int64_t L = 1; L <= 4 * n; ++L)
        CHECK(efficiency_reference(n, L, 4) <= at_best);
    CHECK(channel_efficiency(Load(n, best_L), MprOrder(4)) ==
          doctest::Approx(at_best).epsilon(1e-13));
}

TEST_CASE("probabilities sum to one and stay in range")
{
    std::mt19937_64 gen(7);
    std::uniform_int_distribution<std::int64_t> tags(0, 100000);
    std::uniform_int_distribution<std::int64_t> slots(1, 5000);
    std::uniform_int_distribution<int> order(1, 12);
    for (int i = 0; i < 20000; ++i) {
        const Load load(tags(gen), slots(gen));
        const auto p = slot_probabilities(load, MprOrder(order(gen)));
        CHECK(std::abs(p.empty + p.success + p.collided - 1.0) <= 1e-12);
        for (double v : {p.empty, p.success, p.collided}) {
            CHECK(v >= 0.0);
            CHECK(v <= 1.0);
        }
    }
}

TEST_CASE("success probability grows with M while M < n")
{
    for (std::int64_t n : {3, 10, 100}) {
        for (std::int64_t L : {1, 5, 40, 200}) {
            const Load load(n, L);
            for (int M = 1; M + 1 < n && M < 10; ++M) {
                const auto lo = slot_probabilities(load, MprOrder(M));
                const auto hi = slot_probabilities(load, MprOrder(M + 1));
                CHECK(hi.success > lo.success);
                // p_c saturates at 0 or 1 in double precision at extreme loads
                CHECK(hi.collided <= lo.collided);
                if (hi.success - lo.success > 1e-12)
                    CHECK(hi.collided < lo.collided);
            }
        }
    }
}

TEST_CASE("binomial sum approaches the Poisson success probability for large n and L")
{
    for (std::int64_t n : {100, 300, 1000}) {
        for (std::int64_t L : {100, 128, 400}) {
            for (int M = 1; M <= 4; ++M) {
                const Load load(n, L);
                double exact = 0.0;
                for (int j = 1; j <= M; ++j)
                    exact += binomial_occupancy(j, load);
                CHECK(std::abs(exact - slot_probabilities(load, MprOrder(M)).success) <= 0.01);
            }
        }
    }
}

TEST_CASE("efficiency has a single local maximum over integer L")
{
    for (std::int64_t n : {10, 100, 1000}) {
        for (int M = 1; M <= 4; ++M) {
            int peaks = 0;
            double prev2 = -1.0, prev1 = channel_efficiency(Load(n, 1), MprOrder(M));
            for (std::int64_t L = 2; L <= 4 * n + 1; ++L) {
                const double cur = channel_efficiency(Load(n, L), MprOrder(M));
                if (prev1 > prev2 && prev1 >= cur)
                    ++peaks;
                prev2 = prev1;
                prev1 = cur;
            }
            CHECK_MESSAGE(peaks == 1, "n=" << n << " M=" << M);
        }
    }
}

TEST_CASE("simulated slot outcomes match the exact binomial classes")
{
    // 10^5+ slots at n = L = 100; per-class frequency within 3 standard errors.
    const std::int64_t n = 100, L = 100, frames = 1200;
    for (int M = 1; M <= 4; ++M) {
        Rng rng(1000 + M);
        double e = 0, s = 0, c = 0;
        for (int f = 0; f < frames; ++f) {
            const auto obs = run_frame(n, L, MprOrder(M), rng);
            e += obs.empty;
            s += obs.success;
            c += obs.collided;
        }
        const double slots = static_cast<double>(frames * L);
        const Load load(n, L);
        const double pe = binomial_occupancy(0, load);
        double ps = 0.0;
        for (int j = 1; j <= M; ++j)
            ps += binomial_occupancy(j, load);
        const double pc = 1.0 - pe - ps;
        for (auto [freq, p] : {std::pair{e / slots, pe}, {s / slots, ps}, {c / slots, pc}}) {
            const double se = std::sqrt(p * (1 - p) / slots);
            CHECK_MESSAGE(std::abs(freq - p) <= 3 * se, "M=" << M << " freq=" << freq << " p=" << p);
        }
    }
}
