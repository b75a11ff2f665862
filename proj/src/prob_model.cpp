#include "dfsa/prob_model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace dfsa {

MprOrder::MprOrder(int m) : m_(m)
{
    if (m < 1)
        throw std::invalid_argument("MPR order must be >= 1, got " + std::to_string(m));
}

Load::Load(std::int64_t tags, std::int64_t frame_length) : n_(tags), L_(frame_length)
{
    if (tags < 0)
        throw std::invalid_argument("tag count must be >= 0");
    if (frame_length < 1)
        throw std::invalid_argument("frame length must be >= 1");
}

double log_factorial(std::int64_t m)
{
    return std::lgamma(static_cast<double>(m) + 1.0);
}

namespace {

// log C(n, j). Summing log ratios keeps ~1e-13 absolute accuracy where the
// lgamma difference of two ~1e7 values would not; lgamma takes over for wide j.
double log_choose(std::int64_t n, std::int64_t j)
{
    const std::int64_t k = std::min(j, n - j);
    if (k > 1000)
        return log_factorial(n) - log_factorial(j) - log_factorial(n - j);
    double acc = 0.0;
    for (std::int64_t i = 1; i <= k; ++i)
        acc += std::log(static_cast<double>(n - k + i) / static_cast<double>(i));
    return acc;
}

} // namespace

double binomial_occupancy(std::int64_t j, const Load& load)
{
    const std::int64_t n = load.tags();
    if (j < 0 || j > n)
        throw std::domain_error("occupancy j=" + std::to_string(j) + " outside [0, " +
                                std::to_string(n) + "]");

    const double L = static_cast<double>(load.frame_length());
    if (load.frame_length() == 1)
        return j == n ? 1.0 : 0.0;

    const double log_p = static_cast<double>(j) * -std::log(L) +
                         static_cast<double>(n - j) * std::log1p(-1.0 / L);
    return std::exp(log_choose(n, j) + log_p);
}

double taylor_exp(double x, int order)
{
    double term = 1.0;
    double sum = 1.0;
    for (int j = 1; j <= order; ++j) {
        term *= x / j;
        sum += term;
    }
    return sum;
}

SlotProbabilities slot_probabilities(const Load& load, MprOrder mpr)
{
    if (load.tags() == 0)
        return {1.0, 0.0, 0.0};

    const double rho = load.rho();
    const double pe = std::exp(-rho);

    // sum_{j=1..M} rho^j / j!, accumulated term by term
    double term = 1.0;
    double partial = 0.0;
    for (int j = 1; j <= mpr.value(); ++j) {
        term *= rho / j;
        partial += term;
    }
    const double ps = std::clamp(pe * partial, 0.0, 1.0);
    const double pc = std::clamp(1.0 - pe - ps, 0.0, 1.0);
    return {pe, ps, pc};
}

double expected_success_slots(const Load& load, MprOrder mpr)
{
    return static_cast<double>(load.frame_length()) * slot_probabilities(load, mpr).success;
}

double channel_efficiency(const Load& load, MprOrder mpr)
{
    return slot_probabilities(load, mpr).success;
}

} // namespace dfsa
