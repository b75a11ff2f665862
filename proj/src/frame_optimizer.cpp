#include "dfsa/frame_optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dfsa {

namespace {

std::int64_t round_half_up(double x)
{
    return static_cast<std::int64_t>(std::floor(x + 0.5));
}

FramePlan plan_for(double remaining, MprOrder mpr)
{
    const double raw = remaining / optimal_load(mpr);
    return {std::max<std::int64_t>(1, round_half_up(raw)), raw};
}

} // namespace

double optimal_load(MprOrder mpr)
{
    if (mpr.value() == 1)
        return 1.0;
    return std::exp(log_factorial(mpr.value()) / mpr.value());
}

FramePlan optimal_frame_length(std::int64_t tags, MprOrder mpr)
{
    if (tags < 0)
        throw std::invalid_argument("tag count must be >= 0");
    return plan_for(static_cast<double>(tags), mpr);
}

FramePlan next_frame_length(std::int64_t estimate, std::int64_t identified,
                            std::int64_t collisions, MprOrder mpr)
{
    if (estimate < 0 || identified < 0 || collisions < 0)
        throw std::invalid_argument("next_frame_length: negative count");

    std::int64_t remaining = std::max<std::int64_t>(estimate - identified, 0);
    if (remaining == 0 && collisions > 0)
        remaining = (mpr.value() + 1) * collisions;
    return plan_for(static_cast<double>(remaining), mpr);
}

double efficiency_derivative(double tags, double frame_length, MprOrder mpr)
{
    // sum_m n^m / (m! L^(m+1)) e^(-n/L) (n/L - m)
    const double rho = tags / frame_length;
    const double decay = std::exp(-rho);
    double sum = 0.0;
    double rho_pow_over_fact = 1.0;
    for (int m = 1; m <= mpr.value(); ++m) {
        rho_pow_over_fact *= rho / m;
        sum += rho_pow_over_fact / frame_length * decay * (rho - m);
    }
    return sum;
}

double stationarity_residual(std::int64_t tags, MprOrder mpr)
{
    if (tags < 1)
        throw std::invalid_argument("stationarity_residual needs at least one tag");
    const double n = static_cast<double>(tags);
    return efficiency_derivative(n, n / optimal_load(mpr), mpr);
}

} // namespace dfsa
