#include "dfsa/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace dfsa {

namespace {

constexpr double neg_inf = -std::numeric_limits<double>::infinity();

double log_sum_exp(const std::vector<double>& v)
{
    const double hi = *std::max_element(v.begin(), v.end());
    if (!std::isfinite(hi))
        return hi;
    double acc = 0.0;
    for (double x : v)
        acc += std::exp(x - hi);
    return hi + std::log(acc);
}

} // namespace

void FrameObservation::validate(MprOrder mpr) const
{
    auto fail = [](const std::string& what) {
        throw std::invalid_argument("invalid frame observation: " + what);
    };
    if (frame_length < 1)
        fail("frame length must be >= 1");
    if (empty < 0 || success < 0 || collided < 0)
        fail("negative slot tally");
    if (empty + success + collided != frame_length)
        fail("E + S + C != L");
    if (identified < success || identified > success * mpr.value())
        fail("identified must lie in [S, S*M]");
}

double log_taylor_head(double x, int order)
{
    if (x <= 0.0)
        return neg_inf;
    std::vector<double> terms;
    terms.reserve(order);
    const double lx = std::log(x);
    for (int j = 1; j <= order; ++j)
        terms.push_back(j * lx - log_factorial(j));
    return log_sum_exp(terms);
}

double log_collision_probability(double x, int order)
{
    if (x <= 0.0)
        return neg_inf;
    const double lx = std::log(x);

    if (x <= order + 1.0) {
        // Series from j = M+1; every later term shrinks by x/(j+1) < 1.
        const double log_lead = (order + 1) * lx - log_factorial(order + 1);
        double ratio_sum = 1.0;
        double ratio = 1.0;
        for (int j = order + 2; j < order + 2000; ++j) {
            ratio *= x / j;
            ratio_sum += ratio;
            if (ratio < 1e-18 * ratio_sum)
                break;
        }
        return -x + log_lead + std::log(ratio_sum);
    }

    // 1 - P[Poisson(x) <= M]; the CDF is below ~0.6 here.
    double cdf = 0.0;
    for (int j = 0; j <= order; ++j)
        cdf += std::exp(-x + j * lx - log_factorial(j));
    return std::log1p(-cdf);
}

double log_poisson_tail(double x, int order)
{
    return x + log_collision_probability(x, order);
}

double log_posterior(std::int64_t k, const FrameObservation& obs, MprOrder mpr)
{
    if (k < 0)
        throw std::domain_error("candidate population must be >= 0, got " + std::to_string(k));

    // Per-slot Poisson class probabilities; the e^{-x} factors stay inside
    // each class so large k does not cancel -k against +k.
    const double x = static_cast<double>(k) / static_cast<double>(obs.frame_length);
    double value = static_cast<double>(obs.empty) * -x;
    if (obs.success > 0)
        value += static_cast<double>(obs.success) * (-x + log_taylor_head(x, mpr.value()));
    if (obs.collided > 0)
        value += static_cast<double>(obs.collided) * log_collision_probability(x, mpr.value());
    return std::isnan(value) ? neg_inf : value;
}

std::int64_t min_consistent_population(const FrameObservation& obs, MprOrder mpr)
{
    return std::max(obs.identified, obs.success) + (mpr.value() + 1) * obs.collided;
}

MapEstimate map_estimate(const FrameObservation& obs, MprOrder mpr,
                         const EstimatorSettings& settings)
{
    obs.validate(mpr);

    MapEstimate est;
    est.k_min = min_consistent_population(obs, mpr);
    est.k_max = std::max(settings.cap_slots_factor * obs.frame_length * mpr.value(),
                         est.k_min + settings.cap_margin);

    double best = neg_inf;
    double prev = neg_inf;
    std::int64_t best_k = est.k_min;
    std::int64_t falling = 0;
    bool stopped = false;

    for (std::int64_t k = est.k_min; k <= est.k_max; ++k) {
        const double v = log_posterior(k, obs, mpr);
        if (v > best) {
            best = v;
            best_k = k;
            falling = 0;
        } else if (v < prev) {
            if (++falling >= settings.stop_window) {
                stopped = true;
                break;
            }
        } else {
            falling = 0;
        }
        prev = v;
    }

    est.n_hat = best_k;
    est.log_posterior_at_mode = best;
    est.reached_cap = !stopped;
    return est;
}

std::vector<PosteriorPoint> posterior_curve(const FrameObservation& obs, MprOrder mpr,
                                            std::int64_t k_lo, std::int64_t k_hi)
{
    obs.validate(mpr);
    if (k_lo < 0 || k_hi < k_lo)
        throw std::invalid_argument("posterior_curve: empty or negative k range");

    std::vector<double> logs;
    logs.reserve(static_cast<std::size_t>(k_hi - k_lo + 1));
    for (std::int64_t k = k_lo; k <= k_hi; ++k)
        logs.push_back(log_posterior(k, obs, mpr));

    const double norm = log_sum_exp(logs);
    std::vector<PosteriorPoint> curve;
    curve.reserve(logs.size());
    for (std::size_t i = 0; i < logs.size(); ++i) {
        const double p = std::isfinite(norm) ? std::exp(logs[i] - norm) : 0.0;
        curve.push_back({k_lo + static_cast<std::int64_t>(i), p});
    }
    return curve;
}

} // namespace dfsa
