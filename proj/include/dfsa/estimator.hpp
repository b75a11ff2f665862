#ifndef DFSA_ESTIMATOR_HPP
#define DFSA_ESTIMATOR_HPP

#include <cstdint>
#include <vector>

#include "dfsa/prob_model.hpp"

namespace dfsa {

/// Slot tallies the reader collects over one frame.
struct FrameObservation {
    std::int64_t frame_length = 0;
    std::int64_t empty = 0;
    std::int64_t success = 0;
    std::int64_t collided = 0;
    std::int64_t identified = 0;  ///< tags decoded across all success slots

    /// Throws std::invalid_argument if the tallies are inconsistent for `mpr`.
    void validate(MprOrder mpr) const;

    friend bool operator==(const FrameObservation&, const FrameObservation&) = default;
};

struct EstimatorSettings {
    /// Consecutive strictly decreasing candidates past the running maximum
    /// that end the scan.
    std::int64_t stop_window = 50;
    /// Hard cap is max(cap_slots_factor * L * M, k_min + cap_margin).
    std::int64_t cap_slots_factor = 10;
    std::int64_t cap_margin = 1000;
};

struct MapEstimate {
    std::int64_t n_hat = 0;
    std::int64_t k_min = 0;
    std::int64_t k_max = 0;
    double log_posterior_at_mode = 0.0;
    /// The scan ran into k_max without seeing the posterior turn down. This
    /// happens for all-collision frames, whose posterior increases without bound.
    bool reached_cap = false;
};

struct PosteriorPoint {
    std::int64_t k;
    double probability;
};

/// log of sum_{j=1..M} x^j / j!  (T_M(x) - 1); -inf at x = 0.
double log_taylor_head(double x, int order);

/// log of sum_{j>M} x^j / j!  (e^x - T_M(x)); -inf at x = 0.
double log_poisson_tail(double x, int order);

/// log P[Poisson(x) > M], the per-slot collision probability at load x.
double log_collision_probability(double x, int order);

/// Log posterior of k contending tags given the frame tallies, without the
/// multinomial coefficient (it does not depend on k).
double log_posterior(std::int64_t k, const FrameObservation& obs, MprOrder mpr);

/// Smallest population consistent with the observation: every collided slot
/// holds at least M+1 tags.
std::int64_t min_consistent_population(const FrameObservation& obs, MprOrder mpr);

/// argmax_k of log_posterior, scanning upward from min_consistent_population.
MapEstimate map_estimate(const FrameObservation& obs, MprOrder mpr,
                         const EstimatorSettings& settings = {});

/// Posterior over [k_lo, k_hi], normalized to sum to one on that range.
std::vector<PosteriorPoint> posterior_curve(const FrameObservation& obs, MprOrder mpr,
                                            std::int64_t k_lo, std::int64_t k_hi);

} // namespace dfsa

#endif
