#ifndef DFSA_FRAME_OPTIMIZER_HPP
#define DFSA_FRAME_OPTIMIZER_HPP

#include <cstdint>

#include "dfsa/prob_model.hpp"

namespace dfsa {

struct FramePlan {
    std::int64_t length;  ///< slots in the next frame, >= 1
    double raw_optimum;   ///< continuous optimum before rounding
};

/// (M!)^(1/M): the offered load n/L that maximizes the expected share of
/// successful slots when up to M replies decode per slot.
double optimal_load(MprOrder mpr);

/// L* = n / (M!)^(1/M), rounded half-up with a floor of one slot.
FramePlan optimal_frame_length(std::int64_t tags, MprOrder mpr);

/// Length of the frame that follows one with the given MAP estimate.
///
/// The remaining population is `estimate - identified`. When that is not
/// positive but the frame still had collided slots, at least M+1 tags sit in
/// each of them, so (M+1) * collisions is used instead.
FramePlan next_frame_length(std::int64_t estimate, std::int64_t identified,
                            std::int64_t collisions, MprOrder mpr);

/// Derivative of the efficiency with respect to L, evaluated at the
/// continuous optimum for n tags. Zero up to rounding when the closed form holds.
double stationarity_residual(std::int64_t tags, MprOrder mpr);

/// Same derivative at an arbitrary (real) frame length.
double efficiency_derivative(double tags, double frame_length, MprOrder mpr);

} // namespace dfsa

#endif
