#ifndef DFSA_PROB_MODEL_HPP
#define DFSA_PROB_MODEL_HPP

#include <cstdint>

namespace dfsa {

/// Maximum number of simultaneous tag replies the reader can separate in one slot.
class MprOrder {
public:
    explicit MprOrder(int m);

    int value() const noexcept { return m_; }

    friend bool operator==(MprOrder, MprOrder) = default;

private:
    int m_;
};

/// Tag population offered to a frame of `frame_length` slots.
class Load {
public:
    Load(std::int64_t tags, std::int64_t frame_length);

    std::int64_t tags() const noexcept { return n_; }
    std::int64_t frame_length() const noexcept { return L_; }
    double rho() const noexcept { return static_cast<double>(n_) / static_cast<double>(L_); }

private:
    std::int64_t n_;
    std::int64_t L_;
};

struct SlotProbabilities {
    double empty;
    double success;
    double collided;
};

/// Probability that exactly j of the n tags pick a given slot (exact binomial).
double binomial_occupancy(std::int64_t j, const Load& load);

/// Empty / success / collision probabilities under the Poisson approximation.
/// A slot succeeds when 1..M tags reply and collides above M.
SlotProbabilities slot_probabilities(const Load& load, MprOrder mpr);

double expected_success_slots(const Load& load, MprOrder mpr);

/// Expected fraction of successful slots in the frame.
double channel_efficiency(const Load& load, MprOrder mpr);

/// Order-M Taylor polynomial of exp at x: sum_{j=0..M} x^j / j!.
double taylor_exp(double x, int order);

/// log(M!) via lgamma.
double log_factorial(std::int64_t m);

} // namespace dfsa

#endif
