#ifndef DFSA_PROTOCOL_SIM_HPP
#define DFSA_PROTOCOL_SIM_HPP

#include <cstdint>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "dfsa/estimator.hpp"
#include "dfsa/prob_model.hpp"

namespace dfsa {

using Rng = std::mt19937_64;

enum class Variant {
    Fsa,   ///< fixed frame length every round
    Dfsa,  ///< frame length re-planned from the MAP estimate each round
};

std::string_view to_string(Variant v);
/// Accepts "FSA"/"DFSA" in any case; throws std::invalid_argument otherwise.
Variant parse_variant(std::string_view text);

struct ProtocolConfig {
    std::int64_t tags = 0;
    MprOrder mpr{1};
    std::int64_t initial_frame_length = 128;
    Variant variant = Variant::Dfsa;
    EstimatorSettings estimator{};
    std::uint64_t rng_seed = 0;
    std::int64_t max_frames = 100000;

    void validate() const;
};

struct FrameRecord {
    std::int64_t index = 0;
    std::int64_t frame_length = 0;
    FrameObservation observation;
    std::optional<MapEstimate> estimate;  ///< DFSA frames with collisions only
    std::int64_t tags_remaining_after = 0;
};

struct InterrogationResult {
    std::vector<FrameRecord> frames;
    std::int64_t total_slots = 0;
    std::int64_t total_identified = 0;
    bool terminated = false;
};

/// Raised when an interrogation exceeds ProtocolConfig::max_frames.
class NonTerminationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t x);

/// Independent stream seed for trial `trial` under `base_seed`.
std::uint64_t trial_seed(std::uint64_t base_seed, std::uint64_t trial);

/// One frame: every remaining tag picks a slot uniformly; slots with 1..M
/// replies decode all of them, slots with more decode none.
FrameObservation run_frame(std::int64_t tags_remaining, std::int64_t frame_length,
                           MprOrder mpr, Rng& rng);

/// Frames until one has no collided slot.
InterrogationResult run_interrogation(const ProtocolConfig& config, Rng& rng);

/// Same, with the generator seeded from config.rng_seed.
InterrogationResult run_interrogation(const ProtocolConfig& config);

} // namespace dfsa

#endif
