#include "dfsa/protocol_sim.hpp"

#include <algorithm>
#include <cctype>

#include "dfsa/frame_optimizer.hpp"

namespace dfsa {

std::string_view to_string(Variant v)
{
    return v == Variant::Fsa ? "FSA" : "DFSA";
}

Variant parse_variant(std::string_view text)
{
    std::string upper(text);
    std::transform(upper.begin(), upper.end(), upper.begin(),
                   [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
    if (upper == "FSA")
        return Variant::Fsa;
    if (upper == "DFSA")
        return Variant::Dfsa;
    throw std::invalid_argument("unknown protocol variant '" + std::string(text) + "'");
}

void ProtocolConfig::validate() const
{
    if (tags < 0)
        throw std::invalid_argument("tag count must be >= 0");
    if (initial_frame_length < 1)
        throw std::invalid_argument("initial frame length must be >= 1");
    if (max_frames < 1)
        throw std::invalid_argument("frame cap must be >= 1");
    if (estimator.stop_window < 1)
        throw std::invalid_argument("estimator stop window must be >= 1");
}

std::uint64_t mix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t trial_seed(std::uint64_t base_seed, std::uint64_t trial)
{
    return mix64(base_seed ^ mix64(trial));
}

FrameObservation run_frame(std::int64_t tags_remaining, std::int64_t frame_length,
                           MprOrder mpr, Rng& rng)
{
    if (tags_remaining < 0)
        throw std::invalid_argument("run_frame: negative tag count");
    if (frame_length < 1)
        throw std::invalid_argument("run_frame: frame length must be >= 1");

    std::vector<std::int64_t> occupancy(static_cast<std::size_t>(frame_length), 0);
    std::uniform_int_distribution<std::int64_t> pick(0, frame_length - 1);
    for (std::int64_t t = 0; t < tags_remaining; ++t)
        ++occupancy[static_cast<std::size_t>(pick(rng))];

    FrameObservation obs;
    obs.frame_length = frame_length;
    for (std::int64_t count : occupancy) {
        if (count == 0) {
            ++obs.empty;
        } else if (count <= mpr.value()) {
            ++obs.success;
            obs.identified += count;
        } else {
            ++obs.collided;
        }
    }
    return obs;
}

InterrogationResult run_interrogation(const ProtocolConfig& config, Rng& rng)
{
    config.validate();

    InterrogationResult result;
    std::int64_t remaining = config.tags;
    std::int64_t length = config.initial_frame_length;

    for (std::int64_t index = 0;; ++index) {
        if (index >= config.max_frames)
            throw NonTerminationError(
                "interrogation did not terminate within " + std::to_string(config.max_frames) +
                " frames (n=" + std::to_string(config.tags) + ", M=" +
                std::to_string(config.mpr.value()) + ", L0=" +
                std::to_string(config.initial_frame_length) + ", " +
                std::string(to_string(config.variant)) + ")");

        FrameRecord record;
        record.index = index;
        record.frame_length = length;
        record.observation = run_frame(remaining, length, config.mpr, rng);
        remaining -= record.observation.identified;
        record.tags_remaining_after = remaining;

        result.total_slots += length;
        result.total_identified += record.observation.identified;

        const bool done = record.observation.collided == 0;
        if (!done && config.variant == Variant::Dfsa) {
            record.estimate = map_estimate(record.observation, config.mpr, config.estimator);
            length = next_frame_length(record.estimate->n_hat, record.observation.identified,
                                       record.observation.collided, config.mpr)
                         .length;
        }
        result.frames.push_back(std::move(record));

        if (done) {
            result.terminated = true;
            return result;
        }
    }
}

InterrogationResult run_interrogation(const ProtocolConfig& config)
{
    Rng rng(config.rng_seed);
    return run_interrogation(config, rng);
}

} // namespace dfsa
