#ifndef DFSA_HARNESS_HPP
#define DFSA_HARNESS_HPP

#include <compare>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "dfsa/estimator.hpp"
#include "dfsa/protocol_sim.hpp"

namespace dfsa {

/// Bad experiment configuration (CLI exit code 1).
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct ExperimentSpec {
    std::vector<std::int64_t> tag_counts;
    std::vector<int> mpr_orders;
    std::vector<std::int64_t> initial_frame_lengths;
    std::vector<Variant> variants{Variant::Dfsa};
    std::int64_t trials = 500;
    std::uint64_t master_seed = 1;
    EstimatorSettings estimator{};

    /// Throws ConfigError.
    void validate() const;
};

struct ExperimentKey {
    Variant variant = Variant::Dfsa;
    std::int64_t tags = 0;
    int mpr = 1;
    std::int64_t initial_frame_length = 1;

    friend auto operator<=>(const ExperimentKey&, const ExperimentKey&) = default;
};

std::string describe(const ExperimentKey& key);

struct AggregateMetrics {
    double read_rate_mean = 0.0;  ///< tags per slot
    double read_rate_std = 0.0;
    double delay_mean = 0.0;      ///< slots
    double delay_std = 0.0;
    double estimation_error_pct_mean = 0.0;  ///< first-frame |n_hat - n| / n, percent
    double estimation_error_pct_std = 0.0;
};

struct ResultRow {
    ExperimentKey key;
    std::int64_t trials = 0;
    AggregateMetrics metrics;
};

/// Rows sorted by key.
using ResultTable = std::vector<ResultRow>;

struct RunOptions {
    unsigned parallelism = 1;  ///< worker threads; 0 means hardware concurrency
    /// Called once per finished cell, serialized, in completion order.
    std::function<void(const ExperimentKey&, std::size_t done, std::size_t total)> on_cell_done;
};

/// Seed shared by every variant of the (n, M, L0) cell, so FSA and DFSA see
/// the same first frame.
std::uint64_t cell_seed(std::uint64_t master_seed, const ExperimentKey& key);

/// Population estimate taken from the first frame: the exact identified
/// count when the frame had no collision, the MAP estimate otherwise.
std::int64_t first_frame_estimate(const InterrogationResult& result, MprOrder mpr,
                                  const EstimatorSettings& settings = {});

/// Runs spec.trials interrogations per cell. Output does not depend on
/// parallelism or scheduling.
ResultTable run_experiment(const ExperimentSpec& spec, const RunOptions& options = {});

enum class OutputFormat { Csv, Json };

OutputFormat parse_output_format(const std::string& text);

/// Exact CSV header line (no trailing newline).
extern const char* const kCsvHeader;

/// %.6g
std::string format_sig6(double value);

void write_results(const ResultTable& table, OutputFormat format, std::ostream& out);

/// Writes the table to `path`. Nothing is created for an empty table.
void emit_results(const ResultTable& table, OutputFormat format,
                  const std::filesystem::path& path);

/// Parses a JSON experiment description. Lists may be given literally or as
/// {"from": a, "to": b, "step": s} ranges (inclusive).
ExperimentSpec parse_experiment_spec(const std::string& json_text);
ExperimentSpec load_experiment_spec(const std::filesystem::path& path);

/// CSV: n,M,raw_optimum,length,efficiency
void write_optimal_length_table(const std::vector<std::int64_t>& tag_counts,
                                const std::vector<int>& mpr_orders, std::ostream& out);

/// CSV: n,M,L,efficiency for L in [1, max_length_factor * n].
void write_efficiency_curves(const std::vector<std::int64_t>& tag_counts,
                             const std::vector<int>& mpr_orders, std::int64_t max_length_factor,
                             std::ostream& out);

} // namespace dfsa

#endif
