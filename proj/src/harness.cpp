#include "dfsa/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "json.hpp"

#include "dfsa/frame_optimizer.hpp"

namespace dfsa {

const char* const kCsvHeader =
    "variant,n,M,L0,trials,read_rate_mean,read_rate_std,delay_mean,delay_std,"
    "est_err_pct_mean,est_err_pct_std";

namespace {

struct TrialOutcome {
    std::int64_t total_slots = 0;
    std::int64_t first_estimate = 0;
};

struct MeanStd {
    double mean = 0.0;
    double std = 0.0;
};

MeanStd mean_std(const std::vector<double>& xs)
{
    MeanStd r;
    if (xs.empty())
        return r;
    for (double x : xs)
        r.mean += x;
    r.mean /= static_cast<double>(xs.size());
    if (xs.size() > 1) {
        double ss = 0.0;
        for (double x : xs)
            ss += (x - r.mean) * (x - r.mean);
        r.std = std::sqrt(ss / static_cast<double>(xs.size() - 1));
    }
    return r;
}

AggregateMetrics aggregate(const ExperimentKey& key, const TrialOutcome* trials, std::size_t count)
{
    std::vector<double> rate, delay, err;
    rate.reserve(count);
    delay.reserve(count);
    err.reserve(count);
    const double n = static_cast<double>(key.tags);
    for (std::size_t i = 0; i < count; ++i) {
        const double slots = static_cast<double>(trials[i].total_slots);
        rate.push_back(n / slots);
        delay.push_back(slots);
        const double miss = std::abs(static_cast<double>(trials[i].first_estimate) - n);
        err.push_back(key.tags == 0 ? 0.0 : miss / n * 100.0);
    }
    const auto r = mean_std(rate);
    const auto d = mean_std(delay);
    const auto e = mean_std(err);
    return {r.mean, r.std, d.mean, d.std, e.mean, e.std};
}

// Rounds to what %.6g prints, so JSON and CSV carry identical values.
double round_sig6(double value)
{
    return std::stod(format_sig6(value));
}

std::vector<std::int64_t> int_list(const nlohmann::json& node, const char* name)
{
    if (node.is_array()) {
        std::vector<std::int64_t> out;
        for (const auto& v : node) {
            if (!v.is_number_integer())
                throw ConfigError(std::string("'") + name + "' must contain integers");
            out.push_back(v.get<std::int64_t>());
        }
        return out;
    }
    if (node.is_object()) {
        const auto from = node.at("from").get<std::int64_t>();
        const auto to = node.at("to").get<std::int64_t>();
        const auto step = node.value("step", std::int64_t{1});
        if (step < 1)
            throw ConfigError(std::string("'") + name + "' range step must be >= 1");
        std::vector<std::int64_t> out;
        for (auto v = from; v <= to; v += step)
            out.push_back(v);
        return out;
    }
    if (node.is_number_integer())
        return {node.get<std::int64_t>()};
    throw ConfigError(std::string("'") + name + "' must be an integer, a list or a range");
}

void write_csv(const ResultTable& table, std::ostream& out)
{
    out << kCsvHeader << '\n';
    for (const auto& row : table) {
        const auto& m = row.metrics;
        out << to_string(row.key.variant) << ',' << row.key.tags << ',' << row.key.mpr << ','
            << row.key.initial_frame_length << ',' << row.trials << ','
            << format_sig6(m.read_rate_mean) << ',' << format_sig6(m.read_rate_std) << ','
            << format_sig6(m.delay_mean) << ',' << format_sig6(m.delay_std) << ','
            << format_sig6(m.estimation_error_pct_mean) << ','
            << format_sig6(m.estimation_error_pct_std) << '\n';
    }
}

void write_json(const ResultTable& table, std::ostream& out)
{
    auto records = nlohmann::ordered_json::array();
    for (const auto& row : table) {
        const auto& m = row.metrics;
        records.push_back({
            {"variant", std::string(to_string(row.key.variant))},
            {"n", row.key.tags},
            {"M", row.key.mpr},
            {"L0", row.key.initial_frame_length},
            {"trials", row.trials},
            {"read_rate_mean", round_sig6(m.read_rate_mean)},
            {"read_rate_std", round_sig6(m.read_rate_std)},
            {"delay_mean", round_sig6(m.delay_mean)},
            {"delay_std", round_sig6(m.delay_std)},
            {"est_err_pct_mean", round_sig6(m.estimation_error_pct_mean)},
            {"est_err_pct_std", round_sig6(m.estimation_error_pct_std)},
        });
    }
    out << records.dump(2) << '\n';
}

} // namespace

void ExperimentSpec::validate() const
{
    if (tag_counts.empty() || mpr_orders.empty() || initial_frame_lengths.empty() ||
        variants.empty())
        throw ConfigError("experiment lists (tag_counts, mpr_orders, initial_frame_lengths, "
                          "variants) must all be non-empty");
    if (trials < 1)
        throw ConfigError("trials must be >= 1");
    for (auto n : tag_counts)
        if (n < 0)
            throw ConfigError("tag counts must be >= 0");
    for (auto m : mpr_orders)
        if (m < 1)
            throw ConfigError("MPR orders must be >= 1");
    for (auto l : initial_frame_lengths)
        if (l < 1)
            throw ConfigError("initial frame lengths must be >= 1");
    if (estimator.stop_window < 1)
        throw ConfigError("estimator stop_window must be >= 1");
}

std::string describe(const ExperimentKey& key)
{
    return std::string(to_string(key.variant)) + " n=" + std::to_string(key.tags) +
           " M=" + std::to_string(key.mpr) + " L0=" + std::to_string(key.initial_frame_length);
}

std::uint64_t cell_seed(std::uint64_t master_seed, const ExperimentKey& key)
{
    std::uint64_t s = mix64(master_seed);
    s = mix64(s ^ static_cast<std::uint64_t>(key.tags));
    s = mix64(s ^ static_cast<std::uint64_t>(key.mpr));
    s = mix64(s ^ static_cast<std::uint64_t>(key.initial_frame_length));
    return s;
}

std::int64_t first_frame_estimate(const InterrogationResult& result, MprOrder mpr,
                                  const EstimatorSettings& settings)
{
    if (result.frames.empty())
        throw std::invalid_argument("interrogation has no frames");
    const auto& first = result.frames.front();
    if (first.observation.collided == 0)
        return first.observation.identified;
    if (first.estimate)
        return first.estimate->n_hat;
    return map_estimate(first.observation, mpr, settings).n_hat;
}

ResultTable run_experiment(const ExperimentSpec& spec, const RunOptions& options)
{
    spec.validate();

    std::set<ExperimentKey> unique;
    for (auto v : spec.variants)
        for (auto n : spec.tag_counts)
            for (auto m : spec.mpr_orders)
                for (auto l0 : spec.initial_frame_lengths)
                    unique.insert({v, n, m, l0});
    const std::vector<ExperimentKey> keys(unique.begin(), unique.end());

    const auto trials = static_cast<std::size_t>(spec.trials);
    const std::size_t total_tasks = keys.size() * trials;
    std::vector<TrialOutcome> outcomes(total_tasks);

    std::vector<std::uint64_t> seeds;
    seeds.reserve(keys.size());
    for (const auto& key : keys)
        seeds.push_back(cell_seed(spec.master_seed, key));

    std::atomic<std::size_t> next{0};
    std::vector<std::atomic<std::size_t>> pending(keys.size());
    for (auto& p : pending)
        p.store(trials);
    std::atomic<std::size_t> cells_done{0};
    std::mutex report_mutex;

    std::mutex error_mutex;
    std::size_t error_task = total_tasks;
    std::exception_ptr error;

    auto worker = [&] {
        for (;;) {
            const std::size_t task = next.fetch_add(1);
            if (task >= total_tasks)
                return;
            const std::size_t cell = task / trials;
            const std::size_t trial = task % trials;
            const auto& key = keys[cell];
            try {
                ProtocolConfig config;
                config.tags = key.tags;
                config.mpr = MprOrder(key.mpr);
                config.initial_frame_length = key.initial_frame_length;
                config.variant = key.variant;
                config.estimator = spec.estimator;
                config.rng_seed = trial_seed(seeds[cell], trial);
                const auto result = run_interrogation(config);
                outcomes[task] = {result.total_slots,
                                  first_frame_estimate(result, config.mpr, spec.estimator)};
            } catch (const NonTerminationError& e) {
                std::lock_guard lock(error_mutex);
                if (task < error_task) {
                    error_task = task;
                    error = std::make_exception_ptr(
                        NonTerminationError("[" + describe(key) + "] " + e.what()));
                }
                next.store(total_tasks);
                return;
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (task < error_task) {
                    error_task = task;
                    error = std::current_exception();
                }
                next.store(total_tasks);
                return;
            }
            if (pending[cell].fetch_sub(1) == 1 && options.on_cell_done) {
                std::lock_guard lock(report_mutex);
                options.on_cell_done(key, ++cells_done, keys.size());
            }
        }
    };

    unsigned workers = options.parallelism == 0 ? std::thread::hardware_concurrency()
                                                : options.parallelism;
    workers = std::max(1u, workers);
    if (workers == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (unsigned i = 0; i < workers; ++i)
            pool.emplace_back(worker);
    }

    if (error)
        std::rethrow_exception(error);

    ResultTable table;
    table.reserve(keys.size());
    for (std::size_t c = 0; c < keys.size(); ++c)
        table.push_back({keys[c], spec.trials, aggregate(keys[c], &outcomes[c * trials], trials)});
    return table;
}

OutputFormat parse_output_format(const std::string& text)
{
    if (text == "csv")
        return OutputFormat::Csv;
    if (text == "json")
        return OutputFormat::Json;
    throw ConfigError("unknown output format '" + text + "' (expected csv or json)");
}

std::string format_sig6(double value)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", value);
    return buf;
}

void write_results(const ResultTable& table, OutputFormat format, std::ostream& out)
{
    if (format == OutputFormat::Csv)
        write_csv(table, out);
    else
        write_json(table, out);
}

void emit_results(const ResultTable& table, OutputFormat format,
                  const std::filesystem::path& path)
{
    if (table.empty())
        throw std::invalid_argument("refusing to write an empty result table to " + path.string());

    std::ostringstream buffer;
    write_results(table, format, buffer);

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw std::runtime_error("cannot open " + path.string() + " for writing");
    out << buffer.str();
    out.flush();
    if (!out)
        throw std::runtime_error("write failed for " + path.string());
}

ExperimentSpec parse_experiment_spec(const std::string& json_text)
{
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("malformed experiment config: ") + e.what());
    }
    if (!doc.is_object())
        throw ConfigError("experiment config must be a JSON object");

    ExperimentSpec spec;
    try {
        spec.tag_counts = int_list(doc.at("tag_counts"), "tag_counts");
        for (auto m : int_list(doc.at("mpr_orders"), "mpr_orders"))
            spec.mpr_orders.push_back(static_cast<int>(m));
        spec.initial_frame_lengths =
            int_list(doc.at("initial_frame_lengths"), "initial_frame_lengths");
        if (doc.contains("variants")) {
            spec.variants.clear();
            for (const auto& v : doc.at("variants"))
                spec.variants.push_back(parse_variant(v.get<std::string>()));
        }
        spec.trials = doc.value("trials", spec.trials);
        spec.master_seed = doc.value("master_seed", spec.master_seed);
        if (doc.contains("estimator")) {
            const auto& est = doc.at("estimator");
            spec.estimator.stop_window = est.value("stop_window", spec.estimator.stop_window);
            spec.estimator.cap_slots_factor =
                est.value("cap_slots_factor", spec.estimator.cap_slots_factor);
            spec.estimator.cap_margin = est.value("cap_margin", spec.estimator.cap_margin);
        }
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError(std::string("invalid experiment config: ") + e.what());
    }
    spec.validate();
    return spec;
}

ExperimentSpec load_experiment_spec(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot read config " + path.string());
    std::ostringstream text;
    text << in.rdbuf();
    return parse_experiment_spec(text.str());
}

void write_optimal_length_table(const std::vector<std::int64_t>& tag_counts,
                                const std::vector<int>& mpr_orders, std::ostream& out)
{
    out << "n,M,raw_optimum,length,efficiency\n";
    for (int m : mpr_orders) {
        const MprOrder mpr(m);
        for (auto n : tag_counts) {
            const auto plan = optimal_frame_length(n, mpr);
            out << n << ',' << m << ',' << format_sig6(plan.raw_optimum) << ',' << plan.length
                << ',' << format_sig6(channel_efficiency(Load(n, plan.length), mpr)) << '\n';
        }
    }
}

void write_efficiency_curves(const std::vector<std::int64_t>& tag_counts,
                             const std::vector<int>& mpr_orders, std::int64_t max_length_factor,
                             std::ostream& out)
{
    out << "n,M,L,efficiency\n";
    for (int m : mpr_orders) {
        const MprOrder mpr(m);
        for (auto n : tag_counts) {
            const std::int64_t l_max = std::max<std::int64_t>(1, max_length_factor * n);
            for (std::int64_t l = 1; l <= l_max; ++l)
                out << n << ',' << m << ',' << l << ','
                    << format_sig6(channel_efficiency(Load(n, l), mpr)) << '\n';
        }
    }
}

} // namespace dfsa
