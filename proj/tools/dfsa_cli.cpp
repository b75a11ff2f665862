// dfsa: Monte Carlo sweeps, closed-form tables and one-off MAP estimates for
// DFSA tag interrogation with a multi-packet-reception reader.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "dfsa/estimator.hpp"
#include "dfsa/harness.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitBadConfig = 1;
constexpr int kExitRuntime = 2;

// "a,b,c" or "from:to[:step]"
std::vector<std::int64_t> parse_int_list(const std::string& text)
{
    std::vector<std::int64_t> out;
    if (text.find(':') != std::string::npos) {
        std::vector<std::int64_t> parts;
        std::stringstream ss(text);
        std::string item;
        while (std::getline(ss, item, ':'))
            parts.push_back(std::stoll(item));
        if (parts.size() < 2 || parts.size() > 3 || (parts.size() == 3 && parts[2] < 1))
            throw dfsa::ConfigError("bad range '" + text + "', expected from:to[:step]");
        const std::int64_t step = parts.size() == 3 ? parts[2] : 1;
        for (auto v = parts[0]; v <= parts[1]; v += step)
            out.push_back(v);
    } else {
        std::stringstream ss(text);
        std::string item;
        while (std::getline(ss, item, ','))
            out.push_back(std::stoll(item));
    }
    if (out.empty())
        throw dfsa::ConfigError("empty list '" + text + "'");
    return out;
}

// Writes to `path`, or stdout when empty.
template <typename Fn>
void with_output(const std::string& path, Fn&& fn)
{
    if (path.empty()) {
        fn(std::cout);
        return;
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw std::runtime_error("cannot open " + path + " for writing");
    fn(out);
    if (!out.flush())
        throw std::runtime_error("write failed for " + path);
}

struct SimulateArgs {
    std::string config;
    std::string out;
    std::string format = "csv";
    std::uint64_t seed = 0;
    std::int64_t trials = 0;
    unsigned parallel = 1;
    bool quiet = false;
};

int run_simulate(const SimulateArgs& args, const CLI::App& cmd)
{
    auto spec = dfsa::load_experiment_spec(args.config);
    if (cmd.count("--seed"))
        spec.master_seed = args.seed;
    if (cmd.count("--trials"))
        spec.trials = args.trials;
    spec.validate();
    const auto format = dfsa::parse_output_format(args.format);

    dfsa::RunOptions options;
    options.parallelism = args.parallel;
    if (!args.quiet)
        options.on_cell_done = [](const dfsa::ExperimentKey& key, std::size_t done,
                                  std::size_t total) {
            std::cerr << "[" << done << "/" << total << "] " << dfsa::describe(key) << '\n';
        };

    const auto table = dfsa::run_experiment(spec, options);
    if (args.out.empty())
        dfsa::write_results(table, format, std::cout);
    else
        dfsa::emit_results(table, format, args.out);
    return kExitOk;
}

struct AnalyzeArgs {
    bool optimal_length = false;
    bool efficiency_curve = false;
    std::string tags = "100";
    std::string mpr = "1,2,3,4";
    std::int64_t max_factor = 4;
    std::string out;
};

int run_analyze(const AnalyzeArgs& args)
{
    const auto tags = parse_int_list(args.tags);
    std::vector<int> orders;
    for (auto m : parse_int_list(args.mpr))
        orders.push_back(static_cast<int>(m));
    for (auto n : tags)
        if (n < 0)
            throw dfsa::ConfigError("tag counts must be >= 0");
    for (auto m : orders)
        if (m < 1)
            throw dfsa::ConfigError("MPR orders must be >= 1");

    with_output(args.out, [&](std::ostream& os) {
        if (args.optimal_length)
            dfsa::write_optimal_length_table(tags, orders, os);
        else
            dfsa::write_efficiency_curves(tags, orders, args.max_factor, os);
    });
    return kExitOk;
}

struct EstimateArgs {
    std::int64_t frame_length = 0;
    std::int64_t empty = 0;
    std::int64_t success = 0;
    std::int64_t collided = 0;
    std::int64_t identified = -1;
    int mpr = 1;
    std::string curve_out;
    std::int64_t k_lo = 0;
    std::int64_t k_hi = -1;
};

int run_estimate(const EstimateArgs& args)
{
    dfsa::FrameObservation obs;
    obs.frame_length = args.frame_length;
    obs.empty = args.empty;
    obs.success = args.success;
    obs.collided = args.collided;
    obs.identified = args.identified < 0 ? args.success : args.identified;

    const dfsa::MprOrder mpr(args.mpr);
    try {
        obs.validate(mpr);
    } catch (const std::invalid_argument& e) {
        throw dfsa::ConfigError(e.what());
    }

    const auto est = dfsa::map_estimate(obs, mpr);
    std::cout << "n_hat=" << est.n_hat << " k_min=" << est.k_min << " k_max=" << est.k_max
              << " log_posterior=" << dfsa::format_sig6(est.log_posterior_at_mode)
              << (est.reached_cap ? " (posterior unbounded: scan hit the cap)" : "") << '\n';

    if (!args.curve_out.empty()) {
        const std::int64_t hi = args.k_hi >= 0 ? args.k_hi : 3 * est.n_hat + 20;
        if (hi < args.k_lo)
            throw dfsa::ConfigError("--k-hi must be >= --k-lo");
        const auto curve = dfsa::posterior_curve(obs, mpr, args.k_lo, hi);
        with_output(args.curve_out, [&](std::ostream& os) {
            os << "k,probability\n";
            char buf[64];
            for (const auto& p : curve) {
                std::snprintf(buf, sizeof buf, "%.10g", p.probability);
                os << p.k << ',' << buf << '\n';
            }
        });
    }
    return kExitOk;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"DFSA RFID interrogation with multi-packet reception"};
    app.require_subcommand(1);

    SimulateArgs sim;
    auto* simulate = app.add_subcommand("simulate", "Monte Carlo sweep from a JSON config");
    simulate->add_option("--config", sim.config, "Experiment config (JSON)")
        ->required()
        ->check(CLI::ExistingFile);
    simulate->add_option("--out", sim.out, "Output file (default: stdout)");
    simulate->add_option("--format", sim.format, "csv or json")
        ->check(CLI::IsMember({"csv", "json"}));
    simulate->add_option("--seed", sim.seed, "Override master seed");
    simulate->add_option("--trials", sim.trials, "Override trials per cell");
    simulate->add_option("--parallel", sim.parallel, "Worker threads (0 = all cores)");
    simulate->add_flag("--quiet", sim.quiet, "No progress on stderr");

    AnalyzeArgs an;
    auto* analyze = app.add_subcommand("analyze", "Closed-form efficiency and optimal frame lengths");
    auto* opt_flag = analyze->add_flag("--optimal-length", an.optimal_length, "Tabulate L*(n, M)");
    auto* curve_flag =
        analyze->add_flag("--efficiency-curve", an.efficiency_curve, "Tabulate U(L) per (n, M)");
    opt_flag->excludes(curve_flag);
    analyze->add_option("--n", an.tags, "Tag counts: a,b,c or from:to[:step]");
    analyze->add_option("--M", an.mpr, "MPR orders: a,b,c or from:to[:step]");
    analyze->add_option("--max-factor", an.max_factor, "Efficiency curve spans L in [1, factor*n]")
        ->check(CLI::PositiveNumber);
    analyze->add_option("--out", an.out, "Output CSV (default: stdout)");

    EstimateArgs es;
    auto* estimate = app.add_subcommand("estimate", "MAP tag-population estimate for one frame");
    estimate->add_option("--L", es.frame_length, "Frame length")->required();
    estimate->add_option("--E", es.empty, "Empty slots")->required();
    estimate->add_option("--S", es.success, "Success slots")->required();
    estimate->add_option("--C", es.collided, "Collided slots")->required();
    estimate->add_option("--M", es.mpr, "MPR order")->required();
    estimate->add_option("--identified", es.identified, "Tags decoded (default: S)");
    estimate->add_option("--curve-out", es.curve_out, "Write normalized posterior CSV (k,probability)");
    estimate->add_option("--k-lo", es.k_lo, "Curve lower bound");
    estimate->add_option("--k-hi", es.k_hi, "Curve upper bound (default 3*n_hat+20)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitBadConfig;
    }

    try {
        if (*simulate)
            return run_simulate(sim, *simulate);
        if (*analyze) {
            if (!an.optimal_length && !an.efficiency_curve) {
                std::cerr << "analyze: pass --optimal-length or --efficiency-curve\n";
                return kExitBadConfig;
            }
            return run_analyze(an);
        }
        return run_estimate(es);
    } catch (const dfsa::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitBadConfig;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitBadConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
}
