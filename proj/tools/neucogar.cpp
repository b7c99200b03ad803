// neucogar: run the dopamine-burst experiment, dump the circuit topology, or
// classify a monoamine coordinate.

#include <cstdint>
#include <exception>
#include <filesystem>
#include <future>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "neucogar/neucogar.hpp"

namespace {

using neucogar::ExperimentConfig;

ExperimentConfig load_or_default(const std::string& path) {
    return path.empty() ? ExperimentConfig{} : neucogar::load_experiment_config(path);
}

void print_summary(std::ostream& out, const neucogar::Report& r) {
    out << "seed " << r.seed << (r.burst ? " (burst)" : " (no burst)") << '\n';
    for (const auto& p : r.populations) {
        out << "  " << p.name << ": baseline " << neucogar::detail::format_fixed(p.baseline_hz, 2)
            << " Hz, effect " << neucogar::detail::format_fixed(p.effect_hz, 2) << " Hz, ratio "
            << neucogar::detail::format_fixed(p.ratio, 3) << '\n';
    }
    out << "  affect: baseline " << to_string(r.baseline.affect) << ", effect "
        << to_string(r.effect.affect) << '\n';
    if (r.burst) {
        out << "  elevation check (> " << r.elevation_threshold
            << "x): " << (r.elevation_passed ? "PASS" : "FAIL") << '\n';
    }
}

struct RunOptions {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<double> duration_ms;
    std::optional<std::string> out_dir;
    bool no_burst = false;
    bool check = false;
    unsigned runs = 1;
};

int run_command(const RunOptions& opt) {
    ExperimentConfig base = load_or_default(opt.config);
    if (opt.seed) base.seed = *opt.seed;
    if (opt.duration_ms) base.duration_ms = *opt.duration_ms;
    if (opt.out_dir) base.out_dir = *opt.out_dir;
    if (opt.no_burst) base.burst.reset();
    base.validate();

    std::vector<ExperimentConfig> configs;
    for (unsigned i = 0; i < opt.runs; ++i) {
        ExperimentConfig c = base;
        c.seed = base.seed + i;
        if (opt.runs > 1) {
            c.out_dir = (std::filesystem::path(base.out_dir) / ("seed_" + std::to_string(c.seed))).string();
        }
        configs.push_back(std::move(c));
    }

    // Independent runs; each owns its network and output directory.
    std::vector<std::future<neucogar::Report>> jobs;
    for (const auto& c : configs) {
        jobs.push_back(std::async(opt.runs > 1 ? std::launch::async : std::launch::deferred, [c] {
            auto result = neucogar::run_experiment(c);
            neucogar::write_outputs(result.report, result.record, result.network, c.out_dir,
                                    c.rate_bin_ms);
            return result.report;
        }));
    }
    bool all_passed = true;
    for (auto& job : jobs) {
        const auto report = job.get();
        print_summary(std::cout, report);
        if (report.burst && !report.elevation_passed) all_passed = false;
    }
    return (opt.check && !all_passed) ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Nigrostriatal dopamine pathway simulator with a monoamine affect layer"};
    app.require_subcommand(1);

    RunOptions run;
    auto* run_cmd = app.add_subcommand("run", "Run the dopamine-burst experiment");
    run_cmd->add_option("--config", run.config, "Config file (INI)")->check(CLI::ExistingFile);
    run_cmd->add_option("--seed", run.seed, "Random seed");
    run_cmd->add_flag("--no-burst", run.no_burst, "Disable the dopamine burst");
    run_cmd->add_option("--out-dir", run.out_dir, "Output directory");
    run_cmd->add_option("--duration-ms", run.duration_ms, "Simulated time (ms)");
    run_cmd->add_flag("--check", run.check, "Exit non-zero unless the elevation check passes");
    run_cmd->add_option("--runs", run.runs, "Seed sweep: run seeds seed..seed+N-1 in parallel")
        ->check(CLI::PositiveNumber);

    std::string topo_config;
    std::uint64_t topo_seed = 1;
    bool topo_seed_set = false;
    std::string topo_out;
    auto* topo_cmd = app.add_subcommand("dump-topology", "Write the circuit edge list as CSV");
    topo_cmd->add_option("--config", topo_config, "Config file (INI)")->check(CLI::ExistingFile);
    topo_cmd->add_option("--seed", topo_seed, "Random seed")->each([&](const std::string&) {
        topo_seed_set = true;
    });
    topo_cmd->add_option("--out", topo_out, "Output file (default: stdout)");

    std::vector<double> coord;
    std::string classify_config;
    auto* classify_cmd = app.add_subcommand("classify", "Print the affect of a monoamine coordinate");
    classify_cmd->add_option("levels", coord, "serotonin dopamine noradrenaline, each in [0,1]")
        ->expected(3)
        ->required();
    classify_cmd->add_option("--config", classify_config, "Config file with a [cube] table")
        ->check(CLI::ExistingFile);

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run_cmd) return run_command(run);

        if (*topo_cmd) {
            ExperimentConfig cfg = load_or_default(topo_config);
            if (topo_seed_set) cfg.seed = topo_seed;
            const auto net = neucogar::build_nigrostriatal(cfg.circuit, cfg.seed);
            const std::string csv = neucogar::topology_csv(net);
            if (topo_out.empty()) {
                std::cout << csv;
            } else {
                neucogar::detail::write_file(topo_out, csv);
            }
            return 0;
        }

        if (*classify_cmd) {
            const ExperimentConfig cfg = load_or_default(classify_config);
            const neucogar::MonoamineCoordinate c{coord[0], coord[1], coord[2]};
            std::cout << to_string(neucogar::classify_affect(c, cfg.affect_table)) << '\n';
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "neucogar: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
