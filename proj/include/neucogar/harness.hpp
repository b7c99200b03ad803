#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "neucogar/circuit.hpp"
#include "neucogar/cube.hpp"
#include "neucogar/io.hpp"
#include "neucogar/metrics.hpp"
#include "neucogar/network.hpp"

namespace neucogar {

struct ExperimentConfig {
    CircuitConfig circuit = CircuitConfig::defaults();
    double duration_ms = 1000.0;
    std::optional<DopamineBurst> burst = DopamineBurst{};
    TimeWindow baseline{100.0, 400.0};
    TimeWindow effect{400.0, 550.0};
    std::uint64_t seed = 1;
    std::string out_dir = "out";
    std::vector<std::string> extra_recorders;

    // Axes of the monoamine coordinate not driven by the simulation.
    double serotonin = 0.2;
    double noradrenaline = 0.7;

    double elevation_threshold = 1.3;
    double ratio_epsilon_hz = 0.1;  // floor for the baseline rate in ratios
    double rate_bin_ms = 10.0;
    MetricsParams metrics;
    AffectTable affect_table = AffectTable::defaults();
    InfluenceMatrix influence = default_influence_matrix();

    void validate() const {
        circuit.validate();
        if (!(duration_ms >= 0.0)) throw std::invalid_argument("config: duration must be >= 0");
        for (const auto* w : {&baseline, &effect}) {
            if (!(w->t0 >= 0.0 && w->t0 < w->t1 && w->t1 <= duration_ms)) {
                throw std::invalid_argument("config: analysis windows must be non-empty and lie in "
                                            "[0, duration]");
            }
        }
        if (burst) {
            DopamineTrace probe{circuit.dopamine.baseline, {*burst}};
            probe.validate();
            if (effect.t0 < burst->t_start) {
                throw std::invalid_argument("config: effect window must start at or after the burst");
            }
        }
        MonoamineCoordinate{serotonin, 0.5, noradrenaline}.validate();
        if (!(elevation_threshold > 0.0)) throw std::invalid_argument("config: bad elevation threshold");
        if (!(ratio_epsilon_hz > 0.0)) throw std::invalid_argument("config: ratio epsilon must be > 0");
        if (!(rate_bin_ms > 0.0)) throw std::invalid_argument("config: rate bin must be > 0");
        affect_table.validate();
        if (influence.rows() != 5 || influence.cols() != 3) {
            throw std::invalid_argument("config: influence matrix must be 5x3");
        }
        for (const auto& r : extra_recorders) {
            if (!circuit.populations.contains(r)) {
                throw std::invalid_argument("config: unknown recorder population '" + r + "'");
            }
        }
    }

    bool operator==(const ExperimentConfig& o) const {
        return circuit == o.circuit && duration_ms == o.duration_ms && burst == o.burst &&
               baseline == o.baseline && effect == o.effect && seed == o.seed &&
               out_dir == o.out_dir && extra_recorders == o.extra_recorders &&
               serotonin == o.serotonin && noradrenaline == o.noradrenaline &&
               elevation_threshold == o.elevation_threshold &&
               ratio_epsilon_hz == o.ratio_epsilon_hz && rate_bin_ms == o.rate_bin_ms &&
               metrics == o.metrics && affect_table == o.affect_table &&
               influence.rows() == o.influence.rows() && influence.cols() == o.influence.cols() &&
               influence == o.influence;
    }
};

struct PopulationRates {
    std::string name;
    double baseline_hz = 0.0;
    double effect_hz = 0.0;
    double ratio = 0.0;

    bool operator==(const PopulationRates&) const = default;
};

struct WindowSummary {
    TimeWindow window;
    MetricsVector metrics;
    MonoamineCoordinate monoamines;
    AffectLabel affect = AffectLabel::ShameHumiliation;

    bool operator==(const WindowSummary&) const = default;
};

struct Report {
    std::uint64_t seed = 0;
    bool burst = false;
    double duration_ms = 0.0;
    std::vector<PopulationRates> populations;
    WindowSummary baseline;
    WindowSummary effect;
    double elevation_threshold = 0.0;
    bool elevation_passed = false;

    const PopulationRates& rates(std::string_view name) const {
        for (const auto& p : populations) {
            if (p.name == name) return p;
        }
        throw std::out_of_range("report has no population '" + std::string(name) + "'");
    }

    bool operator==(const Report&) const = default;
};

struct ExperimentResult {
    Report report;
    SpikeRecord record;
    Network network;
};

/// Mean rate (Hz) of one recorded population within a window.
inline double window_rate(const SpikeRecord& record, const RecordedPopulation& p, TimeWindow w) {
    return static_cast<double>(record.count(p.index, w.t0, w.t1)) /
           (static_cast<double>(p.size) * w.length() / 1000.0);
}

/// Peak dopamine level over the step times inside a window.
inline double peak_dopamine(const DopamineTrace& trace, TimeWindow w, double dt) {
    double peak = 0.0;
    const auto first = static_cast<std::int64_t>(std::ceil(w.t0 / dt - 1e-9));
    for (std::int64_t k = first; static_cast<double>(k) * dt < w.t1 - 1e-9; ++k) {
        peak = std::max(peak, dopamine_level(trace, static_cast<double>(k) * dt));
    }
    return peak;
}

inline std::set<std::string> recorder_set(const ExperimentConfig& config) {
    std::set<std::string> rec{std::string(pop::kThalamus), std::string(pop::kMotorCortex)};
    rec.insert(config.extra_recorders.begin(), config.extra_recorders.end());
    return rec;
}

/// Build the circuit, drive it for the configured duration with the optional
/// dopamine burst, and summarize the baseline and effect windows.
inline ExperimentResult run_experiment(const ExperimentConfig& config) {
    config.validate();
    CircuitConfig circuit = config.circuit;
    if (config.burst) circuit.dopamine.bursts.push_back(*config.burst);

    Network net = build_nigrostriatal(circuit, config.seed);
    SpikeRecord record = net.simulate(config.duration_ms, recorder_set(config));

    Report report;
    report.seed = config.seed;
    report.burst = config.burst.has_value();
    report.duration_ms = config.duration_ms;
    report.elevation_threshold = config.elevation_threshold;
    for (const auto& p : record.populations) {
        PopulationRates r{p.name, window_rate(record, p, config.baseline),
                          window_rate(record, p, config.effect), 0.0};
        r.ratio = r.effect_hz / std::max(r.baseline_hz, config.ratio_epsilon_hz);
        report.populations.push_back(r);
    }

    auto summarize = [&](TimeWindow w) {
        WindowSummary s;
        s.window = w;
        s.metrics = compute_metrics(record, net, w, config.metrics);
        s.monoamines = MonoamineCoordinate{config.serotonin,
                                           peak_dopamine(net.dopamine(), w, net.dt()),
                                           config.noradrenaline};
        s.affect = classify_affect(s.monoamines, config.affect_table);
        return s;
    };
    report.baseline = summarize(config.baseline);
    report.effect = summarize(config.effect);
    report.elevation_passed =
        report.rates(pop::kThalamus).ratio > config.elevation_threshold &&
        report.rates(pop::kMotorCortex).ratio > config.elevation_threshold;
    return ExperimentResult{std::move(report), std::move(record), std::move(net)};
}

// Report serialization. Keys are emitted in a fixed order.

inline nlohmann::ordered_json to_json(const MetricsVector& m) {
    nlohmann::ordered_json j;
    j["computing_utilization"] = m.computing_utilization;
    j["computing_distribution"] = m.computing_distribution;
    j["memory_distribution"] = m.memory_distribution;
    j["storage_volume"] = m.storage_volume;
    j["storage_bandwidth"] = m.storage_bandwidth;
    return j;
}

inline nlohmann::ordered_json to_json(const WindowSummary& s) {
    nlohmann::ordered_json j;
    j["window_ms"] = {s.window.t0, s.window.t1};
    j["metrics"] = to_json(s.metrics);
    j["monoamines"] = {{"serotonin", s.monoamines.serotonin},
                       {"dopamine", s.monoamines.dopamine},
                       {"noradrenaline", s.monoamines.noradrenaline}};
    j["affect"] = std::string(to_string(s.affect));
    return j;
}

inline nlohmann::ordered_json to_json(const Report& r) {
    nlohmann::ordered_json j;
    j["schema"] = "neucogar-report/1";
    j["seed"] = r.seed;
    j["burst"] = r.burst;
    j["duration_ms"] = r.duration_ms;
    auto& pops = j["populations"] = nlohmann::ordered_json::array();
    for (const auto& p : r.populations) {
        nlohmann::ordered_json e;
        e["name"] = p.name;
        e["baseline_rate_hz"] = p.baseline_hz;
        e["effect_rate_hz"] = p.effect_hz;
        e["ratio"] = p.ratio;
        pops.push_back(std::move(e));
    }
    j["baseline"] = to_json(r.baseline);
    j["effect"] = to_json(r.effect);
    j["elevation_threshold"] = r.elevation_threshold;
    j["elevation_passed"] = r.elevation_passed;
    return j;
}

inline MetricsVector metrics_from_json(const nlohmann::ordered_json& j) {
    return {j.at("computing_utilization").get<double>(), j.at("computing_distribution").get<double>(),
            j.at("memory_distribution").get<double>(), j.at("storage_volume").get<double>(),
            j.at("storage_bandwidth").get<double>()};
}

inline WindowSummary summary_from_json(const nlohmann::ordered_json& j) {
    WindowSummary s;
    s.window = {j.at("window_ms").at(0).get<double>(), j.at("window_ms").at(1).get<double>()};
    s.metrics = metrics_from_json(j.at("metrics"));
    const auto& m = j.at("monoamines");
    s.monoamines = {m.at("serotonin").get<double>(), m.at("dopamine").get<double>(),
                    m.at("noradrenaline").get<double>()};
    s.affect = parse_affect(j.at("affect").get<std::string>());
    return s;
}

inline Report report_from_json(const nlohmann::ordered_json& j) {
    if (j.value("schema", "") != "neucogar-report/1") {
        throw std::runtime_error("report: unsupported schema");
    }
    Report r;
    r.seed = j.at("seed").get<std::uint64_t>();
    r.burst = j.at("burst").get<bool>();
    r.duration_ms = j.at("duration_ms").get<double>();
    for (const auto& e : j.at("populations")) {
        r.populations.push_back(PopulationRates{e.at("name").get<std::string>(),
                                                e.at("baseline_rate_hz").get<double>(),
                                                e.at("effect_rate_hz").get<double>(),
                                                e.at("ratio").get<double>()});
    }
    r.baseline = summary_from_json(j.at("baseline"));
    r.effect = summary_from_json(j.at("effect"));
    r.elevation_threshold = j.at("elevation_threshold").get<double>();
    r.elevation_passed = j.at("elevation_passed").get<bool>();
    return r;
}

inline std::string report_json(const Report& r) { return to_json(r).dump(2) + "\n"; }

inline Report read_report(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open '" + path.string() + "'");
    try {
        return report_from_json(nlohmann::ordered_json::parse(in));
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error("'" + path.string() + "': " + e.what());
    }
}

struct OutputFiles {
    std::filesystem::path raster;
    std::filesystem::path rates;
    std::filesystem::path report;
    std::filesystem::path topology;
};

/// Write raster.csv, rates.csv, report.json and topology.csv into `dir`.
inline OutputFiles write_outputs(const Report& report, const SpikeRecord& record,
                                 const Network& net, const std::filesystem::path& dir,
                                 double rate_bin_ms = 10.0) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw std::runtime_error("cannot create '" + dir.string() + "': " + ec.message());
    OutputFiles files{dir / "raster.csv", dir / "rates.csv", dir / "report.json",
                      dir / "topology.csv"};
    detail::write_file(files.raster, raster_csv(record));
    detail::write_file(files.rates, rates_csv(record, rate_bin_ms));
    detail::write_file(files.report, report_json(report));
    detail::write_file(files.topology, topology_csv(net));
    return files;
}

}  // namespace neucogar
