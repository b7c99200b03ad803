#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "neucogar/harness.hpp"

namespace neucogar {

/// Error raised for malformed or inconsistent configuration files.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace config_detail {

using Tree = boost::property_tree::ptree;

inline std::vector<std::string> words(const std::string& value) {
    std::istringstream in(value);
    std::vector<std::string> out;
    for (std::string w; in >> w;) out.push_back(w);
    return out;
}

inline double to_double(const std::string& where, const std::string& s) {
    if (s == "end" || s == "inf") return std::numeric_limits<double>::infinity();
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != s.size() || s.empty()) throw ConfigError(where + ": expected a number, got '" + s + "'");
    return v;
}

inline std::uint64_t to_u64(const std::string& where, const std::string& s) {
    std::size_t used = 0;
    std::uint64_t v = 0;
    try {
        v = std::stoull(s, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != s.size() || s.empty() || s[0] == '-') {
        throw ConfigError(where + ": expected a non-negative integer, got '" + s + "'");
    }
    return v;
}

inline bool to_bool(const std::string& where, const std::string& s) {
    if (s == "true" || s == "on" || s == "yes" || s == "1") return true;
    if (s == "false" || s == "off" || s == "no" || s == "0") return false;
    throw ConfigError(where + ": expected a boolean, got '" + s + "'");
}

inline TimeWindow to_window(const std::string& where, const std::string& s) {
    const auto w = words(s);
    if (w.size() != 2) throw ConfigError(where + ": expected two numbers 't0 t1'");
    return {to_double(where, w[0]), to_double(where, w[1])};
}

inline ConnectionRule to_rule(const std::string& where, const std::string& s) {
    const auto w = words(s);
    if (w.size() == 1 && w[0] == "all_to_all") return ConnectionRule::all_to_all();
    if (w.size() == 2 && w[0] == "fixed_outdegree") {
        return ConnectionRule::fixed_outdegree(static_cast<std::size_t>(to_u64(where, w[1])));
    }
    if (w.size() == 2 && w[0] == "pairwise_bernoulli") {
        return ConnectionRule::pairwise_bernoulli(to_double(where, w[1]));
    }
    throw ConfigError(where + ": rule must be 'all_to_all', 'fixed_outdegree K' or "
                              "'pairwise_bernoulli P'");
}

inline bool apply_neuron_key(NeuronParams& p, const std::string& key, const std::string& where,
                             const std::string& value) {
    double* field = nullptr;
    if (key == "v_rest") field = &p.v_rest;
    else if (key == "v_threshold") field = &p.v_threshold;
    else if (key == "v_reset") field = &p.v_reset;
    else if (key == "tau_m") field = &p.tau_m;
    else if (key == "r_m") field = &p.r_m;
    else if (key == "t_refractory") field = &p.t_refractory;
    if (!field) return false;
    *field = to_double(where, value);
    return true;
}

inline void apply_edge_key(EdgeConfig& e, const std::string& key, const std::string& where,
                           const std::string& value) {
    if (key == "weight") e.weight = to_double(where, value);
    else if (key == "delay_ms") e.delay = to_double(where, value);
    else if (key == "probability") e.rule = ConnectionRule::pairwise_bernoulli(to_double(where, value));
    else if (key == "rule") e.rule = to_rule(where, value);
    else if (key == "receptor") e.receptor = parse_receptor(value);
    else if (key == "modulation") e.modulation = parse_modulation(value);
    else throw ConfigError(where + ": unknown key");
}

/// Applies INI sections onto a config that starts from the defaults.
class Parser {
public:
    ExperimentConfig cfg;

    void apply_section(const std::string& section, const Tree& tree);

    ExperimentConfig finish() {
        cfg.burst = burst_enabled_ ? std::optional<DopamineBurst>(burst_) : std::nullopt;
        for (const auto& key : disabled_edges_) {
            const auto arrow = key.find("->");
            cfg.circuit.remove_edge(key.substr(0, arrow), key.substr(arrow + 2));
        }
        return cfg;
    }

private:
    bool burst_enabled_ = true;
    DopamineBurst burst_;
    std::vector<std::string> disabled_edges_;
    std::vector<std::string> extra_names_;
};

inline void Parser::apply_section(const std::string& section, const Tree& tree) {
    const auto prefix = [&](std::string_view p) {
        return section.size() > p.size() && section.compare(0, p.size(), p) == 0;
    };

    if (section == "neuron") {
        // Applies to every population; population sections may override.
        for (const auto& [key, node] : tree) {
            const std::string where = "[" + section + "] " + key;
            for (auto& [name, pc] : cfg.circuit.populations) {
                if (!apply_neuron_key(pc.params, key, where, node.data())) {
                    throw ConfigError(where + ": unknown key");
                }
            }
        }
        return;
    }

    for (const auto& [key, node] : tree) {
        const std::string where = "[" + section + "] " + key;
        const std::string& v = node.data();
        if (section == "experiment") {
            if (key == "duration_ms") cfg.duration_ms = to_double(where, v);
            else if (key == "seed") cfg.seed = to_u64(where, v);
            else if (key == "dt_ms") cfg.circuit.dt = to_double(where, v);
            else if (key == "baseline_window_ms") cfg.baseline = to_window(where, v);
            else if (key == "effect_window_ms") cfg.effect = to_window(where, v);
            else if (key == "elevation_threshold") cfg.elevation_threshold = to_double(where, v);
            else if (key == "ratio_epsilon_hz") cfg.ratio_epsilon_hz = to_double(where, v);
            else if (key == "rate_bin_ms") cfg.rate_bin_ms = to_double(where, v);
            else if (key == "extra_recorders") cfg.extra_recorders = words(v);
            else if (key == "serotonin") cfg.serotonin = to_double(where, v);
            else if (key == "noradrenaline") cfg.noradrenaline = to_double(where, v);
            else if (key == "out_dir") cfg.out_dir = v;
            else throw ConfigError(where + ": unknown key");
        } else if (section == "metrics") {
            if (key == "rate_ceiling_hz") cfg.metrics.rate_ceiling_hz = to_double(where, v);
            else if (key == "persistence_threshold_pa")
                cfg.metrics.persistence_threshold_pa = to_double(where, v);
            else if (key == "persistence_interval_ms")
                cfg.metrics.persistence_interval_ms = to_double(where, v);
            else throw ConfigError(where + ": unknown key");
        } else if (section == "dopamine") {
            if (key == "baseline") cfg.circuit.dopamine.baseline = to_double(where, v);
            else if (key == "burst") burst_enabled_ = to_bool(where, v);
            else if (key == "burst_start_ms") burst_.t_start = to_double(where, v);
            else if (key == "burst_amplitude") burst_.amplitude = to_double(where, v);
            else if (key == "burst_tau_ms") burst_.tau_decay = to_double(where, v);
            else if (key == "alpha_d1") cfg.circuit.gains.alpha_d1 = to_double(where, v);
            else if (key == "beta_d2") cfg.circuit.gains.beta_d2 = to_double(where, v);
            else throw ConfigError(where + ": unknown key");
        } else if (section == "stimulus") {
            if (cfg.circuit.stimuli.empty()) cfg.circuit.stimuli.emplace_back();
            auto& s = cfg.circuit.stimuli.front();
            if (key == "population") s.population = v;
            else if (key == "window_ms") {
                const auto w = to_window(where, v);
                s.t0 = w.t0;
                s.t1 = w.t1;
            } else if (key == "rate_hz") s.rate_hz = to_double(where, v);
            else if (key == "weight_pa") s.weight_pa = to_double(where, v);
            else throw ConfigError(where + ": unknown key");
        } else if (section == "cube") {
            if (key == "table") {
                const auto labels = words(v);
                if (labels.size() != 8) throw ConfigError(where + ": expected 8 affect labels");
                for (std::size_t i = 0; i < 8; ++i) {
                    try {
                        cfg.affect_table.by_octant[i] = parse_affect(labels[i]);
                    } catch (const std::invalid_argument& e) {
                        throw ConfigError(where + ": " + e.what());
                    }
                }
            } else {
                std::size_t row = 5;
                for (std::size_t r = 0; r < 5; ++r) {
                    if (key == MetricsVector::kNames[r]) row = r;
                }
                if (row == 5) throw ConfigError(where + ": unknown key");
                const auto w = words(v);
                if (w.size() != 3) {
                    throw ConfigError(where + ": influence row needs 3 numbers (5-HT DA NE)");
                }
                for (std::size_t c = 0; c < 3; ++c) {
                    cfg.influence(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(c)) =
                        to_double(where, w[c]);
                }
            }
        } else if (prefix("population:")) {
            const std::string name = section.substr(std::string_view("population:").size());
            const auto it = cfg.circuit.populations.find(name);
            if (it == cfg.circuit.populations.end()) {
                throw ConfigError("[" + section + "]: unknown population '" + name + "'");
            }
            auto& pc = it->second;
            if (key == "size") pc.size = static_cast<std::size_t>(to_u64(where, v));
            else if (key == "noise_rate_hz") pc.noise_rate_hz = to_double(where, v);
            else if (key == "noise_weight_pa") pc.noise_weight_pa = to_double(where, v);
            else if (!apply_neuron_key(pc.params, key, where, v)) {
                throw ConfigError(where + ": unknown key");
            }
        } else if (prefix("edge:")) {
            const std::string edge_key = section.substr(std::string_view("edge:").size());
            const auto arrow = edge_key.find("->");
            if (arrow == std::string::npos) throw ConfigError("[" + section + "]: expected SOURCE->TARGET");
            EdgeConfig* e = nullptr;
            try {
                e = &cfg.circuit.edge(edge_key.substr(0, arrow), edge_key.substr(arrow + 2));
            } catch (const std::invalid_argument& ex) {
                throw ConfigError("[" + section + "]: " + ex.what());
            }
            if (key == "enabled") {
                if (!to_bool(where, v)) disabled_edges_.push_back(edge_key);
            } else {
                apply_edge_key(*e, key, where, v);
            }
        } else if (prefix("extra_edge:")) {
            // Section order is preserved, so an extra edge is created on first key.
            if (extra_names_.empty() || extra_names_.back() != section) {
                extra_names_.push_back(section);
                cfg.circuit.extra_edges.emplace_back();
            }
            auto& e = cfg.circuit.extra_edges.back();
            if (key == "source") e.source = v;
            else if (key == "target") e.target = v;
            else apply_edge_key(e, key, where, v);
        } else {
            throw ConfigError("unknown section [" + section + "]");
        }
    }
}

}  // namespace config_detail

/// Parse an experiment config from INI text, starting from the built-in
/// defaults. Unknown sections or keys are errors.
inline ExperimentConfig parse_experiment_config(std::istream& in, const std::string& origin = "<config>") {
    namespace cd = config_detail;
    cd::Tree tree;
    try {
        boost::property_tree::ini_parser::read_ini(in, tree);
    } catch (const boost::property_tree::ini_parser_error& e) {
        throw ConfigError(origin + ": " + e.message() + " (line " + std::to_string(e.line()) + ")");
    }
    cd::Parser parser;
    // [neuron] first so population sections override it regardless of order.
    for (const auto& [section, node] : tree) {
        if (section == "neuron") parser.apply_section(section, node);
    }
    for (const auto& [section, node] : tree) {
        if (!node.data().empty() && node.empty()) {
            throw ConfigError(origin + ": key '" + section + "' outside any section");
        }
        if (section == "neuron") continue;
        try {
            parser.apply_section(section, node);
        } catch (const ConfigError& e) {
            throw ConfigError(origin + ": " + e.what());
        } catch (const std::invalid_argument& e) {
            throw ConfigError(origin + ": [" + section + "] " + e.what());
        }
    }
    ExperimentConfig cfg = parser.finish();
    try {
        cfg.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(origin + ": " + e.what());
    }
    return cfg;
}

inline ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config '" + path.string() + "'");
    return parse_experiment_config(in, path.string());
}

}  // namespace neucogar
