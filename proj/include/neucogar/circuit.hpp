#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "neucogar/network.hpp"
#include "neucogar/neuromodulation.hpp"

namespace neucogar {

namespace pop {
inline constexpr std::string_view kCortex = "Cortex";
inline constexpr std::string_view kStriatumD1 = "Striatum_D1";
inline constexpr std::string_view kStriatumD2 = "Striatum_D2";
inline constexpr std::string_view kGPe = "GPe";
inline constexpr std::string_view kGPiSNr = "GPi_SNr";
inline constexpr std::string_view kSTN = "STN";
inline constexpr std::string_view kSNc = "SNc";
inline constexpr std::string_view kThalamus = "Thalamus";
inline constexpr std::string_view kMotorCortex = "MotorCortex";
}  // namespace pop

/// Populations of the nigrostriatal circuit, in construction order.
inline constexpr std::array<std::string_view, 9> kCircuitPopulations = {
    pop::kCortex,  pop::kStriatumD1, pop::kStriatumD2, pop::kGPe,        pop::kGPiSNr,
    pop::kSTN,     pop::kSNc,        pop::kThalamus,   pop::kMotorCortex};

struct PopulationConfig {
    std::size_t size = 1;
    double noise_rate_hz = 0.0;
    double noise_weight_pa = 0.0;
    NeuronParams params;

    bool operator==(const PopulationConfig&) const = default;
};

struct EdgeConfig {
    std::string source;
    std::string target;
    Receptor receptor = Receptor::Glutamate;
    Modulation modulation = Modulation::None;
    ConnectionRule rule = ConnectionRule::pairwise_bernoulli(0.1);
    double weight = 0.0;  // pA
    double delay = 1.0;   // ms

    std::string key() const { return source + "->" + target; }

    bool operator==(const EdgeConfig&) const = default;
};

struct StimulusConfig {
    std::string population{pop::kCortex};
    double t0 = 0.0;
    double t1 = std::numeric_limits<double>::infinity();  // until the end of the run
    double rate_hz = 0.0;
    double weight_pa = 0.0;

    bool operator==(const StimulusConfig&) const = default;
};

struct CircuitConfig {
    double dt = 0.1;
    std::map<std::string, PopulationConfig> populations;
    std::vector<EdgeConfig> edges;        // pathway edges, overridable by key
    std::vector<EdgeConfig> extra_edges;  // user-supplied additions
    DopamineTrace dopamine;
    ReceptorGainParams gains;
    std::vector<StimulusConfig> stimuli;

    /// Desk-scale defaults. Background drive is many small pulses so most
    /// populations are mean-driven; the balance below was tuned so Thalamus and
    /// MotorCortex hold steady rates without a burst and respond to one.
    static CircuitConfig defaults() {
        CircuitConfig c;

        auto add_pop = [&](std::string_view name, std::size_t size, double rate, double w) {
            c.populations[std::string(name)] = PopulationConfig{size, rate, w, NeuronParams{}};
        };
        add_pop(pop::kCortex, 400, 5500.0, 20.0);
        add_pop(pop::kStriatumD1, 150, 1500.0, 20.0);
        add_pop(pop::kStriatumD2, 150, 1500.0, 20.0);
        add_pop(pop::kGPe, 80, 8500.0, 20.0);
        add_pop(pop::kGPiSNr, 80, 8000.0, 20.0);
        add_pop(pop::kSTN, 60, 8000.0, 20.0);
        add_pop(pop::kSNc, 40, 1200.0, 80.0);
        add_pop(pop::kThalamus, 100, 9800.0, 20.0);
        add_pop(pop::kMotorCortex, 200, 5200.0, 20.0);

        auto edge = [&](std::string_view s, std::string_view t, Receptor r, Modulation m,
                        double w) {
            c.edges.push_back(EdgeConfig{std::string(s), std::string(t), r, m,
                                         ConnectionRule::pairwise_bernoulli(0.1), w, 1.0});
        };
        using R = Receptor;
        using M = Modulation;
        // Direct pathway.
        edge(pop::kCortex, pop::kStriatumD1, R::Glutamate, M::D1, 100.0);
        edge(pop::kStriatumD1, pop::kGPiSNr, R::Gaba, M::None, -400.0);
        edge(pop::kGPiSNr, pop::kThalamus, R::Gaba, M::None, -250.0);
        edge(pop::kThalamus, pop::kCortex, R::Glutamate, M::None, 5.0);
        edge(pop::kThalamus, pop::kMotorCortex, R::Glutamate, M::None, 100.0);
        edge(pop::kCortex, pop::kMotorCortex, R::Glutamate, M::None, 30.0);
        // Indirect pathway.
        edge(pop::kCortex, pop::kStriatumD2, R::Glutamate, M::D2, 100.0);
        edge(pop::kStriatumD2, pop::kGPe, R::Gaba, M::None, -300.0);
        edge(pop::kGPe, pop::kSTN, R::Gaba, M::None, -100.0);
        edge(pop::kSTN, pop::kGPiSNr, R::Glutamate, M::None, 150.0);

        c.stimuli.push_back(StimulusConfig{std::string(pop::kCortex), 0.0,
                                           std::numeric_limits<double>::infinity(), 300.0, 80.0});
        return c;
    }

    EdgeConfig& edge(std::string_view source, std::string_view target) {
        for (auto& e : edges) {
            if (e.source == source && e.target == target) return e;
        }
        throw std::invalid_argument("unknown edge '" + std::string(source) + "->" +
                                    std::string(target) + "'");
    }

    const EdgeConfig& edge(std::string_view source, std::string_view target) const {
        return const_cast<CircuitConfig*>(this)->edge(source, target);
    }

    void remove_edge(std::string_view source, std::string_view target) {
        auto& e = edge(source, target);
        edges.erase(edges.begin() + (&e - edges.data()));
    }

    void validate() const {
        for (auto name : kCircuitPopulations) {
            const auto it = populations.find(std::string(name));
            if (it == populations.end()) {
                throw std::invalid_argument("circuit config: missing population '" +
                                            std::string(name) + "'");
            }
            if (it->second.size < 1) {
                throw std::invalid_argument("circuit config: population '" + std::string(name) +
                                            "' must have size >= 1");
            }
        }
        for (const auto& [name, p] : populations) {
            if (std::find(kCircuitPopulations.begin(), kCircuitPopulations.end(), name) ==
                kCircuitPopulations.end()) {
                throw std::invalid_argument("circuit config: unknown population '" + name + "'");
            }
            p.params.validate();
        }
        dopamine.validate();
        gains.validate();
    }

    bool operator==(const CircuitConfig&) const = default;
};

/// Poisson drive on `population` for steps starting in [t0, t1).
inline void apply_stimulus(Network& net, std::string_view population, double t0, double t1,
                           double rate_hz, double weight_pa) {
    if (!(t0 <= t1)) throw std::invalid_argument("apply_stimulus: require t0 <= t1");
    net.add_poisson_drive(net.handle(population), t0, t1, rate_hz, weight_pa);
}

/// Build the nigrostriatal pathway: the direct and indirect chains, the
/// thalamo-cortical outputs, SNc dopamine markers on the striatum, and the
/// configured cortical stimuli.
inline Network build_nigrostriatal(const CircuitConfig& config, std::uint64_t seed) {
    config.validate();
    Network net(NetworkOptions{config.dt, seed});
    for (auto name : kCircuitPopulations) {
        const auto& p = config.populations.at(std::string(name));
        net.add_population(
            PopulationSpec{std::string(name), p.size, p.params, p.noise_rate_hz, p.noise_weight_pa});
    }
    auto add_edges = [&](const std::vector<EdgeConfig>& edges) {
        for (const auto& e : edges) {
            const auto src = net.find(e.source);
            const auto tgt = net.find(e.target);
            if (!src || !tgt) throw std::invalid_argument("circuit config: edge '" + e.key() +
                                                          "' names an unknown population");
            if (e.receptor == Receptor::DopamineD1 || e.receptor == Receptor::DopamineD2) {
                net.add_modulatory_projection(*src, *tgt, e.receptor);
            } else {
                net.connect(*src, *tgt, e.rule, e.weight, e.delay, e.receptor, e.modulation);
            }
        }
    };
    add_edges(config.edges);
    add_edges(config.extra_edges);
    net.add_modulatory_projection(net.handle(pop::kSNc), net.handle(pop::kStriatumD1),
                                  Receptor::DopamineD1);
    net.add_modulatory_projection(net.handle(pop::kSNc), net.handle(pop::kStriatumD2),
                                  Receptor::DopamineD2);
    net.set_dopamine(config.dopamine, config.gains);
    for (const auto& s : config.stimuli) {
        apply_stimulus(net, s.population, s.t0, s.t1, s.rate_hz, s.weight_pa);
    }
    return net;
}

}  // namespace neucogar
