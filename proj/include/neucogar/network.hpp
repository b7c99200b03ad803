#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "neucogar/neuromodulation.hpp"
#include "neucogar/neuron.hpp"
#include "neucogar/random.hpp"

namespace neucogar {

enum class Receptor { Glutamate, Gaba, DopamineD1, DopamineD2 };

inline std::string_view to_string(Receptor r) noexcept {
    switch (r) {
        case Receptor::Glutamate: return "GLUTAMATE";
        case Receptor::Gaba: return "GABA";
        case Receptor::DopamineD1: return "DOPAMINE_D1";
        case Receptor::DopamineD2: return "DOPAMINE_D2";
    }
    return "?";
}

inline Receptor parse_receptor(std::string_view s) {
    if (s == "GLUTAMATE") return Receptor::Glutamate;
    if (s == "GABA") return Receptor::Gaba;
    if (s == "DOPAMINE_D1") return Receptor::DopamineD1;
    if (s == "DOPAMINE_D2") return Receptor::DopamineD2;
    throw std::invalid_argument("unknown receptor '" + std::string(s) + "'");
}

inline std::string_view to_string(Modulation m) noexcept {
    switch (m) {
        case Modulation::None: return "NONE";
        case Modulation::D1: return "D1";
        case Modulation::D2: return "D2";
    }
    return "?";
}

inline Modulation parse_modulation(std::string_view s) {
    if (s == "NONE" || s.empty()) return Modulation::None;
    if (s == "D1") return Modulation::D1;
    if (s == "D2") return Modulation::D2;
    throw std::invalid_argument("unknown modulation '" + std::string(s) + "'");
}

struct ConnectionRule {
    enum class Kind { AllToAll, FixedOutdegree, PairwiseBernoulli };

    Kind kind = Kind::AllToAll;
    std::size_t outdegree = 0;
    double probability = 0.0;

    static ConnectionRule all_to_all() { return {Kind::AllToAll, 0, 0.0}; }
    static ConnectionRule fixed_outdegree(std::size_t k) { return {Kind::FixedOutdegree, k, 0.0}; }
    static ConnectionRule pairwise_bernoulli(double p) { return {Kind::PairwiseBernoulli, 0, p}; }

    bool operator==(const ConnectionRule&) const = default;
};

struct PopulationSpec {
    std::string name;
    std::size_t size = 1;
    NeuronParams params;
    double noise_rate_hz = 0.0;    // Poisson background drive per neuron
    double noise_weight_pa = 0.0;  // current pulse per background event
};

struct PopulationHandle {
    std::size_t index = 0;
    bool operator==(const PopulationHandle&) const = default;
};

struct NeuronRef {
    std::size_t population = 0;
    std::size_t index = 0;
    bool operator==(const NeuronRef&) const = default;
};

struct SynapseSpec {
    NeuronRef source;
    NeuronRef target;
    double weight = 0.0;  // pA, positive for glutamate, negative for GABA
    double delay = 1.0;   // ms
    Receptor receptor = Receptor::Glutamate;
    Modulation modulation = Modulation::None;
    std::size_t projection = 0;
};

/// One call to connect(), or one dopamine marker, kept for topology dumps.
struct Projection {
    std::size_t source = 0;
    std::size_t target = 0;
    Receptor receptor = Receptor::Glutamate;
    Modulation modulation = Modulation::None;
    ConnectionRule rule;
    double weight = 0.0;
    double delay = 0.0;
    std::size_t first_synapse = 0;
    std::size_t synapse_count = 0;
    bool volume = false;  // dopamine marker, no current-carrying synapses
};

struct SpikeEvent {
    std::int64_t step = 0;
    std::uint32_t population = 0;
    std::uint32_t neuron = 0;

    bool operator==(const SpikeEvent&) const = default;
};

struct RecordedPopulation {
    std::uint32_t index = 0;
    std::string name;
    std::size_t size = 0;

    bool operator==(const RecordedPopulation&) const = default;
};

/// Spikes of the recorded populations, ordered by time, then population
/// name, then neuron index. `populations` lists every recorded population
/// (including silent ones) in name order.
struct SpikeRecord {
    double dt = 0.1;
    double t_begin = 0.0;
    double t_end = 0.0;
    std::vector<RecordedPopulation> populations;
    std::vector<SpikeEvent> events;

    double time_of(const SpikeEvent& e) const noexcept { return static_cast<double>(e.step) * dt; }

    const RecordedPopulation* find(std::uint32_t population) const noexcept {
        for (const auto& p : populations) {
            if (p.index == population) return &p;
        }
        return nullptr;
    }

    const RecordedPopulation* find(std::string_view name) const noexcept {
        for (const auto& p : populations) {
            if (p.name == name) return &p;
        }
        return nullptr;
    }

    /// Spikes of one population with time in [t0, t1).
    std::size_t count(std::uint32_t population, double t0, double t1) const noexcept {
        std::size_t n = 0;
        for (const auto& e : events) {
            const double t = time_of(e);
            if (e.population == population && t >= t0 && t < t1) ++n;
        }
        return n;
    }

    bool operator==(const SpikeRecord&) const = default;
};

/// A spike-to-current delivery, logged only when delivery logging is on.
struct Delivery {
    std::int64_t spike_step = 0;
    std::int64_t arrival_step = 0;
    std::uint32_t synapse = 0;
};

struct NetworkOptions {
    double dt = 0.1;  // ms
    std::uint64_t seed = 0;
};

/// Fixed-step spiking network with delayed, dopamine-gated synaptic currents.
///
/// Each step k integrates every neuron over [k dt, (k+1) dt] with the current
/// that arrived at step k; spikes are stamped (k+1) dt. A spike at T is
/// delivered into the step starting at T + delay, scaled by the receptor gain
/// at that arrival time. Deliveries are accumulated per target in synapse
/// order, so the result is independent of which populations are recorded.
class Network {
public:
    explicit Network(NetworkOptions options = {}) : options_(options) {
        if (!(options_.dt > 0.0) || !std::isfinite(options_.dt)) {
            throw std::invalid_argument("Network: dt must be finite and > 0");
        }
    }

    double dt() const noexcept { return options_.dt; }
    std::uint64_t seed() const noexcept { return options_.seed; }
    std::int64_t current_step() const noexcept { return step_; }
    double time() const noexcept { return static_cast<double>(step_) * options_.dt; }

    PopulationHandle add_population(const PopulationSpec& spec) {
        if (spec.name.empty()) throw std::invalid_argument("add_population: empty name");
        if (spec.size == 0) {
            throw std::invalid_argument("add_population: population '" + spec.name +
                                        "' must have size >= 1");
        }
        if (by_name_.contains(spec.name)) {
            throw std::invalid_argument("add_population: duplicate population '" + spec.name + "'");
        }
        spec.params.validate();
        if (!(spec.noise_rate_hz >= 0.0) || !std::isfinite(spec.noise_weight_pa)) {
            throw std::invalid_argument("add_population: invalid noise for '" + spec.name + "'");
        }
        const std::size_t index = populations_.size();
        populations_.push_back(Population{spec, states_.size()});
        by_name_.emplace(spec.name, index);
        for (std::size_t i = 0; i < spec.size; ++i) {
            states_.push_back(NeuronState::at_rest(spec.params));
            owner_.push_back(static_cast<std::uint32_t>(index));
            noise_rng_.emplace_back(options_.seed, StreamPurpose::Noise, owner_.size() - 1);
        }
        dirty_ = true;
        return PopulationHandle{index};
    }

    std::size_t population_count() const noexcept { return populations_.size(); }
    std::size_t neuron_count() const noexcept { return states_.size(); }
    const PopulationSpec& population(PopulationHandle h) const { return populations_.at(h.index).spec; }
    std::size_t size(PopulationHandle h) const { return population(h).size; }

    std::optional<PopulationHandle> find(std::string_view name) const {
        const auto it = by_name_.find(std::string(name));
        if (it == by_name_.end()) return std::nullopt;
        return PopulationHandle{it->second};
    }

    PopulationHandle handle(std::string_view name) const {
        if (auto h = find(name)) return *h;
        throw std::invalid_argument("unknown population '" + std::string(name) + "'");
    }

    /// Instantiate synapses from every neuron of `source` to neurons of
    /// `target` according to `rule`. Returns the number created.
    std::size_t connect(PopulationHandle source, PopulationHandle target, ConnectionRule rule,
                        double weight, double delay_ms, Receptor receptor,
                        Modulation modulation = Modulation::None) {
        check_handle(source);
        check_handle(target);
        if (receptor == Receptor::DopamineD1 || receptor == Receptor::DopamineD2) {
            throw std::invalid_argument(
                "connect: dopamine receptors mark modulation; use add_modulatory_projection");
        }
        if (receptor == Receptor::Glutamate && !(weight > 0.0)) {
            throw std::invalid_argument("connect: GLUTAMATE synapse needs weight > 0");
        }
        if (receptor == Receptor::Gaba && !(weight < 0.0)) {
            throw std::invalid_argument("connect: GABA synapse needs weight < 0");
        }
        if (!std::isfinite(weight)) throw std::invalid_argument("connect: non-finite weight");
        const std::int64_t delay_steps = delay_to_steps(delay_ms);

        const std::size_t n_src = size(source);
        const std::size_t n_tgt = size(target);
        switch (rule.kind) {
            case ConnectionRule::Kind::AllToAll:
                break;
            case ConnectionRule::Kind::FixedOutdegree:
                if (rule.outdegree < 1 || rule.outdegree > n_tgt) {
                    throw std::invalid_argument("connect: FIXED_OUTDEGREE k must lie in [1, target size]");
                }
                break;
            case ConnectionRule::Kind::PairwiseBernoulli:
                if (!(rule.probability >= 0.0 && rule.probability <= 1.0)) {
                    throw std::invalid_argument("connect: PAIRWISE_BERNOULLI p must lie in [0, 1]");
                }
                break;
        }

        const std::size_t projection_index = projections_.size();
        Projection proj{source.index, target.index, receptor, modulation, rule,
                        weight,       delay_ms,     synapses_.size(), 0, false};
        RandomStream rng(options_.seed, StreamPurpose::Wiring, projection_index);

        auto add = [&](std::size_t i, std::size_t j) {
            synapses_.push_back(SynapseSpec{NeuronRef{source.index, i}, NeuronRef{target.index, j},
                                            weight, delay_ms, receptor, modulation,
                                            projection_index});
            delay_steps_.push_back(static_cast<std::uint32_t>(delay_steps));
        };

        std::vector<std::size_t> pool;
        for (std::size_t i = 0; i < n_src; ++i) {
            switch (rule.kind) {
                case ConnectionRule::Kind::AllToAll:
                    for (std::size_t j = 0; j < n_tgt; ++j) add(i, j);
                    break;
                case ConnectionRule::Kind::PairwiseBernoulli:
                    for (std::size_t j = 0; j < n_tgt; ++j) {
                        if (rng.uniform() < rule.probability) add(i, j);
                    }
                    break;
                case ConnectionRule::Kind::FixedOutdegree: {
                    // Partial Fisher-Yates: k distinct targets, reported in index order.
                    pool.resize(n_tgt);
                    std::iota(pool.begin(), pool.end(), std::size_t{0});
                    for (std::size_t m = 0; m < rule.outdegree; ++m) {
                        const std::size_t r = m + static_cast<std::size_t>(
                                                      rng.uniform() * static_cast<double>(n_tgt - m));
                        std::swap(pool[m], pool[std::min(r, n_tgt - 1)]);
                    }
                    std::sort(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(rule.outdegree));
                    for (std::size_t m = 0; m < rule.outdegree; ++m) add(i, pool[m]);
                    break;
                }
            }
        }
        proj.synapse_count = synapses_.size() - proj.first_synapse;
        projections_.push_back(proj);
        max_delay_steps_ = std::max(max_delay_steps_, delay_steps);
        dirty_ = true;
        return proj.synapse_count;
    }

    /// Record that `source` modulates `target` through dopamine volume
    /// transmission. Creates no synapses; the gain itself lives on the
    /// D1/D2-marked synapses.
    void add_modulatory_projection(PopulationHandle source, PopulationHandle target,
                                   Receptor receptor) {
        check_handle(source);
        check_handle(target);
        if (receptor != Receptor::DopamineD1 && receptor != Receptor::DopamineD2) {
            throw std::invalid_argument("add_modulatory_projection: receptor must be DOPAMINE_D1/D2");
        }
        const Modulation m =
            receptor == Receptor::DopamineD1 ? Modulation::D1 : Modulation::D2;
        projections_.push_back(Projection{source.index, target.index, receptor, m,
                                          ConnectionRule::all_to_all(), 0.0, 0.0,
                                          synapses_.size(), 0, true});
    }

    std::span<const SynapseSpec> synapses() const noexcept { return synapses_; }
    std::span<const Projection> projections() const noexcept { return projections_; }

    void set_dopamine(DopamineTrace trace, ReceptorGainParams gains) {
        trace.validate();
        gains.validate();
        dopamine_ = std::move(trace);
        gains_ = gains;
    }

    const DopamineTrace& dopamine() const noexcept { return dopamine_; }
    const ReceptorGainParams& gain_params() const noexcept { return gains_; }

    /// Poisson current drive on every neuron of `target` for steps starting
    /// in [t0, t1). Overlapping drives on one population are rejected.
    void add_poisson_drive(PopulationHandle target, double t0, double t1, double rate_hz,
                           double weight_pa) {
        check_handle(target);
        if (!(t0 <= t1) || !std::isfinite(t0)) {
            throw std::invalid_argument("add_poisson_drive: require finite t0 <= t1");
        }
        if (!(rate_hz >= 0.0) || !std::isfinite(rate_hz) || !std::isfinite(weight_pa)) {
            throw std::invalid_argument("add_poisson_drive: invalid rate or weight");
        }
        for (const auto& d : drives_) {
            if (d.population == target.index && t0 < d.t1 && d.t0 < t1) {
                throw std::invalid_argument("add_poisson_drive: overlapping stimulus on '" +
                                            population(target).name + "'");
            }
        }
        Drive drive{target.index, t0, t1, rate_hz, weight_pa, {}};
        const std::size_t drive_index = drives_.size();
        const std::size_t n = size(target);
        drive.rng.reserve(n);
        for (std::size_t i = 0; i < n; ++i) {
            drive.rng.emplace_back(options_.seed, StreamPurpose::Stimulus, (drive_index << 32) | i);
        }
        drives_.push_back(std::move(drive));
    }

    /// Make a neuron emit a spike stamped at `t_ms` regardless of its input.
    void force_spike(PopulationHandle pop, std::size_t neuron, double t_ms) {
        check_handle(pop);
        if (neuron >= size(pop)) throw std::invalid_argument("force_spike: neuron out of range");
        const auto step = static_cast<std::int64_t>(std::llround(t_ms / options_.dt));
        if (step <= step_) throw std::invalid_argument("force_spike: time already simulated");
        forced_.emplace(step, global_index(pop, neuron));
    }

    const NeuronState& state(PopulationHandle pop, std::size_t neuron) const {
        return states_.at(global_index(pop, neuron));
    }

    /// Keep a log of every delivery scheduled from now on.
    void enable_delivery_log(bool on = true) { log_deliveries_ = on; }
    std::span<const Delivery> delivery_log() const noexcept { return delivery_log_; }

    /// Advance by `duration_ms` and return spikes of the named populations.
    SpikeRecord simulate(double duration_ms, const std::set<std::string>& recorders) {
        if (!(duration_ms >= 0.0) || !std::isfinite(duration_ms)) {
            throw std::invalid_argument("simulate: duration must be >= 0");
        }
        const double steps_real = duration_ms / options_.dt;
        const auto n_steps = static_cast<std::int64_t>(std::llround(steps_real));
        if (std::abs(steps_real - static_cast<double>(n_steps)) > 1e-6) {
            throw std::invalid_argument("simulate: duration must be a multiple of dt");
        }
        std::vector<char> recorded(populations_.size(), 0);
        SpikeRecord record;
        record.dt = options_.dt;
        record.t_begin = time();
        for (const auto& name : recorders) {
            const auto h = handle(name);
            recorded[h.index] = 1;
        }
        for (std::uint32_t p : name_order()) {
            if (recorded[p]) {
                record.populations.push_back(
                    RecordedPopulation{p, populations_[p].spec.name, populations_[p].spec.size});
            }
        }
        prepare();

        const std::vector<std::uint32_t> rank = name_rank();
        const std::size_t n = states_.size();
        std::vector<std::uint32_t> fired;
        std::vector<double> current(n);

        for (std::int64_t s = 0; s < n_steps; ++s, ++step_) {
            const double t = time();
            const auto gains = gains_at(dopamine_, t, gains_);
            const std::size_t slot = slot_of(step_);

            for (std::size_t i = 0; i < n; ++i) {
                double input = 0.0;
                for (std::size_t c = 0; c < kModulationClasses; ++c) {
                    double& buffered = ring_[c][slot * n + i];
                    input += buffered * gains[c];
                    buffered = 0.0;
                }
                const auto& spec = populations_[owner_[i]].spec;
                if (spec.noise_rate_hz > 0.0) {
                    input += spec.noise_weight_pa *
                             poisson_generator(spec.noise_rate_hz, options_.dt, noise_rng_[i]);
                }
                current[i] = input;
            }
            for (auto& d : drives_) {
                if (t < d.t0 || t >= d.t1 || d.rate_hz == 0.0) continue;
                const std::size_t first = populations_[d.population].first;
                for (std::size_t i = 0; i < d.rng.size(); ++i) {
                    current[first + i] +=
                        d.weight_pa * poisson_generator(d.rate_hz, options_.dt, d.rng[i]);
                }
            }

            fired.clear();
            const std::int64_t spike_step = step_ + 1;
            const auto forced = forced_.equal_range(spike_step);
            for (std::size_t i = 0; i < n; ++i) {
                const auto& params = populations_[owner_[i]].spec.params;
                StepResult r = step_neuron(states_[i], params, current[i], t, options_.dt);
                states_[i] = r.state;
                if (r.spiked) fired.push_back(static_cast<std::uint32_t>(i));
            }
            for (auto it = forced.first; it != forced.second; ++it) {
                const std::size_t i = it->second;
                if (std::find(fired.begin(), fired.end(), i) != fired.end()) continue;
                const auto& params = populations_[owner_[i]].spec.params;
                const double t_spike = static_cast<double>(spike_step) * options_.dt;
                states_[i].v = params.v_reset;
                states_[i].refractory_until = t + params.t_refractory;
                states_[i].last_spike = t_spike;
                fired.push_back(static_cast<std::uint32_t>(i));
            }
            if (forced.first != forced.second) {
                std::sort(fired.begin(), fired.end());
                forced_.erase(forced.first, forced.second);
            }

            for (std::uint32_t i : fired) {
                for (std::uint32_t k = out_offset_[i]; k < out_offset_[i + 1]; ++k) {
                    const std::uint32_t syn = out_order_[k];
                    const SynapseSpec& sp = synapses_[syn];
                    const std::int64_t arrival = spike_step + delay_steps_[syn];
                    const std::size_t target =
                        populations_[sp.target.population].first + sp.target.index;
                    ring_[static_cast<std::size_t>(sp.modulation)][slot_of(arrival) * n + target] +=
                        sp.weight;
                    if (log_deliveries_) delivery_log_.push_back(Delivery{spike_step, arrival, syn});
                }
            }

            const std::size_t before = record.events.size();
            for (std::uint32_t i : fired) {
                const std::uint32_t p = owner_[i];
                if (!recorded[p]) continue;
                record.events.push_back(SpikeEvent{
                    spike_step, p, static_cast<std::uint32_t>(i - populations_[p].first)});
            }
            std::sort(record.events.begin() + static_cast<std::ptrdiff_t>(before), record.events.end(),
                      [&](const SpikeEvent& a, const SpikeEvent& b) {
                          if (rank[a.population] != rank[b.population]) {
                              return rank[a.population] < rank[b.population];
                          }
                          return a.neuron < b.neuron;
                      });
        }
        record.t_end = time();
        return record;
    }

    /// Population indices sorted by population name.
    std::vector<std::uint32_t> name_order() const {
        std::vector<std::uint32_t> order;
        order.reserve(by_name_.size());
        for (const auto& [name, index] : by_name_) order.push_back(static_cast<std::uint32_t>(index));
        return order;
    }

    std::int64_t delay_to_steps(double delay_ms) const {
        if (!std::isfinite(delay_ms)) throw std::invalid_argument("synapse delay must be finite");
        const double steps_real = delay_ms / options_.dt;
        const auto steps = static_cast<std::int64_t>(std::llround(steps_real));
        if (steps < 1 || steps_real < 1.0 - 1e-9) {
            throw std::invalid_argument("synapse delay must be >= dt");
        }
        return steps;
    }

private:
    struct Population {
        PopulationSpec spec;
        std::size_t first = 0;  // global index of neuron 0
    };

    struct Drive {
        std::size_t population = 0;
        double t0 = 0.0;
        double t1 = 0.0;
        double rate_hz = 0.0;
        double weight_pa = 0.0;
        std::vector<RandomStream> rng;
    };

    void check_handle(PopulationHandle h) const {
        if (h.index >= populations_.size()) throw std::invalid_argument("invalid population handle");
    }

    std::size_t global_index(PopulationHandle pop, std::size_t neuron) const {
        return populations_.at(pop.index).first + neuron;
    }

    std::vector<std::uint32_t> name_rank() const {
        std::vector<std::uint32_t> rank(populations_.size());
        std::uint32_t r = 0;
        for (std::uint32_t p : name_order()) rank[p] = r++;
        return rank;
    }

    std::size_t slot_of(std::int64_t step) const noexcept {
        return static_cast<std::size_t>(step % static_cast<std::int64_t>(ring_slots_));
    }

    // Builds the outgoing-synapse index (CSR by source neuron, synapse order
    // preserved) and resizes the delay ring, carrying pending deliveries over.
    void prepare() {
        if (!dirty_) return;
        const std::size_t n = states_.size();
        out_offset_.assign(n + 1, 0);
        for (const auto& s : synapses_) {
            ++out_offset_[populations_[s.source.population].first + s.source.index + 1];
        }
        std::partial_sum(out_offset_.begin(), out_offset_.end(), out_offset_.begin());
        out_order_.assign(synapses_.size(), 0);
        std::vector<std::uint32_t> fill(out_offset_.begin(), out_offset_.end() - 1);
        for (std::uint32_t k = 0; k < synapses_.size(); ++k) {
            const auto& s = synapses_[k];
            out_order_[fill[populations_[s.source.population].first + s.source.index]++] = k;
        }

        const auto slots = static_cast<std::size_t>(max_delay_steps_ + 2);
        std::array<std::vector<double>, kModulationClasses> ring;
        for (std::size_t c = 0; c < kModulationClasses; ++c) {
            ring[c].assign(slots * n, 0.0);
            if (ring_slots_ == 0) continue;
            const std::size_t old_n = ring_[c].size() / ring_slots_;
            for (std::int64_t st = step_; st < step_ + static_cast<std::int64_t>(ring_slots_); ++st) {
                const std::size_t old_slot = slot_of(st);
                const std::size_t new_slot = static_cast<std::size_t>(st % static_cast<std::int64_t>(slots));
                for (std::size_t i = 0; i < old_n; ++i) {
                    ring[c][new_slot * n + i] = ring_[c][old_slot * old_n + i];
                }
            }
        }
        ring_ = std::move(ring);
        ring_slots_ = slots;
        dirty_ = false;
    }

    NetworkOptions options_;
    std::vector<Population> populations_;
    std::map<std::string, std::size_t> by_name_;
    std::vector<NeuronState> states_;
    std::vector<std::uint32_t> owner_;
    std::vector<RandomStream> noise_rng_;

    std::vector<SynapseSpec> synapses_;
    std::vector<std::uint32_t> delay_steps_;
    std::vector<Projection> projections_;
    std::int64_t max_delay_steps_ = 1;

    std::vector<std::uint32_t> out_offset_;
    std::vector<std::uint32_t> out_order_;
    std::array<std::vector<double>, kModulationClasses> ring_;
    std::size_t ring_slots_ = 0;
    bool dirty_ = true;

    DopamineTrace dopamine_;
    ReceptorGainParams gains_;
    std::vector<Drive> drives_;
    std::multimap<std::int64_t, std::size_t> forced_;

    bool log_deliveries_ = false;
    std::vector<Delivery> delivery_log_;
    std::int64_t step_ = 0;
};

}  // namespace neucogar
