#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "neucogar/cube.hpp"
#include "neucogar/network.hpp"
#include "neucogar/neuromodulation.hpp"

namespace neucogar {

struct TimeWindow {
    double t0 = 0.0;  // ms, inclusive
    double t1 = 0.0;  // ms, exclusive

    double length() const noexcept { return t1 - t0; }
    bool contains(double t) const noexcept { return t >= t0 && t < t1; }

    bool operator==(const TimeWindow&) const = default;
};

struct MetricsParams {
    double rate_ceiling_hz = 100.0;
    /// Mean delivered current (pA, absolute) above which a synapse counts as
    /// holding a persistent trace within one persistence interval.
    double persistence_threshold_pa = 0.1;
    /// Length of the intervals the persistence test is evaluated over; the
    /// storage volume is the mean count across the intervals in a window, so
    /// windows of different length are comparable.
    double persistence_interval_ms = 50.0;

    bool operator==(const MetricsParams&) const = default;
};

namespace detail {
inline double population_variance(const std::vector<double>& xs) {
    if (xs.empty()) return 0.0;
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= static_cast<double>(xs.size());
    double var = 0.0;
    for (double x : xs) var += (x - mean) * (x - mean);
    return var / static_cast<double>(xs.size());
}
}  // namespace detail

/// Computing-system parameters of a simulated window.
///
/// Only recorded populations are observed: rates and buffer occupancy are
/// computed over them, and synapse activity is reconstructed from the
/// recorded spikes (each spike of a recorded neuron is delivered on every
/// outgoing synapse after its delay, scaled by the receptor gain at arrival).
///
///   computing_utilization  mean per-neuron rate / ceiling, clamped to [0, 1]
///   computing_distribution variance of per-population normalized rates
///   memory_distribution    variance of per-population delivery occupancy
///                          (deliveries per neuron per ms)
///   storage_volume         synapses whose mean delivered current over a
///                          persistence interval exceeds the threshold,
///                          averaged over the intervals tiling the window
///   storage_bandwidth      synapses with at least one delivery
inline MetricsVector compute_metrics(const SpikeRecord& record, const Network& net,
                                     TimeWindow window, const MetricsParams& params = {}) {
    if (!(window.t1 > window.t0)) throw std::invalid_argument("compute_metrics: empty window");
    if (!(params.rate_ceiling_hz > 0.0)) {
        throw std::invalid_argument("compute_metrics: rate ceiling must be > 0");
    }
    if (!(params.persistence_interval_ms > 0.0)) {
        throw std::invalid_argument("compute_metrics: persistence interval must be > 0");
    }
    MetricsVector out;
    if (record.populations.empty()) return out;

    const double window_s = window.length() / 1000.0;
    std::vector<std::size_t> spikes(net.population_count(), 0);
    for (const auto& e : record.events) {
        if (window.contains(record.time_of(e))) ++spikes.at(e.population);
    }

    double total_spikes = 0.0;
    double total_neurons = 0.0;
    std::vector<double> normalized;
    for (const auto& p : record.populations) {
        const double n = static_cast<double>(p.size);
        total_spikes += static_cast<double>(spikes[p.index]);
        total_neurons += n;
        const double rate = static_cast<double>(spikes[p.index]) / (n * window_s);
        normalized.push_back(std::min(1.0, rate / params.rate_ceiling_hz));
    }
    const double mean_rate = total_spikes / (total_neurons * window_s);
    out.computing_utilization = std::clamp(mean_rate / params.rate_ceiling_hz, 0.0, 1.0);
    out.computing_distribution = detail::population_variance(normalized);

    // Outgoing synapses of each recorded neuron, keyed by (population, neuron).
    std::vector<std::size_t> first(net.population_count() + 1, 0);
    for (std::size_t p = 0; p < net.population_count(); ++p) {
        first[p + 1] = first[p] + net.size(PopulationHandle{p});
    }
    const auto synapses = net.synapses();
    std::vector<std::vector<std::uint32_t>> outgoing(first.back());
    std::vector<char> observed(net.population_count(), 0);
    for (const auto& p : record.populations) observed[p.index] = 1;
    for (std::uint32_t k = 0; k < synapses.size(); ++k) {
        const auto& s = synapses[k];
        if (observed[s.source.population]) {
            outgoing[first[s.source.population] + s.source.index].push_back(k);
        }
    }

    // Whole intervals tiling the window; a window shorter than one interval
    // is a single interval.
    const auto intervals = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::floor(window.length() / params.persistence_interval_ms + 1e-9)));
    const double interval_ms = window.length() / static_cast<double>(intervals);

    std::vector<double> charge(synapses.size() * intervals, 0.0);
    std::vector<std::uint32_t> deliveries(synapses.size(), 0);
    std::vector<double> arrivals(net.population_count(), 0.0);
    const auto& trace = net.dopamine();
    for (const auto& e : record.events) {
        for (std::uint32_t k : outgoing[first[e.population] + e.neuron]) {
            const auto& s = synapses[k];
            const std::int64_t arrival_step = e.step + net.delay_to_steps(s.delay);
            const double t_arrival = static_cast<double>(arrival_step) * record.dt;
            if (!window.contains(t_arrival)) continue;
            const double gain = receptor_gain(s.modulation, dopamine_level(trace, t_arrival),
                                              trace.baseline, net.gain_params());
            const auto slot = std::min(
                intervals - 1,
                static_cast<std::size_t>(std::floor((t_arrival - window.t0) / interval_ms + 1e-9)));
            charge[k * intervals + slot] += std::abs(s.weight * gain) * record.dt;
            ++deliveries[k];
            arrivals[s.target.population] += 1.0;
        }
    }

    std::vector<double> occupancy;
    for (const auto& p : record.populations) {
        occupancy.push_back(arrivals[p.index] / (static_cast<double>(p.size) * window.length()));
    }
    out.memory_distribution = detail::population_variance(occupancy);

    std::size_t persistent = 0;
    for (std::size_t k = 0; k < synapses.size(); ++k) {
        if (deliveries[k] > 0) out.storage_bandwidth += 1.0;
        for (std::size_t m = 0; m < intervals; ++m) {
            if (charge[k * intervals + m] / interval_ms > params.persistence_threshold_pa) ++persistent;
        }
    }
    out.storage_volume = static_cast<double>(persistent) / static_cast<double>(intervals);
    return out;
}

}  // namespace neucogar
