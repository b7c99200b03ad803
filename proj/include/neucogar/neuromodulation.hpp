#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace neucogar {

struct DopamineBurst {
    double t_start = 400.0;   // ms
    double amplitude = 0.6;   // level units
    double tau_decay = 50.0;  // ms

    bool operator==(const DopamineBurst&) const = default;
};

/// Global dopamine level: a baseline plus exponentially decaying bursts
/// (volume transmission, one scalar for the whole network).
struct DopamineTrace {
    double baseline = 0.2;
    std::vector<DopamineBurst> bursts;

    void validate() const {
        if (!(baseline >= 0.0 && baseline <= 1.0)) {
            throw std::invalid_argument("DopamineTrace: baseline must lie in [0, 1]");
        }
        for (const auto& b : bursts) {
            if (!(b.amplitude >= 0.0) || !std::isfinite(b.amplitude)) {
                throw std::invalid_argument("DopamineTrace: burst amplitude must be >= 0");
            }
            if (!(b.tau_decay > 0.0) || !std::isfinite(b.tau_decay)) {
                throw std::invalid_argument("DopamineTrace: burst tau_decay must be > 0");
            }
            if (!std::isfinite(b.t_start)) {
                throw std::invalid_argument("DopamineTrace: burst start must be finite");
            }
        }
    }

    /// Sum of baseline and active burst contributions, before clamping.
    double raw_level(double t) const noexcept {
        double level = baseline;
        for (const auto& b : bursts) {
            if (t >= b.t_start) {
                level += b.amplitude * std::exp(-(t - b.t_start) / b.tau_decay);
            }
        }
        return level;
    }

    bool operator==(const DopamineTrace&) const = default;
};

inline double dopamine_level(const DopamineTrace& trace, double t) noexcept {
    return std::clamp(trace.raw_level(t), 0.0, 1.0);
}

/// Which dopamine receptor class, if any, modulates a synapse.
enum class Modulation { None = 0, D1 = 1, D2 = 2 };

inline constexpr std::size_t kModulationClasses = 3;

struct ReceptorGainParams {
    double alpha_d1 = 1.0;
    double beta_d2 = 0.8;

    void validate() const {
        if (!(alpha_d1 >= 0.0) || !std::isfinite(alpha_d1)) {
            throw std::invalid_argument("ReceptorGainParams: alpha_d1 must be >= 0");
        }
        if (!(beta_d2 >= 0.0 && beta_d2 <= 1.0)) {
            throw std::invalid_argument("ReceptorGainParams: beta_d2 must lie in [0, 1]");
        }
    }

    bool operator==(const ReceptorGainParams&) const = default;
};

/// Multiplicative weight gain for a synapse of the given modulation class.
/// D1 scales up and D2 scales down as dopamine rises above `baseline`.
inline double receptor_gain(Modulation modulation, double level, double baseline,
                            const ReceptorGainParams& params) noexcept {
    const double delta = level - baseline;
    switch (modulation) {
        case Modulation::D1:
            return std::max(0.0, 1.0 + params.alpha_d1 * delta);
        case Modulation::D2:
            return std::max(0.0, 1.0 - params.beta_d2 * delta);
        case Modulation::None:
            break;
    }
    return 1.0;
}

/// Gains for every modulation class at one instant, indexed by Modulation.
inline std::array<double, kModulationClasses> gains_at(const DopamineTrace& trace, double t,
                                                       const ReceptorGainParams& params) noexcept {
    const double level = dopamine_level(trace, t);
    return {receptor_gain(Modulation::None, level, trace.baseline, params),
            receptor_gain(Modulation::D1, level, trace.baseline, params),
            receptor_gain(Modulation::D2, level, trace.baseline, params)};
}

}  // namespace neucogar
