#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>

namespace neucogar {

/// Leaky integrate-and-fire parameters.
///
/// Currents are in pA and `r_m` is in GOhm so that r_m * I is in mV.
struct NeuronParams {
    double v_rest = -70.0;       // mV
    double v_threshold = -55.0;  // mV
    double v_reset = -70.0;      // mV
    double tau_m = 10.0;         // ms
    double r_m = 1.0;            // GOhm (mV per pA)
    double t_refractory = 2.0;   // ms

    void validate() const {
        auto finite = [](double x) { return std::isfinite(x); };
        if (!finite(v_rest) || !finite(v_threshold) || !finite(v_reset) || !finite(tau_m) ||
            !finite(r_m) || !finite(t_refractory)) {
            throw std::invalid_argument("NeuronParams: non-finite parameter");
        }
        if (!(v_reset <= v_rest && v_rest < v_threshold)) {
            throw std::invalid_argument("NeuronParams: require v_reset <= v_rest < v_threshold");
        }
        if (!(tau_m > 0.0)) {
            throw std::invalid_argument("NeuronParams: tau_m must be > 0");
        }
        if (!(t_refractory >= 0.0)) {
            throw std::invalid_argument("NeuronParams: t_refractory must be >= 0");
        }
    }

    bool operator==(const NeuronParams&) const = default;
};

struct NeuronState {
    double v = -70.0;                  // mV
    double refractory_until = -1e300;  // ms
    std::optional<double> last_spike;  // ms

    static NeuronState at_rest(const NeuronParams& params) { return NeuronState{params.v_rest, -1e300, std::nullopt}; }

    bool operator==(const NeuronState&) const = default;
};

struct StepResult {
    NeuronState state;
    bool spiked = false;
};

/// True when a step starting at `t` lies inside the refractory period.
/// Half a step of slack absorbs accumulated rounding in t = k * dt.
inline bool is_refractory(const NeuronState& state, double t, double dt) noexcept {
    return t < state.refractory_until - 0.5 * dt;
}

/// Advance one neuron over [t, t + dt] with constant input current.
///
/// Uses the exact solution of tau_m dV/dt = -(V - v_rest) + r_m I, so the
/// update is unconditionally stable. A spike is stamped at the end of the
/// step (t + dt); refractoriness runs to t + t_refractory, so successive spike
/// stamps are at least t_refractory apart. Outside the refractory period the
/// potential never falls below v_reset.
inline StepResult step_neuron(const NeuronState& state, const NeuronParams& params,
                              double input_current, double t, double dt) {
    if (!(dt > 0.0) || !std::isfinite(dt)) {
        throw std::invalid_argument("step_neuron: dt must be finite and > 0");
    }
    if (!std::isfinite(input_current)) {
        throw std::invalid_argument("step_neuron: non-finite input current at t=" +
                                    std::to_string(t) + " ms");
    }
    if (!std::isfinite(state.v) || std::isnan(state.refractory_until) || !std::isfinite(t)) {
        throw std::invalid_argument("step_neuron: non-finite neuron state at t=" +
                                    std::to_string(t) + " ms");
    }

    StepResult out{state, false};
    if (is_refractory(state, t, dt)) {
        out.state.v = params.v_reset;
        return out;
    }

    const double v_inf = params.v_rest + params.r_m * input_current;
    const double v_new = v_inf + (state.v - v_inf) * std::exp(-dt / params.tau_m);

    if (state.v >= params.v_threshold || v_new >= params.v_threshold) {
        out.spiked = true;
        out.state.v = params.v_reset;
        out.state.refractory_until = t + params.t_refractory;
        out.state.last_spike = t + dt;
        return out;
    }
    out.state.v = v_new < params.v_reset ? params.v_reset : v_new;
    return out;
}

}  // namespace neucogar
