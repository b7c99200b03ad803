#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace neucogar {

inline constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Purpose tags used to derive independent sub-streams from one network seed.
enum class StreamPurpose : std::uint64_t {
    Wiring = 1,
    Noise = 2,
    Stimulus = 3,
    Test = 99,
};

/// Counter-based random stream.
///
/// Output i of a stream is a pure function of (key, i), so two streams with
/// different keys never interact and draws are reproducible on any platform.
/// Keys are derived from (seed, purpose, id) so that adding a consumer (a new
/// recorder, a new stimulus) never shifts the numbers another consumer sees.
class RandomStream {
public:
    RandomStream() = default;

    RandomStream(std::uint64_t seed, StreamPurpose purpose, std::uint64_t id = 0) noexcept
        : key_(derive_key(seed, static_cast<std::uint64_t>(purpose), id)) {}

    std::uint64_t next_u64() noexcept { return splitmix64(key_ ^ splitmix64(counter_++)); }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform() noexcept { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    std::uint64_t position() const noexcept { return counter_; }

private:
    static constexpr std::uint64_t derive_key(std::uint64_t seed, std::uint64_t purpose,
                                              std::uint64_t id) noexcept {
        std::uint64_t k = splitmix64(seed);
        k = splitmix64(k ^ (purpose * 0xd1b54a32d192ed03ULL));
        return splitmix64(k ^ (id * 0x8cb92ba72f3d8dd7ULL));
    }

    std::uint64_t key_ = 0;
    std::uint64_t counter_ = 0;
};

/// Poisson variate by Knuth's product method. Means above 30 are split into
/// chunks and summed (sum of independent Poisson variables is Poisson), which
/// keeps exp(-mean) well away from underflow.
inline std::uint32_t poisson_variate(double mean, RandomStream& rng) {
    if (!(mean >= 0.0) || !std::isfinite(mean)) {
        throw std::invalid_argument("poisson_variate: mean must be finite and >= 0");
    }
    constexpr double kChunk = 30.0;
    std::uint32_t total = 0;
    while (mean > 0.0) {
        const double m = mean < kChunk ? mean : kChunk;
        mean -= m;
        const double limit = std::exp(-m);
        double product = rng.uniform();
        while (product > limit) {
            ++total;
            product *= rng.uniform();
        }
    }
    return total;
}

/// Spike count emitted by a Poisson source of `rate_hz` within one step of
/// `dt_ms`. Mean is rate * dt / 1000.
inline std::uint32_t poisson_generator(double rate_hz, double dt_ms, RandomStream& rng) {
    if (!(rate_hz >= 0.0)) {
        throw std::invalid_argument("poisson_generator: rate must be >= 0");
    }
    if (!(dt_ms > 0.0)) {
        throw std::invalid_argument("poisson_generator: dt must be > 0");
    }
    return poisson_variate(rate_hz * dt_ms / 1000.0, rng);
}

}  // namespace neucogar
