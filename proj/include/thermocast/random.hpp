#pragma once

#include <cstdint>
#include <random>

namespace thermocast {

/// Seeded generator for initialization and shuffling. The engine's output
/// sequence is fixed by the standard; the draws below avoid the
/// implementation-defined std distributions.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}
    /// Uniform in [0, 1) with 53 random bits.
    double uniform();
    /// Uniform integer in [0, bound), rejection sampled.
    std::uint64_t below(std::uint64_t bound);
    /// Standard normal (Box-Muller).
    double normal();

private:
    std::mt19937_64 engine_;
};

}  // namespace thermocast
