#pragma once

#include <cstdint>
#include <random>

namespace freeknot {

/// Purpose tag used when deriving independent streams from one master seed.
enum class StreamTag : std::uint32_t {
    method_paths = 0,      // Brownian paths fed to the scheme under test
    reference_paths = 1,   // independent paths for reference constants
    knot_sequences = 2,    // distributional knot sampler
    tau_samples = 3,       // raw tau(1,1) draws
    single_path = 4,       // one-off simulation
};

/// A random stream: a 64-bit Mersenne twister plus the Gaussian sampler
/// state bound to it.
///
/// Streams are derived deterministically from (master seed, tag, index) so
/// that every Monte Carlo path owns its stream and results do not depend on
/// the order in which paths are evaluated.
class RandomStream {
public:
    explicit RandomStream(std::uint64_t seed);

    static RandomStream derive(std::uint64_t master_seed, StreamTag tag, std::uint64_t index);

    /// Uniform draw on the open interval (0, 1).
    double uniform_open();

    double gaussian();

    std::uint64_t next_u64() { return engine_(); }

private:
    RandomStream(std::seed_seq& seq);

    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace freeknot
