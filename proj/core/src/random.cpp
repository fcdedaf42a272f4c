#include "freeknot/random.hpp"

namespace freeknot {

RandomStream::RandomStream(std::uint64_t seed) : engine_(seed) {}

RandomStream::RandomStream(std::seed_seq& seq) : engine_(seq) {}

RandomStream RandomStream::derive(std::uint64_t master_seed, StreamTag tag, std::uint64_t index) {
    const auto lo = [](std::uint64_t v) { return static_cast<std::uint32_t>(v & 0xffffffffu); };
    const auto hi = [](std::uint64_t v) { return static_cast<std::uint32_t>(v >> 32); };
    std::seed_seq seq{lo(master_seed), hi(master_seed), static_cast<std::uint32_t>(tag),
                      lo(index), hi(index)};
    return RandomStream(seq);
}

double RandomStream::uniform_open() {
    // 53 random mantissa bits, shifted by half an ulp so 0 is never returned.
    constexpr double scale = 1.0 / 9007199254740992.0;  // 2^-53
    return (static_cast<double>(engine_() >> 11) + 0.5) * scale;
}

double RandomStream::gaussian() { return normal_(engine_); }

}  // namespace freeknot
