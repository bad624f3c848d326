#pragma once

#include <cstdint>
#include <random>

namespace magniglyph {

/// Seeded generator with platform-independent range mapping. The raw
/// mt19937_64 sequence is fixed by the standard; <random> distributions are not.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform on [lo, hi].
    int uniform_int(int lo, int hi) {
        const auto span = static_cast<std::uint64_t>(static_cast<std::int64_t>(hi) - lo) + 1;
        return lo + static_cast<int>(engine_() % span);
    }
    /// Uniform on [0, 1).
    double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

private:
    std::mt19937_64 engine_;
};

} // namespace magniglyph
