#pragma once

#include <cmath>
#include <cstdint>

namespace qplab {

// Counter-based stream: the k-th draw of stream s under seed depends on
// (seed, s, k) only, so trajectories reproduce under any schedule.
class CounterRng {
public:
    CounterRng(std::uint64_t seed, std::uint64_t stream) noexcept
        : key_(mix(seed ^ mix(stream + 0x632be59bd9b4e019ULL))) {}

    static constexpr std::uint64_t mix(std::uint64_t z) noexcept {
        z += 0x9e3779b97f4a7c15ULL;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    std::uint64_t bits(std::uint64_t counter) const noexcept { return mix(key_ ^ mix(counter)); }

    // uniform on (0, 1), never 0
    double uniform(std::uint64_t counter) const noexcept {
        return (static_cast<double>(bits(counter) >> 11) + 0.5) * 0x1.0p-53;
    }

    // standard normal from counters 2k, 2k+1 (Box-Muller, cosine branch)
    double normal(std::uint64_t k) const noexcept {
        const double r = std::sqrt(-2.0 * std::log(uniform(2 * k)));
        return r * std::cos(2.0 * M_PI * uniform(2 * k + 1));
    }

private:
    std::uint64_t key_;
};

}  // namespace qplab
