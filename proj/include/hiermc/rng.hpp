#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace hiermc {

/// Name and version written into dataset descriptors and reports. Output of
/// this engine is fully specified, so datasets reproduce across platforms.
inline constexpr std::string_view kRngAlgorithm = "mt19937_64/splitmix64-substreams";
inline constexpr int kRngVersion = 1;

std::uint64_t splitmix64(std::uint64_t x);

/// Sub-seed for work item `index` of stream `stream` under `master`.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream, std::uint64_t index);

namespace streams {
inline constexpr std::uint64_t kSimulation = 1;
inline constexpr std::uint64_t kBootstrap = 2;
}  // namespace streams

class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Uniform integer in [0, n) by rejection; n > 0.
    std::uint64_t below(std::uint64_t n);

private:
    std::mt19937_64 engine_;
};

}  // namespace hiermc
