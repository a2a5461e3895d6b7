#pragma once

#include <cstdint>
#include <optional>

namespace fcir {

/// SplitMix64 finaliser (Steele, Lea & Flood). Bijective on 64-bit words.
std::uint64_t mix64(std::uint64_t x) noexcept;

/// Seed for stream `index` of a family rooted at `master`. Distinct indices
/// give statistically independent streams; the map is fixed across platforms.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) noexcept;

/// SplitMix64 generator with a Marsaglia polar Gaussian transform.
///
/// Everything here is integer arithmetic plus IEEE log/sqrt, so a given seed
/// yields the same normal variates on any conforming platform.
class GaussianStream {
public:
    explicit GaussianStream(std::uint64_t seed) noexcept : state_(seed) {}

    std::uint64_t next_u64() noexcept;

    /// Uniform on the open interval (0, 1) with 53 bits of resolution.
    double next_uniform() noexcept;

    /// Standard normal variate.
    double next_normal() noexcept;

private:
    std::uint64_t state_;
    std::optional<double> spare_;
};

}  // namespace fcir
