#pragma once

#include <cstdint>
#include <random>

namespace deepmorph {

/// Seeded generator whose outputs are identical on every platform.
///
/// The engine (mt19937_64) is fully specified by the standard; the standard
/// distributions are not, so uniform and Gaussian variates are derived here
/// from raw engine output.
class SeededRng {
public:
    explicit SeededRng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform in [0, 1) with 53 bits of resolution.
    double uniform();

    /// Uniform integer in [lo, hi] (inclusive).
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);

    /// Standard normal variate (Box-Muller, both halves used).
    double normal();

private:
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace deepmorph
