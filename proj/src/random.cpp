#include "deepmorph/random.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "deepmorph/error.hpp"

namespace deepmorph {

double SeededRng::uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

std::int64_t SeededRng::uniform_int(std::int64_t lo, std::int64_t hi) {
    if (hi < lo) {
        throw Error(ErrorCode::InvalidArgument, "uniform_int: empty range");
    }
    const auto span = static_cast<std::uint64_t>(hi - lo) + 1u;
    if (span == 0) {
        return static_cast<std::int64_t>(engine_());
    }
    // Rejection sampling keeps the draw unbiased.
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % span;
    std::uint64_t v = engine_();
    while (v >= limit) {
        v = engine_();
    }
    return lo + static_cast<std::int64_t>(v % span);
}

double SeededRng::normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) {
        u1 = uniform();
    }
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
}

}  // namespace deepmorph
