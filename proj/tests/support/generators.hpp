#pragma once
// Hand-rolled property-test generators on top of the seeded library RNG.

#include <cmath>
#include <functional>
#include <numbers>
#include <string>

#include <gtest/gtest.h>

#include "deepmorph/core.hpp"
#include "deepmorph/random.hpp"

namespace gen {

using deepmorph::Point2;
using deepmorph::PointSet;
using deepmorph::SeededRng;

inline double uniform(SeededRng& rng, double lo, double hi) { return lo + (hi - lo) * rng.uniform(); }

inline Point2 point(SeededRng& rng, double lo, double hi) {
    return {uniform(rng, lo, hi), uniform(rng, lo, hi)};
}

inline PointSet cloud(SeededRng& rng, int n, double lo, double hi) {
    PointSet pts;
    for (int i = 0; i < n; ++i) pts.push_back(point(rng, lo, hi));
    return pts;
}

inline PointSet on_circle(SeededRng& rng, const Point2& c, double r, int n, double noise = 0.0,
                          double start = 0.0, double span = 2.0 * std::numbers::pi) {
    PointSet pts;
    for (int i = 0; i < n; ++i) {
        const double t = start + span * rng.uniform();
        pts.emplace_back(c.x() + r * std::cos(t) + noise * rng.normal(),
                         c.y() + r * std::sin(t) + noise * rng.normal());
    }
    return pts;
}

/// Runs `body` for `cases` seeds; failures report the seed that produced them.
inline void for_all(std::uint64_t seed, int cases, const std::function<void(SeededRng&)>& body) {
    for (int c = 0; c < cases; ++c) {
        SeededRng rng(seed * 1000003ULL + static_cast<std::uint64_t>(c));
        SCOPED_TRACE("property case " + std::to_string(c) + " (seed " + std::to_string(seed) + ")");
        body(rng);
        if (::testing::Test::HasFatalFailure()) return;
    }
}

}  // namespace gen
