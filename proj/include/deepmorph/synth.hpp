#pragma once

#include <cstdint>
#include <vector>

#include "deepmorph/core.hpp"
#include "deepmorph/pdm.hpp"

namespace deepmorph::synth {

struct SynthConfig {
    double ridge_sigma = 2.0;
    double peak_value = 1.0;
    double background_noise_sigma = 0.0;
    std::uint64_t seed = 0;

    void validate() const;
};

/// Axis-aligned occluder covering [x, x+side) x [y, y+side).
struct Square {
    int x = 0;
    int y = 0;
    int side = 0;

    friend bool operator==(const Square&, const Square&) = default;
};

/// clamp(peak * exp(-d^2 / (2 sigma^2)) + noise, 0, 1) with d the exact distance to the outline.
ConfidenceMap confmap_from_outline(const Polyline& outline, int width, int height,
                                   const SynthConfig& config);

/// Same ridge law with d = | ||p - c|| - r |.
ConfidenceMap confmap_from_circle(const Circle& circle, int width, int height,
                                  const SynthConfig& config);

struct OcclusionResult {
    ConfidenceMap map;
    std::vector<Square> squares;
};

/// Zeroes n_squares seeded squares with sides uniform in [side_min, side_max].
OcclusionResult occlude_squares(const ConfidenceMap& map, int n_squares, int side_min,
                                int side_max, std::uint64_t seed);

/// Zeroes the given squares (clipped to the image).
ConfidenceMap apply_squares(const ConfidenceMap& map, const std::vector<Square>& squares);

/// Orthonormal smooth deformation fields over `base`: sinusoidal displacements along the
/// base normals, then along the tangents, by increasing harmonic, with the similarity
/// directions (translation, scale, rotation) projected out. Columns are the fields.
Eigen::MatrixXd deformation_fields(const pdm::ShapeVector& base, int n_modes);

/// base + sum_j c_j field_j with c_j ~ N(0, amplitude_j^2), seeded.
std::vector<pdm::ShapeVector> generate_shape_family(const pdm::ShapeVector& base, int n_shapes,
                                                    int n_modes,
                                                    const std::vector<double>& mode_amplitudes,
                                                    std::uint64_t seed);

/// Closed, asymmetric, femur-head-like test outline of n points (no rotational or mirror symmetry).
pdm::ShapeVector asymmetric_outline(int n_points, const Point2& center, double radius);

}  // namespace deepmorph::synth
