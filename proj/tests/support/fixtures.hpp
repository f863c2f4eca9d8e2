#pragma once
// Construction-truth fixtures shared by the unit, property and acceptance tests.

#include <cmath>
#include <numbers>
#include <vector>

#include "deepmorph/drr.hpp"
#include "deepmorph/pdm.hpp"
#include "deepmorph/random.hpp"
#include "deepmorph/synth.hpp"
#include "deepmorph/transform.hpp"

namespace fixtures {

using namespace deepmorph;

inline std::vector<float> values_of(const ConfidenceMap& map) {
    return {map.values().begin(), map.values().end()};
}

inline std::vector<double> family_amplitudes(int k) {
    const std::vector<double> all{8.0, 5.0, 3.0, 2.0};
    return {all.begin(), all.begin() + k};
}

/// k-mode training family around an asymmetric outline of radius 100.
inline std::vector<pdm::ShapeVector> shape_family(int k, int n_shapes = 200, int n_points = 48,
                                                  std::uint64_t seed = 11) {
    const auto base = synth::asymmetric_outline(n_points, Point2(0.0, 0.0), 100.0);
    return synth::generate_shape_family(base, n_shapes, k, family_amplitudes(k), seed);
}

inline pdm::PointDistributionModel shape_model(int k = 3, double variance = 0.99) {
    return pdm::build_pdm(pdm::align_training_shapes(shape_family(k)).aligned, variance);
}

/// Anisotropic Gaussian blob with a skewed tail, so no rotation or mirror maps it onto itself.
inline PointSet asymmetric_cloud(SeededRng& rng, int n) {
    PointSet pts;
    for (int i = 0; i < n; ++i) {
        const double u = rng.normal();
        const double v = rng.normal();
        pts.emplace_back(30.0 * u + 8.0 * u * u, 12.0 * v + 3.0 * u);
    }
    return pts;
}

struct InSpanCase {
    pdm::ShapeCoefficients coefficients;
    SimilarityTransform2D pose;
    PointSet points;
    Polyline outline{{Point2(0, 0), Point2(1, 0)}, false};
};

/// Model instance with |b_i| <= 2 sqrt(lambda_i), random rotation, RMS radius in
/// [70, 100] px and a centre near the middle of a size x size image.
inline InSpanCase in_span_case(const pdm::PointDistributionModel& model, SeededRng& rng,
                               int size = 448) {
    InSpanCase c;
    c.coefficients.resize(model.mode_count());
    for (Eigen::Index i = 0; i < model.mode_count(); ++i) {
        c.coefficients(i) = (2.0 * rng.uniform() - 1.0) * 2.0 * std::sqrt(model.eigenvalues()(i));
    }
    const auto local = pdm::reconstruct(model, c.coefficients);
    const double rms_radius = 70.0 + 30.0 * rng.uniform();
    c.pose.rotation = wrap_angle(2.0 * std::numbers::pi * rng.uniform());
    c.pose.scale = rms_radius * std::sqrt(static_cast<double>(model.point_count()));
    c.pose.translation = Point2(size / 2.0 + 20.0 * (rng.uniform() - 0.5),
                                size / 2.0 + 20.0 * (rng.uniform() - 0.5));
    for (const auto& p : local.to_points()) {
        c.points.push_back(c.pose.apply(p));
    }
    c.outline = Polyline(c.points, true);
    return c;
}

inline drr::TriangleMesh uv_sphere(const drr::Vec3& center, double radius, int n_lon, int n_lat) {
    drr::TriangleMesh mesh;
    mesh.vertices.push_back(center + drr::Vec3(0, 0, radius));
    for (int i = 1; i < n_lat; ++i) {
        const double theta = std::numbers::pi * i / n_lat;
        for (int j = 0; j < n_lon; ++j) {
            const double phi = 2.0 * std::numbers::pi * j / n_lon;
            mesh.vertices.push_back(center + radius * drr::Vec3(std::sin(theta) * std::cos(phi),
                                                                std::sin(theta) * std::sin(phi),
                                                                std::cos(theta)));
        }
    }
    mesh.vertices.push_back(center - drr::Vec3(0, 0, radius));
    const int south = static_cast<int>(mesh.vertices.size()) - 1;
    auto ring = [&](int i, int j) { return 1 + (i - 1) * n_lon + (j % n_lon); };
    for (int j = 0; j < n_lon; ++j) {
        mesh.faces.push_back({0, ring(1, j), ring(1, j + 1)});
        mesh.faces.push_back({south, ring(n_lat - 1, j + 1), ring(n_lat - 1, j)});
    }
    for (int i = 1; i < n_lat - 1; ++i) {
        for (int j = 0; j < n_lon; ++j) {
            mesh.faces.push_back({ring(i, j), ring(i + 1, j), ring(i + 1, j + 1)});
            mesh.faces.push_back({ring(i, j), ring(i + 1, j + 1), ring(i, j + 1)});
        }
    }
    return mesh;
}

/// Surface-sampled cube: every face carries an n x n vertex grid.
inline drr::TriangleMesh cube_mesh(const drr::Vec3& center, double half, int n = 24) {
    drr::TriangleMesh mesh;
    for (int axis = 0; axis < 3; ++axis) {
        for (const double side : {-1.0, 1.0}) {
            const int base = static_cast<int>(mesh.vertices.size());
            for (int a = 0; a < n; ++a) {
                for (int b = 0; b < n; ++b) {
                    drr::Vec3 p;
                    p(axis) = side * half;
                    p((axis + 1) % 3) = -half + 2.0 * half * a / (n - 1);
                    p((axis + 2) % 3) = -half + 2.0 * half * b / (n - 1);
                    mesh.vertices.push_back(center + p);
                }
            }
            for (int a = 0; a + 1 < n; ++a) {
                for (int b = 0; b + 1 < n; ++b) {
                    const int v = base + a * n + b;
                    mesh.faces.push_back({v, v + n, v + n + 1});
                    mesh.faces.push_back({v, v + n + 1, v + 1});
                }
            }
        }
    }
    return mesh;
}

/// n^3 volume of water (0 HU) centred on the origin with the given spacing.
inline drr::CtVolume water_cube(int n, double spacing) {
    const double half = 0.5 * (n - 1) * spacing;
    return drr::CtVolume::filled({n, n, n}, drr::Vec3::Constant(spacing), drr::Vec3::Constant(-half),
                                 0.0f);
}

}  // namespace fixtures
