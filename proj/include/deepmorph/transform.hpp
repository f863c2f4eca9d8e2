#pragma once

#include <string>

#include <Eigen/Core>

#include "deepmorph/core.hpp"

namespace deepmorph {

/// p -> scale * R(rotation) * F * p + translation, where F = diag(1,-1) when
/// reflected (reflection about the x-axis, applied first).
struct SimilarityTransform2D {
    double rotation = 0.0;
    double scale = 1.0;
    Point2 translation = Point2::Zero();
    bool reflected = false;

    static SimilarityTransform2D identity() { return {}; }

    /// Throws InvalidArgument unless scale > 0 and all fields are finite.
    void validate() const;

    Eigen::Matrix2d linear() const;
    Point2 apply(const Point2& p) const { return linear() * p + translation; }
    Point2 apply_inverse(const Point2& q) const;
    SimilarityTransform2D inverse() const;
};

/// (a o b)(p) = a(b(p)).
SimilarityTransform2D compose(const SimilarityTransform2D& a, const SimilarityTransform2D& b);

PointSet apply_transform(const SimilarityTransform2D& t, const PointSet& points);

/// Wraps to (-pi, pi].
double wrap_angle(double radians) noexcept;

/// Least-squares similarity T minimizing sum ||T(from_i) - to_i||^2 with a fixed
/// handedness. Throws DegenerateShape if `from` has no spatial extent.
SimilarityTransform2D procrustes_similarity(const PointSet& from, const PointSet& to,
                                            bool reflected = false);

/// Record `rotation scale tx ty reflected`.
std::string format_transform(const SimilarityTransform2D& t);
SimilarityTransform2D parse_transform(const std::string& record);

}  // namespace deepmorph
