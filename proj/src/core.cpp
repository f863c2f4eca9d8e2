#include "deepmorph/core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace deepmorph {

std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::DegenerateInput: return "DegenerateInput";
        case ErrorCode::NoRealCircle: return "NoRealCircle";
        case ErrorCode::ShapeMismatch: return "ShapeMismatch";
        case ErrorCode::DegenerateShape: return "DegenerateShape";
        case ErrorCode::CoefficientMismatch: return "CoefficientMismatch";
        case ErrorCode::RegistrationFailed: return "RegistrationFailed";
        case ErrorCode::InsufficientForeground: return "InsufficientForeground";
        case ErrorCode::OutOfRange: return "OutOfRange";
        case ErrorCode::EmptyProjection: return "EmptyProjection";
        case ErrorCode::AmplitudeMismatch: return "AmplitudeMismatch";
        case ErrorCode::EmptyFixtureSet: return "EmptyFixtureSet";
        case ErrorCode::Io: return "Io";
        case ErrorCode::Parse: return "Parse";
    }
    return "Unknown";
}

// =============================================================================
// ConfidenceMap
// =============================================================================

ConfidenceMap::ConfidenceMap(int width, int height, std::vector<float> values)
    : width_(width), height_(height), values_(std::move(values)) {
    if (width < 1 || height < 1) {
        throw Error(ErrorCode::InvalidArgument, "confidence map dimensions must be >= 1");
    }
    if (values_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
        throw Error(ErrorCode::InvalidArgument, "confidence map value count != width*height");
    }
    for (float v : values_) {
        // Also rejects NaN.
        if (!(v >= 0.0f && v <= 1.0f)) {
            throw Error(ErrorCode::OutOfRange, "confidence value outside [0,1]");
        }
    }
}

ConfidenceMap ConfidenceMap::zeros(int width, int height) {
    if (width < 1 || height < 1) {
        throw Error(ErrorCode::InvalidArgument, "confidence map dimensions must be >= 1");
    }
    return ConfidenceMap(width, height,
                         std::vector<float>(static_cast<std::size_t>(width) * height, 0.0f));
}

double ConfidenceMap::sample_bilinear(double x, double y) const noexcept {
    if (!(x >= 0.0 && y >= 0.0 && x <= width_ - 1 && y <= height_ - 1)) {
        return 0.0;
    }
    int x0 = static_cast<int>(std::floor(x));
    int y0 = static_cast<int>(std::floor(y));
    x0 = std::min(x0, std::max(width_ - 2, 0));
    y0 = std::min(y0, std::max(height_ - 2, 0));
    const double fx = x - x0;
    const double fy = y - y0;
    const int x1 = std::min(x0 + 1, width_ - 1);
    const int y1 = std::min(y0 + 1, height_ - 1);

    const double v00 = at(x0, y0);
    const double v10 = at(x1, y0);
    const double v01 = at(x0, y1);
    const double v11 = at(x1, y1);
    const double top = v00 + fx * (v10 - v00);
    const double bottom = v01 + fx * (v11 - v01);
    return top + fy * (bottom - top);
}

// =============================================================================
// Circle / Polyline
// =============================================================================

Circle::Circle(double cx, double cy, double r) : cx_(cx), cy_(cy), r_(r) {
    if (!std::isfinite(cx) || !std::isfinite(cy) || !std::isfinite(r)) {
        throw Error(ErrorCode::InvalidArgument, "circle parameters must be finite");
    }
    if (!(r > 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "circle radius must be positive");
    }
}

Polyline::Polyline(PointSet vertices, bool closed)
    : vertices_(std::move(vertices)), closed_(closed) {
    if (vertices_.size() < 2) {
        throw Error(ErrorCode::InvalidArgument, "polyline needs at least 2 vertices");
    }
    for (std::size_t i = 0; i < vertices_.size(); ++i) {
        if (!vertices_[i].allFinite()) {
            throw Error(ErrorCode::InvalidArgument, "polyline vertex is not finite");
        }
        if (i > 0 && vertices_[i] == vertices_[i - 1]) {
            throw Error(ErrorCode::InvalidArgument,
                        "consecutive polyline vertices coincide at index " + std::to_string(i));
        }
    }
}

double Polyline::distance_to(const Point2& p) const noexcept {
    double best = std::numeric_limits<double>::infinity();
    const std::size_t n = vertices_.size();
    for (std::size_t i = 0; i < segment_count(); ++i) {
        best = std::min(best, point_segment_distance(p, vertices_[i], vertices_[(i + 1) % n]));
    }
    return best;
}

double point_segment_distance(const Point2& p, const Point2& a, const Point2& b) noexcept {
    const Point2 ab = b - a;
    const double len2 = ab.squaredNorm();
    if (len2 == 0.0) {
        return (p - a).norm();
    }
    const double t = std::clamp((p - a).dot(ab) / len2, 0.0, 1.0);
    return (p - (a + t * ab)).norm();
}

// =============================================================================
// Foreground and metrics
// =============================================================================

PointSet threshold_foreground(const ConfidenceMap& map, double tau) {
    if (!(tau >= 0.0 && tau <= 1.0)) {
        throw Error(ErrorCode::InvalidArgument, "threshold must lie in [0,1]");
    }
    PointSet out;
    for (int y = 0; y < map.height(); ++y) {
        for (int x = 0; x < map.width(); ++x) {
            if (map.at(x, y) > tau) {
                out.emplace_back(x, y);
            }
        }
    }
    return out;
}

double circle_param_rmse(const Circle& estimate, const Circle& truth) noexcept {
    const Eigen::Vector3d d(estimate.cx() - truth.cx(), estimate.cy() - truth.cy(),
                            estimate.r() - truth.r());
    return d.norm();
}

double point_to_curve_rmse(const PointSet& points, const Polyline& curve) {
    if (points.empty()) {
        throw Error(ErrorCode::InvalidArgument, "point_to_curve_rmse needs at least one point");
    }
    double sum = 0.0;
    for (const auto& p : points) {
        const double d = curve.distance_to(p);
        sum += d * d;
    }
    return std::sqrt(sum / static_cast<double>(points.size()));
}

PointSet filter_inside_disk(const PointSet& points, const Point2& center, double radius) {
    PointSet out;
    const double r2 = radius * radius;
    for (const auto& p : points) {
        if ((p - center).squaredNorm() <= r2) {
            out.push_back(p);
        }
    }
    return out;
}

}  // namespace deepmorph
