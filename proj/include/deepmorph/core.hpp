#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "deepmorph/error.hpp"

namespace deepmorph {

/// Image-plane point: x = column, y = row, origin top-left, pixel centers on integers.
using Point2 = Eigen::Vector2d;
using PointSet = std::vector<Point2>;

/// Per-pixel confidence in [0,1], stored row-major.
class ConfidenceMap {
public:
    ConfidenceMap(int width, int height, std::vector<float> values);

    static ConfidenceMap zeros(int width, int height);

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    std::size_t size() const noexcept { return values_.size(); }

    float at(int x, int y) const { return values_[index(x, y)]; }
    std::span<const float> values() const noexcept { return values_; }

    bool contains(int x, int y) const noexcept {
        return x >= 0 && y >= 0 && x < width_ && y < height_;
    }

    /// Bilinear interpolation; positions outside [0,W-1]x[0,H-1] read as 0.
    double sample_bilinear(double x, double y) const noexcept;

private:
    std::size_t index(int x, int y) const noexcept {
        return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
               static_cast<std::size_t>(x);
    }

    int width_;
    int height_;
    std::vector<float> values_;
};

class Circle {
public:
    Circle(double cx, double cy, double r);

    double cx() const noexcept { return cx_; }
    double cy() const noexcept { return cy_; }
    double r() const noexcept { return r_; }
    Point2 center() const { return {cx_, cy_}; }

    friend bool operator==(const Circle&, const Circle&) = default;

private:
    double cx_;
    double cy_;
    double r_;
};

/// Ordered vertex chain; closed polylines include the last-to-first segment.
class Polyline {
public:
    Polyline(PointSet vertices, bool closed);

    const PointSet& vertices() const noexcept { return vertices_; }
    bool closed() const noexcept { return closed_; }
    std::size_t segment_count() const noexcept {
        return closed_ ? vertices_.size() : vertices_.size() - 1;
    }

    /// Exact Euclidean distance from p to the nearest segment.
    double distance_to(const Point2& p) const noexcept;

private:
    PointSet vertices_;
    bool closed_;
};

double point_segment_distance(const Point2& p, const Point2& a, const Point2& b) noexcept;

/// Pixels with map(x,y) > tau, in row-major scan order.
PointSet threshold_foreground(const ConfidenceMap& map, double tau = 0.5);

/// Euclidean norm of (dcx, dcy, dr).
double circle_param_rmse(const Circle& estimate, const Circle& truth) noexcept;

/// Root mean square of per-point distances to the curve. Throws InvalidArgument on empty input.
double point_to_curve_rmse(const PointSet& points, const Polyline& curve);

/// Keeps points with ||p - center|| <= radius (beam-cone restriction before scoring).
PointSet filter_inside_disk(const PointSet& points, const Point2& center, double radius);

}  // namespace deepmorph
