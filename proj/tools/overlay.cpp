#include "overlay.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace deepmorph::cli {

namespace {

void plot(GrayImage& image, const Point2& p, unsigned char value) {
    if (!std::isfinite(p.x()) || !std::isfinite(p.y())) {
        return;
    }
    const double x = std::round(p.x());
    const double y = std::round(p.y());
    if (x >= 0.0 && y >= 0.0 && x < image.width() && y < image.height()) {
        image.at(static_cast<int>(x), static_cast<int>(y)) = value;
    }
}

}  // namespace

GrayImage confmap_to_gray(const ConfidenceMap& map) {
    GrayImage out(map.width(), map.height(), 0);
    for (int y = 0; y < map.height(); ++y) {
        for (int x = 0; x < map.width(); ++x) {
            out.at(x, y) = static_cast<unsigned char>(std::lround(255.0 * map.at(x, y)));
        }
    }
    return out;
}

void draw_polyline(GrayImage& image, const PointSet& points, bool closed, unsigned char value) {
    const std::size_t n = points.size();
    if (n == 0) {
        return;
    }
    const std::size_t segments = closed ? n : n - 1;
    for (std::size_t i = 0; i < segments; ++i) {
        const Point2& a = points[i];
        const Point2& b = points[(i + 1) % n];
        const int steps = std::max(1, static_cast<int>(std::ceil(4.0 * (b - a).norm())));
        for (int s = 0; s <= steps; ++s) {
            plot(image, a + (b - a) * (static_cast<double>(s) / steps), value);
        }
    }
    if (n == 1) {
        plot(image, points[0], value);
    }
}

void draw_circle(GrayImage& image, const Circle& circle, unsigned char value) {
    const int steps = std::max(16, static_cast<int>(std::ceil(8.0 * std::numbers::pi * circle.r())));
    for (int s = 0; s < steps; ++s) {
        const double t = 2.0 * std::numbers::pi * s / steps;
        plot(image, circle.center() + circle.r() * Point2(std::cos(t), std::sin(t)), value);
    }
}

}  // namespace deepmorph::cli
