#pragma once

#include "deepmorph/core.hpp"
#include "deepmorph/image.hpp"

namespace deepmorph::cli {

/// Confidence scaled to [0, 255] with rounding.
GrayImage confmap_to_gray(const ConfidenceMap& map);

/// Sets pixels along the segments to `value`; points outside the image are skipped.
void draw_polyline(GrayImage& image, const PointSet& points, bool closed, unsigned char value = 255);
void draw_circle(GrayImage& image, const Circle& circle, unsigned char value = 255);

}  // namespace deepmorph::cli
