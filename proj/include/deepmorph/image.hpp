#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "deepmorph/error.hpp"

namespace deepmorph {

/// 8-bit grayscale raster, row-major.
class GrayImage {
public:
    GrayImage() = default;
    GrayImage(int width, int height, std::uint8_t fill = 0)
        : width_(width), height_(height),
          pixels_(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill) {
        if (width < 1 || height < 1) {
            throw Error(ErrorCode::InvalidArgument, "image dimensions must be >= 1");
        }
    }

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }

    std::uint8_t& at(int x, int y) { return pixels_[index(x, y)]; }
    std::uint8_t at(int x, int y) const { return pixels_[index(x, y)]; }
    bool contains(int x, int y) const noexcept {
        return x >= 0 && y >= 0 && x < width_ && y < height_;
    }

    const std::vector<std::uint8_t>& pixels() const noexcept { return pixels_; }
    std::vector<std::uint8_t>& pixels() noexcept { return pixels_; }

    friend bool operator==(const GrayImage&, const GrayImage&) = default;

private:
    std::size_t index(int x, int y) const noexcept {
        return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
               static_cast<std::size_t>(x);
    }

    int width_ = 0;
    int height_ = 0;
    std::vector<std::uint8_t> pixels_;
};

}  // namespace deepmorph
