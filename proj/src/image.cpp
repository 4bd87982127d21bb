#include "speckle/image.hpp"

#include <cmath>
#include <string>

#include "speckle/errors.hpp"

namespace speckle {

Image::Image(std::size_t width, std::size_t height, double fill)
    : Image(width, height, std::vector<double>(width * height, fill)) {}

Image::Image(std::size_t width, std::size_t height, std::vector<double> pixels)
    : width_(width), height_(height), pixels_(std::move(pixels)) {
    if (width_ < 1 || height_ < 1) throw ValidationError("image dimensions must be at least 1x1");
    if (pixels_.size() != width_ * height_) {
        throw ValidationError("pixel count " + std::to_string(pixels_.size()) +
                              " does not match " + std::to_string(width_) + "x" +
                              std::to_string(height_));
    }
    validate();
}

void Image::validate() const {
    for (std::size_t i = 0; i < pixels_.size(); ++i) {
        const double v = pixels_[i];
        if (!std::isfinite(v) || v < 0.0) {
            throw ValidationError("pixel (" + std::to_string(i % width_) + ", " +
                                  std::to_string(i / width_) + ") is " + std::to_string(v) +
                                  "; intensities must be finite and nonnegative");
        }
    }
}

}  // namespace speckle
