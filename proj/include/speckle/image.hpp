#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace speckle {

/// Row-major grid of nonnegative finite intensities.
class Image {
public:
    Image(std::size_t width, std::size_t height, double fill = 0.0);
    Image(std::size_t width, std::size_t height, std::vector<double> pixels);

    std::size_t width() const noexcept { return width_; }
    std::size_t height() const noexcept { return height_; }
    std::size_t size() const noexcept { return pixels_.size(); }

    double operator()(std::size_t col, std::size_t row) const noexcept {
        return pixels_[row * width_ + col];
    }
    double& operator()(std::size_t col, std::size_t row) noexcept {
        return pixels_[row * width_ + col];
    }

    std::span<const double> pixels() const noexcept { return pixels_; }
    std::span<double> pixels() noexcept { return pixels_; }
    std::span<const double> row(std::size_t r) const noexcept {
        return std::span<const double>(pixels_).subspan(r * width_, width_);
    }

    /// Throws ValidationError if any pixel is negative or non-finite.
    void validate() const;

    friend bool operator==(const Image&, const Image&) = default;

private:
    std::size_t width_;
    std::size_t height_;
    std::vector<double> pixels_;
};

}  // namespace speckle
