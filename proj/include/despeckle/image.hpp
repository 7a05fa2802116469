#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "despeckle/error.hpp"

namespace despeckle {

/// Axis-aligned pixel rectangle. Bounds are checked against a grid at use.
struct Region {
  std::size_t x = 0;
  std::size_t y = 0;
  std::size_t w = 1;
  std::size_t h = 1;

  bool operator==(const Region&) const = default;
};

/// Row-major grayscale raster of doubles with a nominal dynamic range.
///
/// Every constructed grid satisfies: pixels.size() == width * height, all
/// pixels finite, max_value > 0. Grids are immutable once built.
class ImageGrid {
 public:
  ImageGrid(std::size_t width, std::size_t height, std::vector<double> pixels,
            double max_value);

  /// Constant-valued grid.
  static ImageGrid filled(std::size_t width, std::size_t height, double value,
                          double max_value);

  std::size_t width() const noexcept { return width_; }
  std::size_t height() const noexcept { return height_; }
  std::size_t size() const noexcept { return pixels_.size(); }
  double max_value() const noexcept { return max_value_; }

  std::span<const double> pixels() const noexcept { return pixels_; }
  std::span<const double> row(std::size_t y) const noexcept {
    return std::span<const double>(pixels_).subspan(y * width_, width_);
  }
  double at(std::size_t x, std::size_t y) const noexcept {
    return pixels_[y * width_ + x];
  }

  /// Same pixels, different nominal range.
  ImageGrid with_max_value(double max_value) const;

  bool same_shape(const ImageGrid& other) const noexcept {
    return width_ == other.width_ && height_ == other.height_;
  }

  bool operator==(const ImageGrid&) const = default;

 private:
  std::size_t width_;
  std::size_t height_;
  std::vector<double> pixels_;
  double max_value_;
};

/// Throws OutOfBounds unless `region` lies inside `grid`.
void check_region(const ImageGrid& grid, const Region& region);

/// Throws DimensionMismatch unless both grids have the same shape.
void check_same_shape(const ImageGrid& a, const ImageGrid& b);

/// Mirror-with-edge-duplication index: -1 -> 0, -2 -> 1, n -> n-1, n+1 -> n-2.
/// Valid for any offset; reflections repeat with period 2n.
inline std::ptrdiff_t reflect_index(std::ptrdiff_t i, std::ptrdiff_t n) noexcept {
  if (i >= 0 && i < n) return i;
  const std::ptrdiff_t period = 2 * n;
  std::ptrdiff_t m = i % period;
  if (m < 0) m += period;
  return m < n ? m : period - 1 - m;
}

}  // namespace despeckle
