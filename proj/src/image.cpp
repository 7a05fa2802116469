#include "despeckle/image.hpp"

#include <cmath>
#include <string>

namespace despeckle {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::UnsupportedFormat: return "UnsupportedFormat";
    case ErrorKind::CorruptFile: return "CorruptFile";
    case ErrorKind::IoError: return "IoError";
    case ErrorKind::RangeError: return "RangeError";
    case ErrorKind::OutOfBounds: return "OutOfBounds";
    case ErrorKind::InvalidParam: return "InvalidParam";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::WindowTooLarge: return "WindowTooLarge";
    case ErrorKind::DegenerateRegion: return "DegenerateRegion";
    case ErrorKind::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

ImageGrid::ImageGrid(std::size_t width, std::size_t height,
                     std::vector<double> pixels, double max_value)
    : width_(width), height_(height), pixels_(std::move(pixels)),
      max_value_(max_value) {
  if (width_ == 0 || height_ == 0) {
    throw Error(ErrorKind::InvalidParam, "image dimensions must be at least 1x1");
  }
  if (pixels_.size() != width_ * height_) {
    throw Error(ErrorKind::DimensionMismatch,
                "pixel count " + std::to_string(pixels_.size()) + " does not match " +
                    std::to_string(width_) + "x" + std::to_string(height_));
  }
  if (!(max_value_ > 0.0) || !std::isfinite(max_value_)) {
    throw Error(ErrorKind::InvalidParam, "max_value must be finite and positive");
  }
  for (double v : pixels_) {
    if (!std::isfinite(v)) {
      throw Error(ErrorKind::InvalidParam, "image contains a non-finite pixel");
    }
  }
}

ImageGrid ImageGrid::filled(std::size_t width, std::size_t height, double value,
                            double max_value) {
  return ImageGrid(width, height, std::vector<double>(width * height, value),
                   max_value);
}

ImageGrid ImageGrid::with_max_value(double max_value) const {
  return ImageGrid(width_, height_, pixels_, max_value);
}

void check_region(const ImageGrid& grid, const Region& r) {
  if (r.w == 0 || r.h == 0 || r.x + r.w > grid.width() ||
      r.y + r.h > grid.height() || r.x >= grid.width() || r.y >= grid.height()) {
    throw Error(ErrorKind::OutOfBounds,
                "region " + std::to_string(r.x) + "," + std::to_string(r.y) + "," +
                    std::to_string(r.w) + "," + std::to_string(r.h) +
                    " is outside the " + std::to_string(grid.width()) + "x" +
                    std::to_string(grid.height()) + " image");
  }
}

void check_same_shape(const ImageGrid& a, const ImageGrid& b) {
  if (!a.same_shape(b)) {
    throw Error(ErrorKind::DimensionMismatch,
                "image dimensions differ: " + std::to_string(a.width()) + "x" +
                    std::to_string(a.height()) + " vs " + std::to_string(b.width()) +
                    "x" + std::to_string(b.height()));
  }
}

}  // namespace despeckle
