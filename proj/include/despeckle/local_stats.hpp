#pragma once

#include <cstddef>
#include <vector>

#include "despeckle/image.hpp"

namespace despeckle {

/// Per-pixel window mean and population variance, row-major, same shape as
/// the source grid.
struct LocalStats {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<double> mean;
  std::vector<double> variance;
};

/// Box statistics over the (2r+1)^2 window with symmetric padding.
///
/// Built from two summed-area tables (I and I^2) over the padded image, so
/// cost per pixel is independent of r. Pixels are shifted by the grid mean
/// before accumulation to limit cancellation in E[I^2] - E[I]^2; variance is
/// clamped at 0.
LocalStats local_stats(const ImageGrid& grid, std::size_t radius);

}  // namespace despeckle
