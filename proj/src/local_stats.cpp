#include "despeckle/local_stats.hpp"

#include <algorithm>

#include "despeckle/filter_spec.hpp"
#include "padding.hpp"

namespace despeckle {

namespace detail {

PaddedGrid pad_symmetric(const ImageGrid& grid, std::size_t pad, double shift) {
  PaddedGrid out;
  out.pad = pad;
  out.width = grid.width() + 2 * pad;
  out.height = grid.height() + 2 * pad;
  out.pixels.resize(out.width * out.height);
  const auto w = static_cast<std::ptrdiff_t>(grid.width());
  const auto h = static_cast<std::ptrdiff_t>(grid.height());
  const auto p = static_cast<std::ptrdiff_t>(pad);
  const auto rows = static_cast<std::ptrdiff_t>(out.height);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t py = 0; py < rows; ++py) {
    const auto src = grid.row(static_cast<std::size_t>(reflect_index(py - p, h)));
    double* dst = out.pixels.data() + static_cast<std::size_t>(py) * out.width;
    for (std::ptrdiff_t px = 0; px < static_cast<std::ptrdiff_t>(out.width); ++px) {
      dst[px] = src[static_cast<std::size_t>(reflect_index(px - p, w))] - shift;
    }
  }
  return out;
}

}  // namespace detail

namespace {

// Summed-area table with a zero guard row and column: sat[(y+1)*(W+1) + x+1]
// is the sum of padded pixels [0..x] x [0..y].
struct SummedArea {
  std::size_t stride = 0;
  std::vector<double> sum;
  std::vector<double> sum_sq;
};

SummedArea build_tables(const detail::PaddedGrid& padded) {
  SummedArea sat;
  sat.stride = padded.width + 1;
  const std::size_t rows = padded.height + 1;
  sat.sum.assign(rows * sat.stride, 0.0);
  sat.sum_sq.assign(rows * sat.stride, 0.0);

  const auto height = static_cast<std::ptrdiff_t>(padded.height);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t y = 0; y < height; ++y) {
    const double* src = padded.row(static_cast<std::size_t>(y));
    double* s = sat.sum.data() + static_cast<std::size_t>(y + 1) * sat.stride;
    double* q = sat.sum_sq.data() + static_cast<std::size_t>(y + 1) * sat.stride;
    for (std::size_t x = 0; x < padded.width; ++x) {
      s[x + 1] = s[x] + src[x];
      q[x + 1] = q[x] + src[x] * src[x];
    }
  }

  // Column accumulation, split into column blocks so workers stream rows.
  constexpr std::size_t kBlock = 512;
  const auto blocks = static_cast<std::ptrdiff_t>((sat.stride + kBlock - 1) / kBlock);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t b = 0; b < blocks; ++b) {
    const std::size_t x0 = static_cast<std::size_t>(b) * kBlock;
    const std::size_t x1 = std::min(sat.stride, x0 + kBlock);
    for (std::size_t y = 2; y < rows; ++y) {
      double* s = sat.sum.data() + y * sat.stride;
      double* q = sat.sum_sq.data() + y * sat.stride;
      const double* sp = s - sat.stride;
      const double* qp = q - sat.stride;
      for (std::size_t x = x0; x < x1; ++x) {
        s[x] += sp[x];
        q[x] += qp[x];
      }
    }
  }
  return sat;
}

double grid_mean(const ImageGrid& grid) {
  double total = 0.0;
  for (std::size_t y = 0; y < grid.height(); ++y) {
    double row = 0.0;
    for (double v : grid.row(y)) row += v;
    total += row;
  }
  return total / static_cast<double>(grid.size());
}

}  // namespace

LocalStats local_stats(const ImageGrid& grid, std::size_t radius) {
  check_window(radius, grid.width(), grid.height());
  const double shift = grid_mean(grid);
  const auto padded = detail::pad_symmetric(grid, radius, shift);
  const auto sat = build_tables(padded);

  LocalStats stats;
  stats.width = grid.width();
  stats.height = grid.height();
  stats.mean.resize(grid.size());
  stats.variance.resize(grid.size());

  const std::size_t side = 2 * radius + 1;
  const double inv_n = 1.0 / static_cast<double>(side * side);
  const std::size_t w = grid.width();
  const auto h = static_cast<std::ptrdiff_t>(grid.height());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t y = 0; y < h; ++y) {
    const std::size_t top = static_cast<std::size_t>(y) * sat.stride;
    const std::size_t bottom = (static_cast<std::size_t>(y) + side) * sat.stride;
    double* mean = stats.mean.data() + static_cast<std::size_t>(y) * w;
    double* var = stats.variance.data() + static_cast<std::size_t>(y) * w;
    for (std::size_t x = 0; x < w; ++x) {
      const std::size_t l = x;
      const std::size_t r = x + side;
      const double s1 = sat.sum[bottom + r] - sat.sum[top + r] - sat.sum[bottom + l] +
                        sat.sum[top + l];
      const double s2 = sat.sum_sq[bottom + r] - sat.sum_sq[top + r] -
                        sat.sum_sq[bottom + l] + sat.sum_sq[top + l];
      const double m = s1 * inv_n;
      mean[x] = shift + m;
      var[x] = std::max(0.0, s2 * inv_n - m * m);
    }
  }
  return stats;
}

}  // namespace despeckle
