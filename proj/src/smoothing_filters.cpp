#include <algorithm>
#include <cmath>
#include <vector>

#include "despeckle/filters.hpp"
#include "padding.hpp"

namespace despeckle {

std::vector<double> gaussian_kernel_1d(double sigma) {
  const std::size_t radius = gaussian_radius(sigma);
  std::vector<double> taps(2 * radius + 1);
  const double inv = 1.0 / (2.0 * sigma * sigma);
  double total = 0.0;
  for (std::size_t i = 0; i < taps.size(); ++i) {
    const double t = static_cast<double>(i) - static_cast<double>(radius);
    taps[i] = std::exp(-t * t * inv);
    total += taps[i];
  }
  for (auto& t : taps) t /= total;
  return taps;
}

ImageGrid gaussian_filter(const ImageGrid& grid, const FilterSpec& spec) {
  detail::require_kind(spec, FilterKind::Gaussian);
  validate(spec);
  const auto taps = gaussian_kernel_1d(spec.sigma_spatial);
  const auto radius = static_cast<std::ptrdiff_t>(taps.size() / 2);
  const auto w = static_cast<std::ptrdiff_t>(grid.width());
  const auto h = static_cast<std::ptrdiff_t>(grid.height());

  // Horizontal pass.
  std::vector<double> tmp(grid.size());
#pragma omp parallel
  {
    std::vector<double> line(static_cast<std::size_t>(w + 2 * radius));
#pragma omp for schedule(static)
    for (std::ptrdiff_t y = 0; y < h; ++y) {
      const auto src = grid.row(static_cast<std::size_t>(y));
      for (std::ptrdiff_t x = -radius; x < w + radius; ++x) {
        line[static_cast<std::size_t>(x + radius)] =
            src[static_cast<std::size_t>(reflect_index(x, w))];
      }
      double* dst = tmp.data() + y * w;
      for (std::ptrdiff_t x = 0; x < w; ++x) {
        const double* in = line.data() + x;
        double acc = 0.0;
        for (std::size_t t = 0; t < taps.size(); ++t) acc += taps[t] * in[t];
        dst[x] = acc;
      }
    }
  }

  // Vertical pass; per pixel the taps are accumulated in ascending order.
  std::vector<double> out(grid.size(), 0.0);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t y = 0; y < h; ++y) {
    double* dst = out.data() + y * w;
    for (std::size_t t = 0; t < taps.size(); ++t) {
      const auto sy = reflect_index(y + static_cast<std::ptrdiff_t>(t) - radius, h);
      const double* src = tmp.data() + sy * w;
      const double k = taps[t];
      for (std::ptrdiff_t x = 0; x < w; ++x) dst[x] += k * src[x];
    }
  }
  return ImageGrid(grid.width(), grid.height(), std::move(out), grid.max_value());
}

ImageGrid bilateral_filter(const ImageGrid& grid, const FilterSpec& spec) {
  detail::require_kind(spec, FilterKind::Bilateral);
  validate(spec);
  const double sigma_r = spec.sigma_range.value_or(0.1 * grid.max_value());
  const std::size_t r = gaussian_radius(spec.sigma_spatial);
  const std::size_t side = 2 * r + 1;
  const auto padded = detail::pad_symmetric(grid, r);

  std::vector<double> spatial(side * side);
  const double inv_s = 1.0 / (2.0 * spec.sigma_spatial * spec.sigma_spatial);
  for (std::size_t dy = 0; dy < side; ++dy) {
    for (std::size_t dx = 0; dx < side; ++dx) {
      const double fx = static_cast<double>(dx) - static_cast<double>(r);
      const double fy = static_cast<double>(dy) - static_cast<double>(r);
      spatial[dy * side + dx] = std::exp(-(fx * fx + fy * fy) * inv_s);
    }
  }
  const double inv_r = 1.0 / (2.0 * sigma_r * sigma_r);

  const std::size_t w = grid.width();
  std::vector<double> out(grid.size());
  const auto h = static_cast<std::ptrdiff_t>(grid.height());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t y = 0; y < h; ++y) {
    const auto center_row = grid.row(static_cast<std::size_t>(y));
    for (std::size_t x = 0; x < w; ++x) {
      const double center = center_row[x];
      double num = 0.0;
      double den = 0.0;
      for (std::size_t dy = 0; dy < side; ++dy) {
        const double* src = padded.row(static_cast<std::size_t>(y) + dy) + x;
        const double* ks = spatial.data() + dy * side;
        for (std::size_t dx = 0; dx < side; ++dx) {
          const double diff = src[dx] - center;
          const double wgt = ks[dx] * std::exp(-diff * diff * inv_r);
          num += wgt * src[dx];
          den += wgt;
        }
      }
      out[static_cast<std::size_t>(y) * w + x] = num / den;
    }
  }
  return ImageGrid(grid.width(), grid.height(), std::move(out), grid.max_value());
}

}  // namespace despeckle
