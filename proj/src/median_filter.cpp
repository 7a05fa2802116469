#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

#include "despeckle/filters.hpp"
#include "padding.hpp"

namespace despeckle {

namespace {

bool is_8bit_integral(const ImageGrid& grid) {
  return std::all_of(grid.pixels().begin(), grid.pixels().end(), [](double v) {
    return v >= 0.0 && v <= 255.0 && v == std::floor(v);
  });
}

// Sliding 256-bin histogram along each row; one column leaves and one enters
// per step.
void median_histogram(const detail::PaddedGrid& padded, std::size_t radius,
                      std::size_t width, std::size_t height, std::vector<double>& out) {
  const std::size_t side = 2 * radius + 1;
  const std::size_t rank = side * side / 2;
  const auto h = static_cast<std::ptrdiff_t>(height);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t y = 0; y < h; ++y) {
    std::array<std::uint32_t, 256> hist{};
    const auto column = [&](std::size_t px, int delta) {
      for (std::size_t dy = 0; dy < side; ++dy) {
        const auto v = static_cast<std::size_t>(padded.row(static_cast<std::size_t>(y) + dy)[px]);
        hist[v] = static_cast<std::uint32_t>(static_cast<int>(hist[v]) + delta);
      }
    };
    for (std::size_t px = 0; px < side; ++px) column(px, +1);
    double* dst = out.data() + static_cast<std::size_t>(y) * width;
    for (std::size_t x = 0;; ++x) {
      std::size_t seen = 0;
      std::size_t bin = 0;
      for (; bin < 256; ++bin) {
        seen += hist[bin];
        if (seen > rank) break;
      }
      dst[x] = static_cast<double>(bin);
      if (x + 1 == width) break;
      column(x, -1);
      column(x + side, +1);
    }
  }
}

void median_select(const detail::PaddedGrid& padded, std::size_t radius,
                   std::size_t width, std::size_t height, std::vector<double>& out) {
  const std::size_t side = 2 * radius + 1;
  const std::size_t mid = side * side / 2;
  const auto h = static_cast<std::ptrdiff_t>(height);
#pragma omp parallel
  {
    std::vector<double> window(side * side);
#pragma omp for schedule(static)
    for (std::ptrdiff_t y = 0; y < h; ++y) {
      for (std::size_t x = 0; x < width; ++x) {
        auto it = window.begin();
        for (std::size_t dy = 0; dy < side; ++dy) {
          const double* src = padded.row(static_cast<std::size_t>(y) + dy) + x;
          it = std::copy(src, src + side, it);
        }
        std::nth_element(window.begin(), window.begin() + static_cast<std::ptrdiff_t>(mid),
                         window.end());
        out[static_cast<std::size_t>(y) * width + x] = window[mid];
      }
    }
  }
}

}  // namespace

ImageGrid median_filter(const ImageGrid& grid, const FilterSpec& spec) {
  detail::require_kind(spec, FilterKind::Median);
  validate(spec);
  check_window(spec.window_radius, grid.width(), grid.height());
  const auto padded = detail::pad_symmetric(grid, spec.window_radius);
  std::vector<double> out(grid.size());
  if (is_8bit_integral(grid)) {
    median_histogram(padded, spec.window_radius, grid.width(), grid.height(), out);
  } else {
    median_select(padded, spec.window_radius, grid.width(), grid.height(), out);
  }
  return ImageGrid(grid.width(), grid.height(), std::move(out), grid.max_value());
}

}  // namespace despeckle
