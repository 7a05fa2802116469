#include <algorithm>
#include <cmath>
#include <vector>

#include "despeckle/filters.hpp"
#include "despeckle/local_stats.hpp"
#include "padding.hpp"

namespace despeckle {

namespace detail {

double lee_gain(double mean, double var, double noise_var) noexcept {
  if (noise_var == 0.0) return 1.0;
  const double noise_power = mean * mean * noise_var;
  const double signal_var = std::max(0.0, (var - noise_power) / (1.0 + noise_var));
  const double denom = signal_var + noise_power;
  return denom == 0.0 ? 0.0 : signal_var / denom;
}

double kuan_gain(double mean, double var, double noise_var) noexcept {
  if (noise_var == 0.0) return 1.0;
  const double cv2 = squared_cv(mean, var);
  if (cv2 == 0.0) return 0.0;
  return std::clamp((1.0 - noise_var / cv2) / (1.0 + noise_var), 0.0, 1.0);
}

}  // namespace detail

namespace {

template <typename Gain>
ImageGrid adaptive_blend(const ImageGrid& grid, const FilterSpec& spec, Gain gain) {
  validate(spec);
  const auto stats = local_stats(grid, spec.window_radius);
  const double noise_var = spec.noise_variance();
  const auto src = grid.pixels();
  std::vector<double> out(grid.size());
  const auto n = static_cast<std::ptrdiff_t>(out.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const double m = stats.mean[i];
    out[i] = detail::blend(m, src[i], gain(m, stats.variance[i], noise_var));
  }
  return ImageGrid(grid.width(), grid.height(), std::move(out), grid.max_value());
}

}  // namespace

ImageGrid lee_filter(const ImageGrid& grid, const FilterSpec& spec) {
  detail::require_kind(spec, FilterKind::Lee);
  return adaptive_blend(grid, spec, detail::lee_gain);
}

ImageGrid kuan_filter(const ImageGrid& grid, const FilterSpec& spec) {
  detail::require_kind(spec, FilterKind::Kuan);
  return adaptive_blend(grid, spec, detail::kuan_gain);
}

ImageGrid frost_filter(const ImageGrid& grid, const FilterSpec& spec) {
  detail::require_kind(spec, FilterKind::Frost);
  validate(spec);
  const std::size_t r = spec.window_radius;
  const auto stats = local_stats(grid, r);
  const auto padded = detail::pad_symmetric(grid, r);
  const std::size_t side = 2 * r + 1;

  std::vector<double> distance(side * side);
  for (std::size_t dy = 0; dy < side; ++dy) {
    for (std::size_t dx = 0; dx < side; ++dx) {
      const double fx = static_cast<double>(dx) - static_cast<double>(r);
      const double fy = static_cast<double>(dy) - static_cast<double>(r);
      distance[dy * side + dx] = std::sqrt(fx * fx + fy * fy);
    }
  }

  const std::size_t w = grid.width();
  std::vector<double> out(grid.size());
  const auto h = static_cast<std::ptrdiff_t>(grid.height());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * w + x;
      const double decay =
          spec.damping * detail::squared_cv(stats.mean[i], stats.variance[i]);
      double num = 0.0;
      double den = 0.0;
      for (std::size_t dy = 0; dy < side; ++dy) {
        const double* src = padded.row(static_cast<std::size_t>(y) + dy) + x;
        const double* dist = distance.data() + dy * side;
        for (std::size_t dx = 0; dx < side; ++dx) {
          const double m = std::exp(-decay * dist[dx]);
          num += m * src[dx];
          den += m;
        }
      }
      out[i] = num / den;
    }
  }
  return ImageGrid(grid.width(), grid.height(), std::move(out), grid.max_value());
}

ImageGrid apply_filter(const ImageGrid& grid, const FilterSpec& spec) {
  switch (spec.kind) {
    case FilterKind::Lee: return lee_filter(grid, spec);
    case FilterKind::Frost: return frost_filter(grid, spec);
    case FilterKind::Kuan: return kuan_filter(grid, spec);
    case FilterKind::Gaussian: return gaussian_filter(grid, spec);
    case FilterKind::Median: return median_filter(grid, spec);
    case FilterKind::Bilateral: return bilateral_filter(grid, spec);
  }
  throw Error(ErrorKind::InvalidParam, "unknown filter kind");
}

}  // namespace despeckle
