#include "despeckle/reference.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace despeckle::reference {

namespace {

// Mirror-with-duplication by repeated reflection.
std::size_t mirror(long i, long n) {
  while (i < 0 || i >= n) i = i < 0 ? -i - 1 : 2 * n - 1 - i;
  return static_cast<std::size_t>(i);
}

std::vector<double> gather(const ImageGrid& g, std::size_t x, std::size_t y, std::size_t r) {
  std::vector<double> window;
  const long rr = static_cast<long>(r);
  for (long dy = -rr; dy <= rr; ++dy) {
    for (long dx = -rr; dx <= rr; ++dx) {
      window.push_back(g.at(mirror(static_cast<long>(x) + dx, static_cast<long>(g.width())),
                            mirror(static_cast<long>(y) + dy, static_cast<long>(g.height()))));
    }
  }
  return window;
}

struct Moments {
  double mean;
  double variance;
};

Moments moments(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  const double m = s / static_cast<double>(v.size());
  double q = 0.0;
  for (double x : v) q += (x - m) * (x - m);
  return {m, q / static_cast<double>(v.size())};
}

void require_fit(const ImageGrid& g, std::size_t r) {
  if (2 * r + 1 > std::min(g.width(), g.height())) {
    throw Error(ErrorKind::WindowTooLarge, "reference: window does not fit");
  }
}

template <typename F>
ImageGrid per_pixel(const ImageGrid& g, F f) {
  std::vector<double> out(g.size());
  for (std::size_t y = 0; y < g.height(); ++y) {
    for (std::size_t x = 0; x < g.width(); ++x) out[y * g.width() + x] = f(x, y);
  }
  return ImageGrid(g.width(), g.height(), std::move(out), g.max_value());
}

}  // namespace

LocalStats local_stats(const ImageGrid& grid, std::size_t radius) {
  require_fit(grid, radius);
  LocalStats stats{grid.width(), grid.height(), {}, {}};
  for (std::size_t y = 0; y < grid.height(); ++y) {
    for (std::size_t x = 0; x < grid.width(); ++x) {
      const auto m = moments(gather(grid, x, y, radius));
      stats.mean.push_back(m.mean);
      stats.variance.push_back(m.variance);
    }
  }
  return stats;
}

ImageGrid lee_filter(const ImageGrid& grid, const FilterSpec& spec) {
  require_fit(grid, spec.window_radius);
  const double cu2 = 1.0 / spec.looks;
  return per_pixel(grid, [&](std::size_t x, std::size_t y) {
    const auto m = moments(gather(grid, x, y, spec.window_radius));
    const double pixel = grid.at(x, y);
    if (cu2 == 0.0) return pixel;
    const double noise = m.mean * m.mean * cu2;
    double vx = (m.variance - noise) / (1.0 + cu2);
    if (vx < 0.0) vx = 0.0;
    const double w = (vx + noise == 0.0) ? 0.0 : vx / (vx + noise);
    return m.mean + w * (pixel - m.mean);
  });
}

ImageGrid kuan_filter(const ImageGrid& grid, const FilterSpec& spec) {
  require_fit(grid, spec.window_radius);
  const double cu2 = 1.0 / spec.looks;
  return per_pixel(grid, [&](std::size_t x, std::size_t y) {
    const auto m = moments(gather(grid, x, y, spec.window_radius));
    const double pixel = grid.at(x, y);
    if (cu2 == 0.0) return pixel;
    const double ci2 = m.mean == 0.0 ? 0.0 : m.variance / (m.mean * m.mean);
    double w = 0.0;
    if (ci2 > 0.0) w = std::min(1.0, std::max(0.0, (1.0 - cu2 / ci2) / (1.0 + cu2)));
    return m.mean + w * (pixel - m.mean);
  });
}

ImageGrid frost_filter(const ImageGrid& grid, const FilterSpec& spec) {
  require_fit(grid, spec.window_radius);
  const long r = static_cast<long>(spec.window_radius);
  return per_pixel(grid, [&](std::size_t x, std::size_t y) {
    const auto window = gather(grid, x, y, spec.window_radius);
    const auto m = moments(window);
    const double ci2 = m.mean == 0.0 ? 0.0 : m.variance / (m.mean * m.mean);
    double num = 0.0;
    double den = 0.0;
    std::size_t k = 0;
    for (long dy = -r; dy <= r; ++dy) {
      for (long dx = -r; dx <= r; ++dx, ++k) {
        const double dist = std::hypot(static_cast<double>(dx), static_cast<double>(dy));
        const double wgt = std::exp(-spec.damping * ci2 * dist);
        num += wgt * window[k];
        den += wgt;
      }
    }
    return num / den;
  });
}

ImageGrid gaussian_filter(const ImageGrid& grid, const FilterSpec& spec) {
  const double s = spec.sigma_spatial;
  const long r = static_cast<long>(std::ceil(3.0 * s));
  return per_pixel(grid, [&](std::size_t x, std::size_t y) {
    double num = 0.0;
    double den = 0.0;
    for (long dy = -r; dy <= r; ++dy) {
      for (long dx = -r; dx <= r; ++dx) {
        const double wgt = std::exp(-static_cast<double>(dx * dx + dy * dy) / (2.0 * s * s));
        num += wgt * grid.at(mirror(static_cast<long>(x) + dx, static_cast<long>(grid.width())),
                             mirror(static_cast<long>(y) + dy, static_cast<long>(grid.height())));
        den += wgt;
      }
    }
    return num / den;
  });
}

ImageGrid median_filter(const ImageGrid& grid, const FilterSpec& spec) {
  require_fit(grid, spec.window_radius);
  return per_pixel(grid, [&](std::size_t x, std::size_t y) {
    auto window = gather(grid, x, y, spec.window_radius);
    std::sort(window.begin(), window.end());
    return window[window.size() / 2];
  });
}

ImageGrid bilateral_filter(const ImageGrid& grid, const FilterSpec& spec) {
  const double s = spec.sigma_spatial;
  const double sr = spec.sigma_range.value_or(0.1 * grid.max_value());
  const long r = static_cast<long>(std::ceil(3.0 * s));
  return per_pixel(grid, [&](std::size_t x, std::size_t y) {
    const double center = grid.at(x, y);
    double num = 0.0;
    double den = 0.0;
    for (long dy = -r; dy <= r; ++dy) {
      for (long dx = -r; dx <= r; ++dx) {
        const double v =
            grid.at(mirror(static_cast<long>(x) + dx, static_cast<long>(grid.width())),
                    mirror(static_cast<long>(y) + dy, static_cast<long>(grid.height())));
        const double wgt = std::exp(-static_cast<double>(dx * dx + dy * dy) / (2.0 * s * s)) *
                           std::exp(-(v - center) * (v - center) / (2.0 * sr * sr));
        num += wgt * v;
        den += wgt;
      }
    }
    return num / den;
  });
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

}  // namespace despeckle::reference
