#include "despeckle/synth.hpp"

#include <cmath>
#include <random>
#include <string>

namespace despeckle {

namespace {

// splitmix64 finalizer; decorrelates per-row seeds derived from one user seed.
std::uint64_t mix(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

void require_nonnegative(double level, const char* name) {
  if (!(level >= 0.0) || !std::isfinite(level)) {
    throw Error(ErrorKind::InvalidParam, std::string("phantom ") + name +
                                             " must be finite and >= 0");
  }
}

}  // namespace

ImageGrid generate_speckle_field(std::size_t width, std::size_t height,
                                 const SpeckleParams& params) {
  if (width == 0 || height == 0) {
    throw Error(ErrorKind::InvalidParam, "speckle field dimensions must be >= 1");
  }
  if (!(params.looks > 0.0) || !std::isfinite(params.looks)) {
    throw Error(ErrorKind::InvalidParam,
                "looks must be finite and > 0 (got " + std::to_string(params.looks) + ")");
  }
  std::vector<double> out(width * height);
  const auto rows = static_cast<std::ptrdiff_t>(height);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t y = 0; y < rows; ++y) {
    std::mt19937_64 engine(mix(params.seed ^ mix(static_cast<std::uint64_t>(y))));
    std::gamma_distribution<double> gamma(params.looks, 1.0 / params.looks);
    double* row = out.data() + static_cast<std::size_t>(y) * width;
    for (std::size_t x = 0; x < width; ++x) row[x] = gamma(engine);
  }
  return ImageGrid(width, height, std::move(out), 1.0);
}

ImageGrid apply_multiplicative(const ImageGrid& clean, const ImageGrid& field) {
  check_same_shape(clean, field);
  std::vector<double> out(clean.size());
  const auto a = clean.pixels();
  const auto b = field.pixels();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] * b[i];
  return ImageGrid(clean.width(), clean.height(), std::move(out), clean.max_value());
}

ImageGrid make_phantom(std::size_t width, std::size_t height, const PhantomKind& kind) {
  if (width == 0 || height == 0) {
    throw Error(ErrorKind::InvalidParam, "phantom dimensions must be >= 1");
  }
  std::vector<double> px(width * height);
  const auto at = [&](std::size_t x, std::size_t y) -> double& { return px[y * width + x]; };

  if (const auto* c = std::get_if<phantom::Constant>(&kind)) {
    require_nonnegative(c->level, "level");
    std::fill(px.begin(), px.end(), c->level);
  } else if (const auto* q = std::get_if<phantom::Quadrants>(&kind)) {
    require_nonnegative(q->top_left, "level");
    require_nonnegative(q->top_right, "level");
    require_nonnegative(q->bottom_left, "level");
    require_nonnegative(q->bottom_right, "level");
    if (width < 2 || height < 2) {
      throw Error(ErrorKind::InvalidParam, "quadrants phantom needs at least 2x2 pixels");
    }
    const std::size_t mx = width / 2;
    const std::size_t my = height / 2;
    for (std::size_t y = 0; y < height; ++y) {
      for (std::size_t x = 0; x < width; ++x) {
        at(x, y) = y < my ? (x < mx ? q->top_left : q->top_right)
                          : (x < mx ? q->bottom_left : q->bottom_right);
      }
    }
  } else if (const auto* s = std::get_if<phantom::StepEdge>(&kind)) {
    require_nonnegative(s->low, "low");
    require_nonnegative(s->high, "high");
    const std::size_t mx = width / 2;
    for (std::size_t y = 0; y < height; ++y) {
      for (std::size_t x = 0; x < width; ++x) at(x, y) = x < mx ? s->low : s->high;
    }
  } else {
    const auto& p = std::get<phantom::PointTargets>(kind);
    require_nonnegative(p.background, "background");
    require_nonnegative(p.amplitude, "amplitude");
    if (p.count == 0) throw Error(ErrorKind::InvalidParam, "point target count must be >= 1");
    std::fill(px.begin(), px.end(), p.background);
    // Row-major lattice: cols x rows cells, targets at (i+1)/(n+1) of each axis.
    const auto cols = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(p.count))));
    const std::size_t rows = (p.count + cols - 1) / cols;
    for (std::size_t k = 0; k < p.count; ++k) {
      const std::size_t i = k % cols;
      const std::size_t j = k / cols;
      const std::size_t x = (i + 1) * width / (cols + 1);
      const std::size_t y = (j + 1) * height / (rows + 1);
      at(std::min(x, width - 1), std::min(y, height - 1)) = p.amplitude;
    }
  }
  return ImageGrid(width, height, std::move(px), 255.0);
}

}  // namespace despeckle
